// Bundled fixtures and their expected verdicts.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace skit {

struct EmbeddedFile {
  const char* name;
  const char* text;
};
// Every file of fixtures/, compiled in.
const std::vector<EmbeddedFile>& embedded_files();
// Throws std::out_of_range when absent.
std::string embedded_text(const std::string& name);

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FixtureCase {
  std::string name, file, check;
  nlohmann::json spec;  // the whole manifest entry
};

// Checks that every entry names a known check, an existing file and an
// expected outcome.
std::vector<FixtureCase> load_manifest(const std::string& text);
std::vector<FixtureCase> bundled_corpus();

struct CaseResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};
CaseResult run_case(const FixtureCase& c);

}  // namespace skit
