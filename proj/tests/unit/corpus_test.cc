#include "doctest.h"
#include "skit/corpus.hpp"

using namespace skit;

TEST_SUITE("corpus") {
  TEST_CASE("the bundled manifest loads") {
    auto cs = bundled_corpus();
    CHECK(cs.size() >= 30);
  }

  TEST_CASE("an entry without an expectation is rejected") {
    CHECK_THROWS_WITH_AS(load_manifest(R"({"fixtures":[{"name":"x","file":"zero.st","check":"relation",
      "rel":"fair","left":"Z","right":"T"}]})"),
                         doctest::Contains("expect"), CorpusError);
  }

  TEST_CASE("unknown check kinds, missing files and duplicates are rejected") {
    CHECK_THROWS_AS(load_manifest(R"({"fixtures":[{"name":"x","file":"zero.st","check":"guess","expect":"yes"}]})"),
                    CorpusError);
    CHECK_THROWS_AS(load_manifest(R"({"fixtures":[{"name":"x","file":"nope.st","check":"relation","expect":"yes"}]})"),
                    CorpusError);
    CHECK_THROWS_AS(load_manifest(R"({"fixtures":[
      {"name":"x","file":"zero.st","check":"relation","expect":"yes"},
      {"name":"x","file":"zero.st","check":"relation","expect":"yes"}]})"),
                    CorpusError);
    CHECK_THROWS_AS(load_manifest("not json"), CorpusError);
  }

  TEST_CASE("a wrong expectation fails the case") {
    auto cs = load_manifest(R"({"fixtures":[{"name":"x","file":"zero.st","check":"relation",
      "rel":"fair","left":"Z","right":"T","expect":"no"}]})");
    CaseResult r = run_case(cs.at(0));
    CHECK_FALSE(r.pass);
  }
}
