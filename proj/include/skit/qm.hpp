// Queue machines, their direct simulation, and their encoding as a pair of
// session types (a queue and a control) whose composition mirrors the run.
#pragma once

#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "skit/relation.hpp"
#include "skit/types.hpp"

namespace skit {

using Word = std::vector<std::string>;

struct QmError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct QueueMachine {
  std::vector<std::string> states, sigma, gamma;
  std::string dollar = "$";
  std::string start;
  std::map<std::pair<std::string, std::string>, std::pair<std::string, Word>> delta;

  // delta total on states x gamma, sigma inside gamma, dollar in gamma \ sigma.
  void validate() const;
  const std::pair<std::string, Word>& next(const std::string& q, const std::string& a) const;
};

// {"states":[..],"sigma":[..],"gamma":[..],"dollar":"$","start":"s","delta":{"s,A":["s","BC"]}}
// A word given as a string is read one character per symbol; arrays of
// symbols are accepted too.
QueueMachine parse_machine_json(const std::string& text);
std::string machine_json(const QueueMachine& m);
Word parse_word(const std::string& w);
std::string show_word(const Word& w);

struct QmConfig {
  std::string state;
  Word queue;
  bool operator==(const QmConfig&) const = default;
};

enum class QmStatus { Accepted, Running };
const char* qm_status_name(QmStatus s);

struct QmRun {
  QmStatus status = QmStatus::Running;
  size_t steps = 0;
  std::vector<QmConfig> trace;  // every configuration, start first
};

QmRun simulate_qm(const QueueMachine& m, const Word& input, size_t max_steps);

TypeAutomaton encode_queue(const QueueMachine& m, const Word& contents);
TypeAutomaton encode_control(const QueueMachine& m, const std::string& state);
// Queue type for input·$ and control type for the start state.
std::pair<TypeAutomaton, TypeAutomaton> encode(const QueueMachine& m, const Word& input);

struct CorrespondenceResult {
  bool holds = true;
  size_t steps_checked = 0;
  std::string failure;
};
// For every simulated step (p, A a) -> (q, a g): the queue type does !A then
// ?g and the control type does ?A then !g, in full mode, landing on the
// encodings of the next configuration.
CorrespondenceResult check_correspondence(const QueueMachine& m, const Word& input, size_t max_steps);

struct QmFixture {
  QueueMachine machine;
  Word input;
  TypeAutomaton queue_type, control_type;
  QmRun oracle;
  Verdict compose;
  // Accepted never meets Yes; a Yes validates; a No replays.
  bool consistent = true;
  std::string note;
};
QmFixture undecidability_corpus(const QueueMachine& m, const Word& input, size_t max_steps, const Budget& b = {});

// Small random machine: states q0.., gamma a.. plus $, outputs of length <= max_out.
QueueMachine random_machine(std::mt19937_64& rng, size_t max_states, size_t max_gamma, size_t max_out = 2);
Word random_input(std::mt19937_64& rng, const QueueMachine& m, size_t max_len);

}  // namespace skit
