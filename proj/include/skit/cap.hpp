// CaP processes: syntax, parsing and a buffered run-time with schedulers.
#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "skit/measure_value.hpp"
#include "skit/types.hpp"

namespace skit {

struct Proc;
using ProcP = std::shared_ptr<const Proc>;

struct Proc {
  enum class K { Done, Link, Close, Wait, Select, Case, Fork, Join, Choice, Cut, Call };
  K k = K::Done;
  std::string x;    // subject channel; Cut: the bound channel
  std::string y;    // Link: the other channel; Fork/Join: the bound name
  std::string tag;  // Select
  std::vector<std::pair<std::string, ProcP>> arms;  // Case, source order
  // Wait/Select/Join/Case-less continuations live in p. Fork: payload p,
  // continuation q. Choice and Cut: left p, right q.
  ProcP p, q;
  TypeP left_type, right_type;  // Cut annotations
  std::string cut_id;
  std::string name;               // Call
  std::vector<std::string> args;  // Call
  std::vector<std::string> fv;    // free names, sorted
  int line = 0, col = 0;
};

const char* kind_name(Proc::K k);

struct Def {
  std::string name;
  std::vector<std::string> params;
  ProcP body;
  int line = 0;
};

struct Signature {
  std::string name;
  std::vector<std::pair<std::string, TypeP>> params;
  int line = 0;
};

struct Program {
  TypeGrammarSource types;
  std::vector<Def> defs;
  std::vector<Signature> sigs;
  ProcP main;  // null when the file has no `main`

  const Def* find_def(const std::string& name) const;
  const Signature* find_sig(const std::string& name) const;
  std::vector<std::string> cut_ids() const;
};

// Items: `type N = T`, `sig A(x: T, ...)`, `def A(x, ...) = P`, `main = P`.
Program parse_program(const std::string& text);
// Adds `type` and `sig` items from a separate file.
void merge_signatures(Program& prog, const std::string& text);

std::string show(const Proc& p);

// ---- run-time --------------------------------------------------------------

struct RunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Endpoint {
  int chan = -1;
  int side = 0;
  auto operator<=>(const Endpoint&) const = default;
};
using Env = std::map<std::string, Endpoint>;

struct Message {
  enum class K { Tag, Fork } k = K::Tag;
  std::string tag;
  ProcP proc;         // Fork: the process to spawn
  std::string bound;  // Fork: its bound name
  Env env;            // Fork: endpoints of its other free names
  TypeP payload;      // Fork: sender-side payload type, if known
};

struct Thread {
  int id = 0;
  ProcP term;  // after normalization: Link, Close, Wait, Case, Join or Choice
  Env env;
};

struct Channel {
  std::string name;
  std::deque<Message> q[2];  // q[s]: sent from side s, waiting at side 1 - s
  TypeP type[2];             // current type of each side; null when unknown
};

struct Config {
  const Program* prog = nullptr;
  std::map<int, Thread> threads;
  std::map<int, Channel> channels;
  int next_thread = 0, next_chan = 0;

  bool done() const { return threads.empty() && channels.empty(); }
};

// Free names of p become endpoints of channels nobody else holds.
Config to_configuration(const Program& prog, const ProcP& p);

struct Redex {
  enum class K { Choice, Link, Close, Select, Fork } k = K::Choice;
  int thread = -1;   // chooser, linker, closer or receiver
  int side = 0;      // Choice: 0 left, 1 right
  int partner = -1;  // Close: the waiting thread
  int chan = -1;
  std::string rule() const;  // r-choice, r-link, r-close, r-select, r-fork
  std::string key() const;   // identifies the redex class across steps
};

std::vector<Redex> enabled_redexes(const Config& c);
Config step(const Config& c, const Redex& r);  // throws RunError on a stale redex

// Measure of a choice branch given the current types of its free names.
using BranchMeasure = std::function<MeasureValue(const Proc&, const std::map<std::string, TypeP>&)>;

struct Scheduler {
  enum class Kind { Random, MinMeasure, Fair } kind = Kind::MinMeasure;
  uint64_t seed = 0;
  BranchMeasure measure;  // MinMeasure; without it choices go left
};
const char* scheduler_name(Scheduler::Kind k);
Scheduler::Kind parse_scheduler(const std::string& s);

struct TraceEvent {
  size_t step = 0;
  std::string rule, channel, message, decision;
  int thread = -1;
};
std::string trace_json(const TraceEvent& e);

enum class RunStatus { DoneReached, StuckNotDone, BudgetExhausted };
const char* status_name(RunStatus s);

struct RunResult {
  RunStatus status = RunStatus::BudgetExhausted;
  size_t steps = 0;
  Config final;
};

using TraceHook = std::function<void(const TraceEvent&, const Config&)>;
RunResult run(Config c, const Scheduler& s, size_t max_steps, const TraceHook& on_trace = {});

// A min-measure run first, then breadth-first search over configurations.
bool is_weakly_terminating_probe(const Config& c, size_t budget, const BranchMeasure& m = {});

// Stable text for a configuration, up to renaming of channels and threads.
std::string config_key(const Config& c);
std::string describe(const Config& c);

}  // namespace skit
