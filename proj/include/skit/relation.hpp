// Bounded game solvers for composition and the subtyping variants.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skit/lts.hpp"
#include "skit/types.hpp"

namespace skit {

enum class RelationKind { Compose, FairSub, SyncSub, AsyncSub, BzFairSub, AuxSub };
enum class Outcome { Yes, No, Unknown };

const char* kind_name(RelationKind k);
RelationKind parse_kind(const std::string& s);  // compose fair sync async bzfair aux
const char* outcome_name(Outcome o);

struct Budget {
  size_t max_pairs = 2000;
  size_t max_nodes_per_type = 1024;
};

// Relations known to be closed for a kind; a witness may lean on them
// instead of listing infinitely many pairs.
//   Identity  {(X, X)}          subtyping kinds
//   Dual      {(dual X, X)} and {(X, dual X)}   composition
//   ZeroLeft  {(0, X)}          composition, fair/aux/async/bzfair
//   ZeroRight {(X, 0)}          composition
//   TopRight  {(X, top)}        fair/aux/async/bzfair
enum class Family { Identity, Dual, ZeroLeft, ZeroRight, TopRight };
const char* family_name(Family f);
bool family_allowed(Family f, RelationKind k);
bool in_family(Family f, const TypeAutomaton& s, const TypeAutomaton& t);

struct TypePair {
  TypeP s, t;
};

struct Witness {
  std::vector<TypePair> pairs;
  std::vector<Family> families;
  // "full": closed under the clauses as stated.
  // "must-challenge": closed with immediate challenges only; stands for the
  // relation only on first-order fairly terminating types.
  std::string basis = "full";
};

struct CxStep {
  TypePair pair;
  std::string clause;
  std::optional<Label> label;     // challenge
  std::optional<Label> response;  // responder's channel label, if any
  std::string branch;             // "payload" | "cont" | "" ; final step: ""
};

struct Stats {
  size_t pairs_explored = 0;
  size_t max_automaton_size = 0;
  size_t violations = 0;
  Budget budget;
  std::string phase;
};

struct Verdict {
  RelationKind kind = RelationKind::FairSub;
  Outcome outcome = Outcome::Unknown;
  std::optional<Witness> witness;
  std::vector<CxStep> counterexample;  // root first, violating pair last
  std::string reason;                  // clause or budget reason
  Mode challenge = Mode::Full;         // challenge mode of the game that decided
  TypePair root;
  Stats stats;
  std::vector<std::string> notes;
};

struct CheckOptions {
  bool families = true;
  // For first-order fairly terminating inputs, decide composition and fair
  // subtyping through the game with immediate challenges.
  bool ffst_shortcut = true;
};

Verdict check(const TypeAutomaton& s, const TypeAutomaton& t, RelationKind kind, const Budget& b = {},
              const CheckOptions& opt = {});

bool validate_witness(const Witness& w, RelationKind kind);

// Re-derives every step with the LTS and confirms the last one violates the
// named clause.
bool replay_counterexample(const Verdict& v);

struct CrossReport {
  Verdict compose, fairsub;
  bool consistent = true;
};
CrossReport cross_check_correct_subt(const TypeAutomaton& s, const TypeAutomaton& t, const Budget& b = {});

struct DualClosureReport {
  Verdict forward, backward;
  bool applicable = false;     // forward was Yes
  bool holds = true;           // backward Yes whenever applicable
  bool dual_witness_valid = true;
};
DualClosureReport dual_closure_check(const TypeAutomaton& s, const TypeAutomaton& t, const Budget& b = {});

Witness dual_witness(const Witness& w, RelationKind kind);

}  // namespace skit
