// Measure inference and the typing rules for CaP.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "skit/cap.hpp"
#include "skit/measure_value.hpp"
#include "skit/relation.hpp"

namespace skit {

// Monotone equations over measure variables, solved by Kleene iteration.
struct MExpr {
  enum class K { Const, Var, Sum, Min, MaxMonus } k = K::Const;
  uint64_t c = 0;              // Const: the value; Sum/Min: added constant
  int var = -1;                // Var
  std::vector<MExpr> args;     // Sum: c + sum; Min: c + min; MaxMonus: max of args[i] monus sub[i]
  std::vector<uint64_t> sub;   // MaxMonus

  static MExpr constant(uint64_t n);
  static MExpr variable(int v);
  static MExpr sum(uint64_t c, std::vector<MExpr> xs);
  static MExpr min_plus(uint64_t c, std::vector<MExpr> xs);
  static MExpr max_monus(std::vector<MExpr> xs, std::vector<uint64_t> sub);

  MeasureValue eval(const std::vector<MeasureValue>& env) const;
};

class MeasureSystem {
 public:
  int add_var(const std::string& name);
  void set(int var, MExpr e);
  size_t size() const { return names_.size(); }
  const std::string& name(int v) const { return names_.at(static_cast<size_t>(v)); }

  // Least solution; values past `cap` become Infinity. `rounds` reports the
  // number of Kleene rounds actually run.
  std::vector<MeasureValue> solve(uint64_t cap = uint64_t{1} << 20, size_t* rounds = nullptr) const;

 private:
  std::vector<std::string> names_;
  std::vector<MExpr> eqs_;
};

using Context = std::map<std::string, TypeP>;

enum class ObligationStatus { Yes, No, Unknown, Assumed };
const char* obligation_name(ObligationStatus s);

struct Obligation {
  std::string site;        // cut id, or "link x y"
  std::string where;       // enclosing definition or "main"
  RelationKind kind = RelationKind::Compose;
  TypeP s, t;              // the pair handed to the checker
  ObligationStatus status = ObligationStatus::Unknown;
  std::string detail;      // checker reason and statistics
  int line = 0, col = 0;
  std::shared_ptr<const Verdict> verdict;  // null when assumed
};

struct TypeIssue {
  std::string where;
  std::string message;
  int line = 0, col = 0;
};

enum class Overall { WellTyped, IllTyped, Conditional };
const char* overall_name(Overall o);

struct TypeReport {
  std::map<std::string, MeasureValue> measures;  // per definition, plus "main"
  std::vector<Obligation> obligations;
  std::vector<TypeIssue> errors;
  std::set<std::string> rules_used;  // done call one bot choice times par plus with top link cut
  Overall overall = Overall::WellTyped;
  std::vector<std::string> unresolved;  // the non-Yes obligations, as text
};

struct TypecheckOptions {
  std::set<std::string> assume_cuts;
  Budget budget;
  uint64_t measure_cap = uint64_t{1} << 20;
};

// Signatures come from the program's `sig` items. Throws TypeError when a
// definition has no signature or a signature misses a channel.
std::map<std::string, MeasureValue> infer_measures(const Program& prog, uint64_t cap = uint64_t{1} << 20);

TypeReport typecheck(const Program& prog, const TypecheckOptions& opt = {});

std::string report_text(const TypeReport& r);
std::string report_json(const TypeReport& r);

// Measure of a term in a context of current endpoint types, using the
// definition measures in `defs`; Infinity when the term does not check.
BranchMeasure branch_measure(const Program& prog, std::map<std::string, MeasureValue> defs);

}  // namespace skit
