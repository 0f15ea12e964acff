#include "skit/measure.hpp"

#include <sstream>

#include "json.hpp"

namespace skit {

MExpr MExpr::constant(uint64_t n) {
  MExpr e;
  e.c = n;
  return e;
}

MExpr MExpr::variable(int v) {
  MExpr e;
  e.k = K::Var;
  e.var = v;
  return e;
}

MExpr MExpr::sum(uint64_t c, std::vector<MExpr> xs) {
  MExpr e;
  e.k = K::Sum;
  e.c = c;
  e.args = std::move(xs);
  return e;
}

MExpr MExpr::min_plus(uint64_t c, std::vector<MExpr> xs) {
  MExpr e;
  e.k = K::Min;
  e.c = c;
  e.args = std::move(xs);
  return e;
}

MExpr MExpr::max_monus(std::vector<MExpr> xs, std::vector<uint64_t> sub) {
  MExpr e;
  e.k = K::MaxMonus;
  e.args = std::move(xs);
  e.sub = std::move(sub);
  return e;
}

MeasureValue MExpr::eval(const std::vector<MeasureValue>& env) const {
  switch (k) {
    case K::Const: return MeasureValue::of(c);
    case K::Var: return env.at(static_cast<size_t>(var));
    case K::Sum: {
      MeasureValue v = MeasureValue::of(c);
      for (auto& a : args) v = v + a.eval(env);
      return v;
    }
    case K::Min: {
      MeasureValue v = MeasureValue::infinity();
      for (auto& a : args) v = min(v, a.eval(env));
      return MeasureValue::of(c) + v;
    }
    case K::MaxMonus: {
      MeasureValue v = MeasureValue::of(0);
      for (size_t i = 0; i < args.size(); ++i) v = max(v, args[i].eval(env).monus(sub[i]));
      return v;
    }
  }
  return MeasureValue::infinity();
}

int MeasureSystem::add_var(const std::string& name) {
  names_.push_back(name);
  eqs_.push_back(MExpr::constant(0));
  return static_cast<int>(names_.size() - 1);
}

void MeasureSystem::set(int var, MExpr e) { eqs_.at(static_cast<size_t>(var)) = std::move(e); }

std::vector<MeasureValue> MeasureSystem::solve(uint64_t cap, size_t* rounds) const {
  std::vector<MeasureValue> v(eqs_.size(), MeasureValue::of(0));
  size_t r = 0;
  for (bool changed = true; changed;) {
    changed = false;
    ++r;
    for (size_t i = 0; i < eqs_.size(); ++i) {
      MeasureValue nv = eqs_[i].eval(v);
      if (!nv.inf && nv.n > cap) nv = MeasureValue::infinity();
      if (!(nv == v[i])) {
        v[i] = nv;
        changed = true;
      }
    }
  }
  if (rounds) *rounds = r;
  return v;
}

const char* obligation_name(ObligationStatus s) {
  switch (s) {
    case ObligationStatus::Yes: return "yes";
    case ObligationStatus::No: return "no";
    case ObligationStatus::Unknown: return "unknown";
    case ObligationStatus::Assumed: return "assumed";
  }
  return "?";
}

const char* overall_name(Overall o) {
  switch (o) {
    case Overall::WellTyped: return "well-typed";
    case Overall::IllTyped: return "ill-typed";
    case Overall::Conditional: return "conditional";
  }
  return "?";
}

namespace {

TypeP share(TypeAutomaton t) { return std::make_shared<const TypeAutomaton>(std::move(t)); }
TypeP sub(const TypeP& t, int id) { return share(canonicalize(t->rerooted(id))); }

std::string show_ctx(const Context& g) {
  std::string s = "{";
  for (auto& [n, t] : g) {
    if (s.size() > 1) s += ", ";
    s += n + ": " + (t ? show(*t) : std::string("?"));
  }
  return s + "}";
}

struct Failure {
  TypeIssue issue;
};

class Checker {
 public:
  Checker(const Program& prog, bool collect) : prog_(prog), collect_(collect) {
    for (auto& d : prog.defs) vars_[d.name] = static_cast<int>(vars_.size());
  }

  int var_of(const std::string& def) const { return vars_.at(def); }
  const std::map<std::string, int>& vars() const { return vars_; }

  // Throws Failure on the first rule that does not apply.
  MExpr check(const Proc& p, Context g) {
    switch (p.k) {
      case Proc::K::Done: {
        rule("done");
        if (!g.empty()) fail(p, "done needs an empty context, got " + show_ctx(g));
        return MExpr::constant(0);
      }
      case Proc::K::Close: {
        rule("one");
        auto it = g.find(p.x);
        if (g.size() != 1 || it == g.end() || !it->second || it->second->top().kind != Kind::One)
          fail(p, "close " + p.x + " needs context exactly {" + p.x + ": end!}, got " + show_ctx(g));
        return MExpr::constant(1);
      }
      case Proc::K::Wait: {
        rule("bot");
        TypeP t = take(p, g, p.x);
        if (t->top().kind != Kind::Bot) fail(p, "wait " + p.x + " needs end?, got " + show(*t));
        return check(*p.p, std::move(g));
      }
      case Proc::K::Select: {
        rule("plus");
        TypeP t = take(p, g, p.x);
        if (t->top().kind != Kind::Plus) fail(p, p.x + "!" + p.tag + " needs an internal choice, got " + show(*t));
        for (auto& b : t->top().branches)
          if (b.tag == p.tag) {
            g[p.x] = sub(t, b.cont);
            return MExpr::sum(1 + b.measure, {check(*p.p, std::move(g))});
          }
        fail(p, "tag '" + p.tag + "' is not offered by " + show(*t));
      }
      case Proc::K::Case: {
        TypeP t = take(p, g, p.x);
        if (t->top().kind != Kind::With) fail(p, "case " + p.x + " needs an external choice, got " + show(*t));
        if (t->top().branches.empty()) {
          rule("top");
          return MExpr::constant(0);
        }
        rule("with");
        std::vector<MExpr> xs;
        std::vector<uint64_t> subs;
        for (auto& b : t->top().branches) {
          const Proc* arm = nullptr;
          for (auto& [tag, body] : p.arms)
            if (tag == b.tag) arm = body.get();
          if (!arm) fail(p, "case " + p.x + " has no branch for '" + b.tag + "' of " + show(*t));
          Context gi = g;
          gi[p.x] = sub(t, b.cont);
          xs.push_back(check(*arm, std::move(gi)));
          subs.push_back(b.measure);
        }
        return MExpr::max_monus(std::move(xs), std::move(subs));
      }
      case Proc::K::Fork: {
        rule("times");
        TypeP t = take(p, g, p.x);
        if (t->top().kind != Kind::Times) fail(p, p.x + "!(" + p.y + ") needs a channel output, got " + show(*t));
        Context gp, gq = split(g, *p.p, p.y, gp);
        if (gp.count(p.x)) fail(p, "payload of " + p.x + "!(" + p.y + ") uses " + p.x + " itself");
        for (auto& n : p.q->fv)
          if (gp.count(n)) fail(p, "channel " + n + " used by both the payload and the continuation");
        gp[p.y] = sub(t, t->top().payload);
        gq[p.x] = sub(t, t->top().cont);
        return MExpr::sum(1, {check(*p.p, std::move(gp)), check(*p.q, std::move(gq))});
      }
      case Proc::K::Join: {
        rule("par");
        TypeP t = take(p, g, p.x);
        if (t->top().kind != Kind::Par) fail(p, p.x + "?(" + p.y + ") needs a channel input, got " + show(*t));
        if (p.y == p.x || g.count(p.y)) fail(p, "received name " + p.y + " shadows a live channel");
        g[p.x] = sub(t, t->top().cont);
        g[p.y] = sub(t, t->top().payload);
        return check(*p.p, std::move(g));
      }
      case Proc::K::Choice: {
        rule("choice");
        return MExpr::min_plus(1, {check(*p.p, g), check(*p.q, g)});
      }
      case Proc::K::Link: {
        rule("link");
        if (p.x == p.y || g.size() != 2 || !g.count(p.x) || !g.count(p.y) || !g[p.x] || !g[p.y])
          fail(p, "link " + p.x + " " + p.y + " needs context exactly {" + p.x + ", " + p.y + "}, got " + show_ctx(g));
        if (collect_)
          obligations_.push_back({"link " + p.x + " " + p.y, where_, RelationKind::FairSub, share(dual(*g[p.x])), g[p.y],
                                  ObligationStatus::Unknown, "", p.line, p.col});
        return MExpr::constant(1);
      }
      case Proc::K::Cut: {
        rule("cut");
        Context gp, gq = split(g, *p.p, p.x, gp);
        for (auto& n : p.q->fv)
          if (n != p.x && gp.count(n)) fail(p, "channel " + n + " used on both sides of the cut on " + p.x);
        gp[p.x] = p.left_type;
        gq[p.x] = p.right_type;
        if (collect_)
          obligations_.push_back({p.cut_id, where_, RelationKind::Compose, p.left_type, p.right_type,
                                  ObligationStatus::Unknown, "", p.line, p.col});
        return MExpr::sum(0, {check(*p.p, std::move(gp)), check(*p.q, std::move(gq))});
      }
      case Proc::K::Call: {
        rule("call");
        const Signature* s = prog_.find_sig(p.name);
        if (!s) fail(p, "no signature for " + p.name);
        if (s->params.size() != p.args.size()) fail(p, "arity mismatch calling " + p.name);
        Context want;
        for (size_t i = 0; i < p.args.size(); ++i) {
          auto it = g.find(p.args[i]);
          if (it == g.end() || !it->second) fail(p, p.args[i] + " is not in context " + show_ctx(g));
          if (!equiv(*it->second, *s->params[i].second))
            fail(p, p.name + " expects " + p.args[i] + ": " + show(*s->params[i].second) + ", got " + show(*it->second));
          want[p.args[i]] = it->second;
        }
        if (want.size() != g.size()) fail(p, "call " + p.name + " leaves channels unused in " + show_ctx(g));
        return MExpr::variable(var_of(p.name));
      }
    }
    fail(p, "unknown term");
  }

  void set_where(std::string w) { where_ = std::move(w); }
  std::vector<Obligation>& obligations() { return obligations_; }
  const std::set<std::string>& rules() const { return rules_; }

 private:
  [[noreturn]] void fail(const Proc& p, const std::string& msg) { throw Failure{{where_, msg, p.line, p.col}}; }

  void rule(const char* r) { rules_.insert(r); }

  TypeP take(const Proc& p, Context& g, const std::string& x) {
    auto it = g.find(x);
    if (it == g.end() || !it->second) fail(p, x + " is not in context " + show_ctx(g));
    TypeP t = it->second;
    g.erase(it);
    return t;
  }

  // The part of g used by `left` (minus its bound name) goes to `gp`; the
  // rest is returned.
  Context split(const Context& g, const Proc& left, const std::string& bound, Context& gp) {
    Context rest = g;
    for (auto& n : left.fv) {
      if (n == bound) continue;
      auto it = rest.find(n);
      if (it == rest.end()) continue;  // reported where it is used
      gp.insert(*it);
      rest.erase(it);
    }
    return rest;
  }

  const Program& prog_;
  bool collect_;
  std::map<std::string, int> vars_;
  std::vector<Obligation> obligations_;
  std::set<std::string> rules_;
  std::string where_;
};

Context sig_context(const Def& d, const Signature* s) {
  if (!s) throw TypeError("definition " + d.name + " has no signature");
  Context g;
  for (auto& [n, t] : s->params) g[n] = t;
  for (auto& n : d.params)
    if (!g.count(n)) throw TypeError("signature of " + d.name + " is missing channel " + n);
  if (g.size() != d.params.size()) throw TypeError("signature of " + d.name + " names channels the definition does not have");
  for (size_t i = 0; i < d.params.size(); ++i)
    if (s->params[i].first != d.params[i]) throw TypeError("signature of " + d.name + " lists channels in another order");
  return g;
}

struct Solved {
  std::map<std::string, MeasureValue> measures;
  std::vector<TypeIssue> errors;
  std::vector<Obligation> obligations;
  std::set<std::string> rules;
};

Solved solve_program(const Program& prog, uint64_t cap, bool strict_sigs) {
  Checker ck(prog, true);
  MeasureSystem sys;
  Solved out;
  for (auto& d : prog.defs) sys.add_var(d.name);
  int main_var = prog.main ? sys.add_var("main") : -1;
  for (auto& d : prog.defs) {
    ck.set_where(d.name);
    Context g;
    try {
      g = sig_context(d, prog.find_sig(d.name));
    } catch (const TypeError& e) {
      if (strict_sigs) throw;
      out.errors.push_back({d.name, e.what(), d.line, 0});
      continue;
    }
    try {
      sys.set(ck.var_of(d.name), ck.check(*d.body, std::move(g)));
    } catch (const Failure& f) {
      out.errors.push_back(f.issue);
    }
  }
  if (prog.main) {
    ck.set_where("main");
    try {
      sys.set(main_var, ck.check(*prog.main, {}));
    } catch (const Failure& f) {
      out.errors.push_back(f.issue);
    }
  }
  auto vals = sys.solve(cap);
  for (size_t i = 0; i < sys.size(); ++i) out.measures[sys.name(static_cast<int>(i))] = vals[i];
  out.obligations = std::move(ck.obligations());
  out.rules = ck.rules();
  return out;
}

}  // namespace

std::map<std::string, MeasureValue> infer_measures(const Program& prog, uint64_t cap) {
  return solve_program(prog, cap, true).measures;
}

TypeReport typecheck(const Program& prog, const TypecheckOptions& opt) {
  Solved s = solve_program(prog, opt.measure_cap, false);
  TypeReport r;
  r.measures = std::move(s.measures);
  r.errors = std::move(s.errors);
  r.rules_used = std::move(s.rules);
  for (auto& d : prog.defs) {
    auto it = r.measures.find(d.name);
    if (it != r.measures.end() && it->second.inf)
      r.errors.push_back({d.name, "no finite measure for " + d.name, d.line, 0});
  }
  if (prog.main && r.measures.count("main") && r.measures["main"].inf)
    r.errors.push_back({"main", "no finite measure for main", 0, 0});

  std::map<std::string, std::shared_ptr<const Verdict>> cache;
  for (auto& ob : s.obligations) {
    if (ob.kind == RelationKind::Compose && opt.assume_cuts.count(ob.site)) {
      ob.status = ObligationStatus::Assumed;
      ob.detail = "assumed on request";
    } else {
      std::string key = std::string(kind_name(ob.kind)) + "|" + ob.s->key() + "|" + ob.t->key();
      auto it = cache.find(key);
      if (it == cache.end())
        it = cache.emplace(key, std::make_shared<const Verdict>(check(*ob.s, *ob.t, ob.kind, opt.budget))).first;
      ob.verdict = it->second;
      const Verdict& v = *ob.verdict;
      ob.status = v.outcome == Outcome::Yes  ? ObligationStatus::Yes
                  : v.outcome == Outcome::No ? ObligationStatus::No
                                             : ObligationStatus::Unknown;
      ob.detail = (v.reason.empty() ? std::string() : v.reason + ", ") + std::to_string(v.stats.pairs_explored) +
                  " pairs, " + v.stats.phase;
    }
    if (ob.status != ObligationStatus::Yes) {
      std::string what = ob.kind == RelationKind::Compose ? "compose" : "fair subtyping";
      r.unresolved.push_back(ob.where + ": " + ob.site + " (" + what + "): " + obligation_name(ob.status));
    }
    if (ob.status == ObligationStatus::No)
      r.errors.push_back({ob.where, ob.site + ": side condition fails (" + ob.detail + ")", ob.line, ob.col});
  }
  r.obligations = std::move(s.obligations);
  if (!r.errors.empty())
    r.overall = Overall::IllTyped;
  else if (!r.unresolved.empty())
    r.overall = Overall::Conditional;
  return r;
}

std::string report_text(const TypeReport& r) {
  std::ostringstream o;
  o << overall_name(r.overall) << "\n";
  for (auto& [n, m] : r.measures) o << "  measure " << n << " = " << m.str() << "\n";
  for (auto& ob : r.obligations)
    o << "  " << ob.where << ": " << ob.site << " " << kind_name(ob.kind) << "(" << show(*ob.s) << ", " << show(*ob.t)
      << ") " << obligation_name(ob.status) << (ob.detail.empty() ? "" : " [" + ob.detail + "]") << "\n";
  for (auto& e : r.errors) o << "  error in " << e.where << " at " << e.line << ":" << e.col << ": " << e.message << "\n";
  return o.str();
}

std::string report_json(const TypeReport& r) {
  nlohmann::json j;
  j["overall"] = overall_name(r.overall);
  for (auto& [n, m] : r.measures) j["measures"][n] = m.inf ? nlohmann::json("inf") : nlohmann::json(m.n);
  j["obligations"] = nlohmann::json::array();
  for (auto& ob : r.obligations)
    j["obligations"].push_back({{"site", ob.site},
                                {"where", ob.where},
                                {"relation", kind_name(ob.kind)},
                                {"left", show(*ob.s)},
                                {"right", show(*ob.t)},
                                {"status", obligation_name(ob.status)},
                                {"detail", ob.detail}});
  j["errors"] = nlohmann::json::array();
  for (auto& e : r.errors)
    j["errors"].push_back({{"where", e.where}, {"message", e.message}, {"line", e.line}, {"col", e.col}});
  j["unresolved"] = r.unresolved;
  j["rules"] = r.rules_used;
  return j.dump(2);
}

BranchMeasure branch_measure(const Program& prog, std::map<std::string, MeasureValue> defs) {
  auto ck = std::make_shared<Checker>(prog, false);
  std::vector<MeasureValue> env(ck->vars().size(), MeasureValue::infinity());
  for (auto& [n, i] : ck->vars()) {
    auto it = defs.find(n);
    if (it != defs.end()) env[static_cast<size_t>(i)] = it->second;
  }
  return [ck, env](const Proc& p, const std::map<std::string, TypeP>& ctx) {
    try {
      return ck->check(p, ctx).eval(env);
    } catch (const Failure&) {
      return MeasureValue::infinity();
    }
  };
}

}  // namespace skit
