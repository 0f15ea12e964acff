#include "skit/relation.hpp"

#include <deque>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace skit {

const char* kind_name(RelationKind k) {
  switch (k) {
    case RelationKind::Compose: return "compose";
    case RelationKind::FairSub: return "fair";
    case RelationKind::SyncSub: return "sync";
    case RelationKind::AsyncSub: return "async";
    case RelationKind::BzFairSub: return "bzfair";
    case RelationKind::AuxSub: return "aux";
  }
  return "?";
}

RelationKind parse_kind(const std::string& s) {
  for (auto k : {RelationKind::Compose, RelationKind::FairSub, RelationKind::SyncSub, RelationKind::AsyncSub,
                 RelationKind::BzFairSub, RelationKind::AuxSub})
    if (s == kind_name(k)) return k;
  throw std::invalid_argument("unknown relation '" + s + "'");
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Yes: return "yes";
    case Outcome::No: return "no";
    case Outcome::Unknown: return "unknown";
  }
  return "?";
}

const char* family_name(Family f) {
  switch (f) {
    case Family::Identity: return "identity";
    case Family::Dual: return "dual";
    case Family::ZeroLeft: return "zero-left";
    case Family::ZeroRight: return "zero-right";
    case Family::TopRight: return "top-right";
  }
  return "?";
}

bool family_allowed(Family f, RelationKind k) {
  bool sub = k != RelationKind::Compose;
  switch (f) {
    case Family::Identity: return sub;
    case Family::Dual: return !sub;
    case Family::ZeroLeft: return k != RelationKind::SyncSub;
    case Family::ZeroRight: return !sub;
    case Family::TopRight: return sub && k != RelationKind::SyncSub;
  }
  return false;
}

bool in_family(Family f, const TypeAutomaton& s, const TypeAutomaton& t) {
  switch (f) {
    case Family::Identity: return s == t;
    case Family::Dual: return s == dual(t);
    case Family::ZeroLeft: return is_zero(s);
    case Family::ZeroRight: return is_zero(t);
    case Family::TopRight: return is_top(t);
  }
  return false;
}

namespace {

const Family kAllFamilies[] = {Family::Identity, Family::Dual, Family::ZeroLeft, Family::ZeroRight,
                               Family::TopRight};

struct Game {
  RelationKind kind;
  bool compose;
  Mode challenge;
  Mode response;
  bool bz;
};

Game game_for(RelationKind k, Mode challenge_override = Mode::Full, bool override_challenge = false) {
  Game g{k, k == RelationKind::Compose, Mode::Full, Mode::Full, false};
  switch (k) {
    case RelationKind::Compose:
    case RelationKind::FairSub: break;
    case RelationKind::SyncSub: g.challenge = Mode::Must; g.response = Mode::Must; break;
    case RelationKind::AsyncSub: g.challenge = Mode::Must; g.response = Mode::Ind; break;
    case RelationKind::AuxSub: g.challenge = Mode::Must; break;
    case RelationKind::BzFairSub: g.challenge = Mode::Must; g.bz = true; break;
  }
  if (override_challenge) g.challenge = challenge_override;
  return g;
}

TypeP share(TypeAutomaton t) { return std::make_shared<const TypeAutomaton>(std::move(t)); }

// Cached transition queries.
class Lts {
 public:
  const std::vector<Derivative>& trans(const TypeP& t, Dir d, Mode m) {
    auto k = std::make_tuple(t->key(), static_cast<int>(d), static_cast<int>(m));
    auto it = trans_.find(k);
    if (it != trans_.end()) return it->second;
    std::vector<Derivative> out;
    if (m == Mode::Must) {
      for (auto& tr : immediate_transitions(*t))
        if (tr.label.dir == d) out.push_back(std::move(tr));
    } else {
      out = transitions(*t, d, m);
    }
    return trans_.emplace(k, std::move(out)).first->second;
  }

  // Asks the LTS directly: 0 and top move on labels they never mention.
  std::optional<TypeAutomaton> step(const TypeP& t, const Label& l, Mode m) {
    for (auto& tr : trans(t, l.dir, m))
      if (tr.label == l) return tr.result;
    if (m == Mode::Must) return std::nullopt;
    auto k = std::make_tuple(t->key(), l.key(), static_cast<int>(m));
    auto it = steps_.find(k);
    if (it == steps_.end()) it = steps_.emplace(k, enabled(*t, l, m)).first;
    return it->second;
  }

  // Channel responses of t in direction d, plus the one carrying `extra` if
  // t can take it without mentioning it.
  std::vector<Derivative> chan_trans(const TypeP& t, Dir d, Mode m, const Label& extra) {
    std::vector<Derivative> out;
    bool seen = false;
    for (auto& tr : trans(t, d, m)) {
      if (tr.label.first_order()) continue;
      seen = seen || tr.label == extra;
      out.push_back(tr);
    }
    if (!seen)
      if (auto r = step(t, extra, m)) out.push_back({extra, std::move(*r)});
    return out;
  }

 private:
  std::map<std::tuple<std::string, int, int>, std::vector<Derivative>> trans_;
  std::map<std::tuple<std::string, std::string, int>, std::optional<TypeAutomaton>> steps_;
};

struct Succ {
  std::string clause;
  Label label;
  std::optional<Label> response;
  std::string branch;
  TypeP s, t;
};

struct Eval {
  bool violated = false;
  std::string clause;
  std::optional<Label> label;
  std::string reason;
  bool undetermined = false;
  std::vector<Succ> succ;
};

// Chooses among responder channel transitions. Returns index, -1 if no
// candidate can work, -2 if undetermined.
using Chooser = std::function<int(const std::vector<std::pair<TypePair, TypePair>>&)>;

class Evaluator {
 public:
  Evaluator(Game g, Lts& lts) : g_(g), lts_(lts) {}

  Eval run(const TypeP& s, const TypeP& t, const Chooser& choose) {
    Eval e;
    if (g_.compose) {
      if (!(pos(*s) || pos(*t))) return fail(e, "polarity", std::nullopt, "neither side is positive");
      if (!tag_clause(e, s, t, false, "left-output")) return e;
      if (!tag_clause(e, t, s, true, "right-output")) return e;
      if (!chan_clause(e, s, t, false, "left-channel-output", choose)) return e;
      if (!chan_clause(e, t, s, true, "right-channel-output", choose)) return e;
    } else {
      if (!(pos(*s) || neg(*t))) return fail(e, "polarity", std::nullopt, "subtype negative and supertype positive");
      if (!sub_tag(e, s, t, Dir::In, "input")) return e;
      if (!sub_tag(e, s, t, Dir::Out, "output")) return e;
      if (g_.bz && !bz_clause(e, s, t)) return e;
      if (!sub_chan(e, s, t, Dir::In, "channel-input", choose)) return e;
      if (!sub_chan(e, s, t, Dir::Out, "channel-output", choose)) return e;
    }
    return e;
  }

 private:
  static Eval& fail(Eval& e, std::string clause, std::optional<Label> l, std::string reason) {
    e.violated = true;
    e.clause = std::move(clause);
    e.label = std::move(l);
    e.reason = std::move(reason);
    return e;
  }

  // Distinguishes a measure mismatch from a missing transition.
  std::string missing_reason(const TypeP& r, const Label& want) {
    if (want.msg != Label::Msg::Tag) return "no matching transition";
    for (auto& tr : lts_.trans(r, want.dir, g_.response))
      if (tr.label.msg == Label::Msg::Tag && tr.label.tag == want.tag) return "measure-mismatch";
    return "no matching transition";
  }

  // Composition, first-order messages: an output of `a` needs an input of `b`.
  bool tag_clause(Eval& e, const TypeP& a, const TypeP& b, bool swapped, const char* name) {
    for (auto& tr : lts_.trans(a, Dir::Out, g_.challenge)) {
      if (!tr.label.first_order()) continue;
      Label want = tr.label.flipped();
      auto r = lts_.step(b, want, g_.response);
      if (!r) {
        fail(e, name, tr.label, missing_reason(b, want));
        return false;
      }
      TypeP x = share(tr.result), y = share(std::move(*r));
      e.succ.push_back({name, tr.label, std::nullopt, "", swapped ? y : x, swapped ? x : y});
    }
    return true;
  }

  bool chan_clause(Eval& e, const TypeP& a, const TypeP& b, bool swapped, const char* name,
                   const Chooser& choose) {
    for (auto& tr : lts_.trans(a, Dir::Out, g_.challenge)) {
      if (tr.label.first_order()) continue;
      std::vector<std::pair<TypePair, TypePair>> cands;
      std::vector<Label> labels;
      for (auto& rt : lts_.chan_trans(b, Dir::In, g_.response, tr.label.flipped())) {
        TypeP ap = tr.label.payload, bp = rt.label.payload;
        TypeP ac = share(tr.result), bc = share(rt.result);
        TypePair p1 = swapped ? TypePair{bp, ap} : TypePair{ap, bp};
        TypePair p2 = swapped ? TypePair{bc, ac} : TypePair{ac, bc};
        cands.push_back({p1, p2});
        labels.push_back(rt.label);
      }
      if (!pick(e, cands, labels, tr.label, name, choose)) return false;
    }
    return true;
  }

  bool sub_tag(Eval& e, const TypeP& s, const TypeP& t, Dir d, const char* name) {
    // Inputs: challenged by the supertype. Outputs: challenged by the subtype.
    const TypeP& chal = d == Dir::In ? t : s;
    const TypeP& resp = d == Dir::In ? s : t;
    for (auto& tr : lts_.trans(chal, d, g_.challenge)) {
      if (!tr.label.first_order()) continue;
      auto r = lts_.step(resp, tr.label, g_.response);
      if (!r) {
        fail(e, name, tr.label, missing_reason(resp, tr.label));
        return false;
      }
      TypeP c = share(tr.result), q = share(std::move(*r));
      e.succ.push_back({name, tr.label, std::nullopt, "", d == Dir::In ? q : c, d == Dir::In ? c : q});
    }
    return true;
  }

  bool sub_chan(Eval& e, const TypeP& s, const TypeP& t, Dir d, const char* name, const Chooser& choose) {
    const TypeP& chal = d == Dir::In ? t : s;
    const TypeP& resp = d == Dir::In ? s : t;
    for (auto& tr : lts_.trans(chal, d, g_.challenge)) {
      if (tr.label.first_order()) continue;
      std::vector<std::pair<TypePair, TypePair>> cands;
      std::vector<Label> labels;
      for (auto& rt : lts_.chan_trans(resp, d, g_.response, tr.label)) {
        TypeP cp = tr.label.payload, rp = rt.label.payload;
        TypeP cc = share(tr.result), rc = share(rt.result);
        TypePair p1 = d == Dir::In ? TypePair{rp, cp} : TypePair{cp, rp};
        TypePair p2 = d == Dir::In ? TypePair{rc, cc} : TypePair{cc, rc};
        cands.push_back({p1, p2});
        labels.push_back(rt.label);
      }
      if (!pick(e, cands, labels, tr.label, name, choose)) return false;
    }
    return true;
  }

  bool pick(Eval& e, const std::vector<std::pair<TypePair, TypePair>>& cands, const std::vector<Label>& labels,
            const Label& challenge, const char* name, const Chooser& choose) {
    if (cands.empty()) {
      fail(e, name, challenge, "no channel transition");
      return false;
    }
    int i = cands.size() == 1 ? 0 : choose(cands);
    if (i == -1) {
      fail(e, name, challenge, "no channel transition with related payload");
      return false;
    }
    if (i == -2) {
      e.undetermined = true;
      return true;
    }
    e.succ.push_back({name, challenge, labels[i], "payload", cands[i].first.s, cands[i].first.t});
    e.succ.push_back({name, challenge, labels[i], "cont", cands[i].second.s, cands[i].second.t});
    return true;
  }

  // Every output reachable in the supertype after immediate inputs must be an
  // immediate output of the subtype right now.
  bool bz_clause(Eval& e, const TypeP& s, const TypeP& t) {
    auto& souts = lts_.trans(s, Dir::Out, Mode::Must);
    if (souts.empty()) return true;
    std::set<std::string> have;
    for (auto& tr : souts) have.insert(tr.label.key());
    const TypeAutomaton& ta = *t;
    std::vector<char> seen(ta.size(), 0);
    std::vector<int> stack{ta.root};
    seen[ta.root] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (auto& tr : immediate_transitions(ta.rerooted(v))) {
        if (tr.label.dir == Dir::Out) {
          if (!have.count(tr.label.key())) {
            fail(e, "bz-output", tr.label, "supertype may output after inputs what the subtype does not output now");
            return false;
          }
        }
      }
      const Node& n = ta.at(v);
      std::vector<int> next;
      if (n.kind == Kind::With)
        for (auto& b : n.branches) next.push_back(b.cont);
      if (n.kind == Kind::Par) next.push_back(n.cont);
      for (int x : next)
        if (!seen[x]) {
          seen[x] = 1;
          stack.push_back(x);
        }
    }
    return true;
  }

  Game g_;
  Lts& lts_;
};

struct PairRec {
  TypePair p;
  int parent = -1;
  std::string clause;
  std::optional<Label> label, response;
  std::string branch;
  bool family_leaf = false;
};

class Solver {
 public:
  Solver(Game g, const Budget& b, bool families) : g_(g), b_(b), families_(families), ev_(g, lts_) {}

  Verdict solve(const TypeP& s, const TypeP& t) {
    Verdict v;
    v.kind = g_.kind;
    v.challenge = g_.challenge;
    v.root = {s, t};
    v.stats.budget = b_;
    add({s, t}, -1, nullptr);
    bool undetermined = false, exhausted = false;
    for (size_t head = 0; head < recs_.size(); ++head) {
      if (recs_.size() > b_.max_pairs) {
        v.reason = "pair budget exhausted";
        exhausted = true;
        break;
      }
      int id = static_cast<int>(head);
      PairRec cur = recs_[id];
      size_t sz = std::max(cur.p.s->size(), cur.p.t->size());
      v.stats.max_automaton_size = std::max(v.stats.max_automaton_size, sz);
      if (sz > b_.max_nodes_per_type) {
        v.reason = "automaton size budget exhausted";
        exhausted = true;
        break;
      }
      Eval e = ev_.run(cur.p.s, cur.p.t, [&](const auto& c) { return choose(c); });
      if (e.violated) {
        v.outcome = Outcome::No;
        v.reason = e.clause + ": " + e.reason;
        v.stats.violations = 1;
        v.counterexample = trace(id, e);
        v.stats.pairs_explored = recs_.size();
        return v;
      }
      undetermined = undetermined || e.undetermined;
      for (auto& sc : e.succ) {
        TypePair p{sc.s, sc.t};
        if (index_.count(pkey(p))) continue;
        std::optional<Family> fam = family_of(p);
        if (fam) used_.insert(*fam);
        if (cur.family_leaf && fam) continue;  // closed by the family lemma
        add(p, id, &sc, fam.has_value());
      }
    }
    v.stats.pairs_explored = recs_.size();
    if (exhausted) {
      v.outcome = Outcome::Unknown;
    } else if (undetermined) {
      v.outcome = Outcome::Unknown;
      v.reason = "undetermined channel response";
    } else {
      v.outcome = Outcome::Yes;
      Witness w;
      for (auto& r : recs_) w.pairs.push_back(r.p);
      w.families.assign(used_.begin(), used_.end());
      bool must_basis = g_.challenge == Mode::Must &&
                        (g_.kind == RelationKind::Compose || g_.kind == RelationKind::FairSub);
      w.basis = must_basis ? "must-challenge" : "full";
      v.witness = std::move(w);
    }
    return v;
  }

 private:
  static std::string pkey(const TypePair& p) { return p.s->key() + "#" + p.t->key(); }

  std::optional<Family> family_of(const TypePair& p) const {
    if (!families_) return std::nullopt;
    for (Family f : kAllFamilies)
      if (family_allowed(f, g_.kind) && in_family(f, *p.s, *p.t)) return f;
    return std::nullopt;
  }

  void add(const TypePair& p, int parent, const Succ* sc, bool leaf = false) {
    PairRec r;
    r.p = p;
    r.parent = parent;
    if (sc) {
      r.clause = sc->clause;
      r.label = sc->label;
      r.response = sc->response;
      r.branch = sc->branch;
    }
    r.family_leaf = leaf;
    index_[pkey(p)] = static_cast<int>(recs_.size());
    recs_.push_back(std::move(r));
  }

  // Channel responses: prefer a candidate whose pairs are already known;
  // otherwise settle each candidate with a nested game.
  int choose(const std::vector<std::pair<TypePair, TypePair>>& cands) {
    auto known = [&](const TypePair& p) { return index_.count(pkey(p)) || family_of(p).has_value(); };
    for (size_t i = 0; i < cands.size(); ++i)
      if (known(cands[i].first) && known(cands[i].second)) {
        // the witness has to name the families the choice leaned on
        for (auto* p : {&cands[i].first, &cands[i].second})
          if (!index_.count(pkey(*p))) used_.insert(*family_of(*p));
        return static_cast<int>(i);
      }
    bool unknown = false;
    Budget nb{std::min<size_t>(b_.max_pairs / 4 + 1, 500), b_.max_nodes_per_type};
    for (size_t i = 0; i < cands.size(); ++i) {
      Solver a(g_, nb, families_), c(g_, nb, families_);
      Verdict va = a.solve(cands[i].first.s, cands[i].first.t);
      if (va.outcome == Outcome::No) continue;
      Verdict vc = c.solve(cands[i].second.s, cands[i].second.t);
      if (vc.outcome == Outcome::No) continue;
      if (va.outcome == Outcome::Yes && vc.outcome == Outcome::Yes) {
        // Import both closed sets; they need no further expansion.
        for (auto* w : {&*va.witness, &*vc.witness}) {
          for (auto& p : w->pairs)
            if (!index_.count(pkey(p))) {
              imported_.push_back(p);
              index_[pkey(p)] = -1;
            }
          used_.insert(w->families.begin(), w->families.end());
        }
        return static_cast<int>(i);
      }
      unknown = true;
    }
    return unknown ? -2 : -1;
  }

  std::vector<CxStep> trace(int id, const Eval& e) {
    std::vector<int> chain;
    for (int x = id; x >= 0; x = recs_[x].parent) chain.push_back(x);
    std::vector<CxStep> out;
    for (size_t i = chain.size(); i-- > 0;) {
      const PairRec& r = recs_[chain[i]];
      CxStep st;
      st.pair = r.p;
      if (i > 0) {
        const PairRec& nx = recs_[chain[i - 1]];
        st.clause = nx.clause;
        st.label = nx.label;
        st.response = nx.response;
        st.branch = nx.branch;
      } else {
        st.clause = e.clause;
        st.label = e.label;
      }
      out.push_back(std::move(st));
    }
    return out;
  }

 public:
  std::vector<TypePair> imported_;

 private:
  Game g_;
  Budget b_;
  bool families_;
  Lts lts_;
  Evaluator ev_;
  std::vector<PairRec> recs_;
  std::unordered_map<std::string, int> index_;
  std::set<Family> used_;
};

Verdict run_game(Game g, const TypeP& s, const TypeP& t, const Budget& b, bool families) {
  Solver sv(g, b, families);
  Verdict v = sv.solve(s, t);
  if (v.outcome == Outcome::Yes)
    for (auto& p : sv.imported_) v.witness->pairs.push_back(p);
  return v;
}

}  // namespace

Verdict check(const TypeAutomaton& s0, const TypeAutomaton& t0, RelationKind kind, const Budget& b,
              const CheckOptions& opt) {
  if (b.max_pairs == 0 || b.max_nodes_per_type == 0) throw std::invalid_argument("budget fields must be positive");
  TypeP s = share(canonicalize(s0)), t = share(canonicalize(t0));
  bool fo = is_first_order(*s) && is_first_order(*t);
  bool ffst = fo && is_fairly_terminating(*s) && is_fairly_terminating(*t);
  std::vector<std::string> notes;
  if (kind != RelationKind::Compose && kind != RelationKind::FairSub) {
    if (!fo) throw std::invalid_argument(std::string(kind_name(kind)) + " subtyping is defined on first-order types");
    if (!ffst) notes.push_back("inputs are not both fairly terminating");
    Verdict v = run_game(game_for(kind), s, t, b, opt.families);
    v.stats.phase = "direct";
    v.notes = notes;
    return v;
  }
  Stats acc;
  if (fo && opt.ffst_shortcut) {
    Verdict m = run_game(game_for(kind, Mode::Must, true), s, t, b, opt.families);
    m.stats.phase = "must-challenge";
    if (m.outcome == Outcome::No) {
      m.notes.push_back("violation reached with immediate challenges, which are also full challenges");
      return m;
    }
    if (ffst) {
      if (m.outcome == Outcome::Yes)
        m.notes.push_back("first-order fairly terminating inputs: immediate challenges suffice");
      else
        m.notes.push_back("first-order fairly terminating inputs: the full game explores a superset, not run");
      return m;
    }
    acc = m.stats;
    notes.push_back("immediate-challenge game was " + std::string(outcome_name(m.outcome)) +
                    " but inputs are not fairly terminating; running the full game");
  }
  Verdict v = run_game(game_for(kind), s, t, b, opt.families);
  v.stats.phase = acc.phase.empty() ? "direct" : "must-challenge+direct";
  v.stats.pairs_explored += acc.pairs_explored;
  v.stats.max_automaton_size = std::max(v.stats.max_automaton_size, acc.max_automaton_size);
  v.notes.insert(v.notes.begin(), notes.begin(), notes.end());
  return v;
}

bool validate_witness(const Witness& w, RelationKind kind) {
  for (Family f : w.families)
    if (!family_allowed(f, kind)) return false;
  Mode challenge = game_for(kind).challenge;
  if (w.basis == "must-challenge") {
    if (kind != RelationKind::Compose && kind != RelationKind::FairSub) return false;
    for (auto& p : w.pairs)
      if (!is_first_order(*p.s) || !is_first_order(*p.t) || !is_fairly_terminating(*p.s) ||
          !is_fairly_terminating(*p.t))
        return false;
    challenge = Mode::Must;
  } else if (w.basis != "full") {
    return false;
  }
  Game g = game_for(kind, challenge, true);
  std::set<std::string> members;
  for (auto& p : w.pairs) members.insert(p.s->key() + "#" + p.t->key());
  auto member = [&](const TypePair& p) {
    if (members.count(p.s->key() + "#" + p.t->key())) return true;
    for (Family f : w.families)
      if (in_family(f, *p.s, *p.t)) return true;
    return false;
  };
  Lts lts;
  Evaluator ev(g, lts);
  Chooser choose = [&](const std::vector<std::pair<TypePair, TypePair>>& c) {
    for (size_t i = 0; i < c.size(); ++i)
      if (member(c[i].first) && member(c[i].second)) return static_cast<int>(i);
    return -1;
  };
  for (auto& p : w.pairs) {
    Eval e = ev.run(p.s, p.t, choose);
    if (e.violated || e.undetermined) return false;
    for (auto& sc : e.succ)
      if (!member({sc.s, sc.t})) return false;
  }
  return true;
}

bool replay_counterexample(const Verdict& v) {
  if (v.outcome != Outcome::No || v.counterexample.empty()) return false;
  Game g = game_for(v.kind, v.challenge, true);
  Lts lts;
  Evaluator ev(g, lts);
  TypeP s = v.root.s, t = v.root.t;
  for (size_t i = 0; i < v.counterexample.size(); ++i) {
    const CxStep& st = v.counterexample[i];
    if (!(*st.pair.s == *s) || !(*st.pair.t == *t)) return false;
    Chooser choose = [](const std::vector<std::pair<TypePair, TypePair>>&) { return -2; };
    bool last = i + 1 == v.counterexample.size();
    if (last) {
      Eval e = ev.run(s, t, [](const auto&) { return -1; });
      return e.violated && e.clause == st.clause &&
             (!st.label || (e.label && *e.label == *st.label));
    }
    // Re-derive the successor from the recorded labels.
    Eval e = ev.run(s, t, choose);
    bool found = false;
    if (st.response) {
      // Channel step: rebuild from the two transitions directly.
      const Label& cl = *st.label;
      const Label& rl = *st.response;
      bool compose = g.compose;
      TypeP chal, resp;
      bool left_challenges;
      if (compose) {
        left_challenges = st.clause == "left-channel-output";
        chal = left_challenges ? s : t;
        resp = left_challenges ? t : s;
      } else {
        left_challenges = st.clause == "channel-output";
        chal = left_challenges ? s : t;
        resp = left_challenges ? t : s;
      }
      auto c2 = lts.step(chal, cl, g.challenge);
      auto r2 = lts.step(resp, rl, g.response);
      if (!c2 || !r2) return false;
      TypeP cp = cl.payload, rp = rl.payload;
      TypeP cc = share(std::move(*c2)), rc = share(std::move(*r2));
      if (st.branch == "payload") {
        s = left_challenges ? cp : rp;
        t = left_challenges ? rp : cp;
      } else {
        s = left_challenges ? cc : rc;
        t = left_challenges ? rc : cc;
      }
      found = true;
    } else {
      for (auto& sc : e.succ)
        if (sc.clause == st.clause && st.label && sc.label == *st.label && !sc.response) {
          s = sc.s;
          t = sc.t;
          found = true;
          break;
        }
    }
    if (!found) return false;
  }
  return false;
}

CrossReport cross_check_correct_subt(const TypeAutomaton& s, const TypeAutomaton& t, const Budget& b) {
  CrossReport r;
  r.compose = check(s, t, RelationKind::Compose, b);
  r.fairsub = check(s, dual(t), RelationKind::FairSub, b);
  auto definite = [](Outcome o) { return o != Outcome::Unknown; };
  r.consistent = !(definite(r.compose.outcome) && definite(r.fairsub.outcome) &&
                   r.compose.outcome != r.fairsub.outcome);
  return r;
}

Witness dual_witness(const Witness& w, RelationKind kind) {
  if (kind == RelationKind::Compose) throw std::invalid_argument("dual_witness is for subtyping relations");
  Witness d;
  d.basis = w.basis;
  for (auto& p : w.pairs)
    d.pairs.push_back({share(canonicalize(dual(*p.t))), share(canonicalize(dual(*p.s)))});
  for (Family f : w.families) {
    // (0, X) dualizes to (dual X, top) and vice versa.
    if (f == Family::ZeroLeft)
      d.families.push_back(Family::TopRight);
    else if (f == Family::TopRight)
      d.families.push_back(Family::ZeroLeft);
    else
      d.families.push_back(f);
  }
  return d;
}

DualClosureReport dual_closure_check(const TypeAutomaton& s, const TypeAutomaton& t, const Budget& b) {
  DualClosureReport r;
  r.forward = check(s, t, RelationKind::FairSub, b);
  r.applicable = r.forward.outcome == Outcome::Yes;
  r.backward = check(dual(t), dual(s), RelationKind::FairSub, b);
  if (r.applicable) {
    r.holds = r.backward.outcome == Outcome::Yes;
    r.dual_witness_valid = validate_witness(dual_witness(*r.forward.witness, RelationKind::FairSub),
                                            RelationKind::FairSub);
  }
  return r;
}

}  // namespace skit
