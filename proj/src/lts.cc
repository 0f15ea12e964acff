#include "skit/lts.hpp"

#include <map>
#include <set>
#include <stdexcept>

#include "lexer.hpp"

namespace skit {

Label Label::chan(Dir d, const TypeAutomaton& p) {
  return Label{d, Msg::Chan, {}, 0, std::make_shared<const TypeAutomaton>(canonicalize(p))};
}

Label Label::flipped() const {
  Label l = *this;
  l.dir = dir == Dir::In ? Dir::Out : Dir::In;
  return l;
}

bool Label::operator==(const Label& o) const {
  if (dir != o.dir || msg != o.msg) return false;
  switch (msg) {
    case Msg::Star: return true;
    case Msg::Tag: return tag == o.tag && measure == o.measure;
    case Msg::Chan: return *payload == *o.payload;
  }
  return false;
}

std::string Label::key() const {
  std::string k = dir == Dir::In ? "?" : "!";
  switch (msg) {
    case Msg::Star: return k + "*";
    case Msg::Tag: return k + tag + "@" + std::to_string(measure);
    case Msg::Chan: return k + "(" + payload->key() + ")";
  }
  return k;
}

std::string Label::str() const {
  std::string k = dir == Dir::In ? "?" : "!";
  switch (msg) {
    case Msg::Star: return k + "*";
    case Msg::Tag: return k + tag + (measure ? "@" + std::to_string(measure) : "");
    case Msg::Chan: return k + "(" + show(*payload) + ")";
  }
  return k;
}

Label parse_label(const std::string& text) {
  size_t i = text.find_first_not_of(" \t");
  if (i == std::string::npos || (text[i] != '?' && text[i] != '!'))
    throw ParseError("label must start with '?' or '!'", 1, 1);
  Dir d = text[i] == '?' ? Dir::In : Dir::Out;
  std::string rest = text.substr(i + 1);
  size_t j = rest.find_first_not_of(" \t");
  if (j == std::string::npos) throw ParseError("empty label", 1, static_cast<int>(i + 2));
  rest = rest.substr(j);
  if (rest == "*") return Label::star(d);
  if (rest.front() == '(') {
    size_t close = rest.rfind(')');
    if (close == std::string::npos || close == 0) throw ParseError("unbalanced '(' in label", 1, 1);
    return Label::chan(d, parse_type(rest.substr(1, close - 1)));
  }
  detail::Cursor c(detail::lex(rest));
  std::string tag = c.ident("tag");
  unsigned m = 0;
  if (c.accept("@")) m = c.number();
  if (!c.at_end()) c.fail("trailing input in label");
  return Label::tagged(d, tag, m);
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Must: return "must";
    case Mode::Ind: return "ind";
    case Mode::Full: return "full";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "must") return Mode::Must;
  if (s == "ind") return Mode::Ind;
  if (s == "full") return Mode::Full;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

namespace {

// Per-(automaton, label) analysis: which nodes fire an axiom, and where to.
class Analysis {
 public:
  Analysis(const TypeAutomaton& t, const Label& l) : t_(t), l_(l), n_(t.size()) {
    must_.assign(n_, 0);
    target_.assign(n_, -1);
    may_.assign(n_, 0);
    preds_.resize(n_);
    for (size_t v = 0; v < n_; ++v) {
      classify(static_cast<int>(v));
      const Node& n = t.at(static_cast<int>(v));
      if (n.kind == Kind::Plus || n.kind == Kind::With)
        for (auto& b : n.branches) preds_[b.cont].push_back(static_cast<int>(v));
      else if (n.kind == Kind::Times || n.kind == Kind::Par)
        preds_[n.cont].push_back(static_cast<int>(v));
    }
  }

  // Enabled set for the requested mode.
  std::vector<char> enabled_set(Mode mode) const {
    if (mode == Mode::Must) return must_;
    if (mode == Mode::Ind) return lfp(false);
    std::vector<char> f = lfp(true);
    // Greatest fixed point of the rules, restricted to the corule-grounded set.
    std::vector<int> work;
    auto fails = [&](int v) { return f[v] && !must_[v] && (!may_[v] || !all_children(v, f)); };
    for (size_t v = 0; v < n_; ++v)
      if (fails(static_cast<int>(v))) work.push_back(static_cast<int>(v));
    while (!work.empty()) {
      int v = work.back();
      work.pop_back();
      if (!fails(v)) continue;
      f[v] = 0;
      for (int p : preds_[v])
        if (fails(p)) work.push_back(p);
    }
    return f;
  }

  TypeAutomaton derive(const std::vector<char>& en) const {
    TypeAutomaton out = t_;
    std::vector<int> memo(n_, -1);
    auto step = [&](auto&& self, int v) -> int {
      if (!en[v]) throw std::logic_error("derivative of a disabled node");
      if (must_[v]) return target_[v];
      if (memo[v] >= 0) return memo[v];
      int id = static_cast<int>(out.nodes.size());
      memo[v] = id;
      out.nodes.push_back(t_.at(v));
      Node n = t_.at(v);
      if (n.kind == Kind::Plus || n.kind == Kind::With) {
        for (auto& b : n.branches) b.cont = self(self, b.cont);
      } else {
        n.cont = self(self, n.cont);
      }
      out.nodes[id] = std::move(n);
      return id;
    };
    out.root = step(step, t_.root);
    return canonicalize(out);
  }

  const std::vector<char>& must() const { return must_; }

 private:
  void classify(int v) {
    const Node& n = t_.at(v);
    bool in = l_.dir == Dir::In;
    switch (n.kind) {
      case Kind::One:
        if (!in && l_.msg == Label::Msg::Star) fire(v, v);
        break;
      case Kind::Bot:
        if (in && l_.msg == Label::Msg::Star) fire(v, v);
        break;
      case Kind::Plus:
      case Kind::With: {
        bool axiom_side = (n.kind == Kind::Plus) != in;  // + outputs, & inputs
        if (axiom_side) {
          if (l_.msg == Label::Msg::Tag)
            for (auto& b : n.branches)
              if (b.tag == l_.tag && b.measure == l_.measure) fire(v, b.cont);
        } else {
          may_[v] = 1;
        }
        break;
      }
      case Kind::Times:
      case Kind::Par: {
        bool axiom_side = (n.kind == Kind::Times) != in;
        if (axiom_side) {
          if (l_.msg == Label::Msg::Chan && payload_matches(n.payload)) fire(v, n.cont);
        } else {
          may_[v] = 1;
        }
        break;
      }
    }
  }

  void fire(int v, int target) {
    must_[v] = 1;
    target_[v] = target;
  }

  bool payload_matches(int p) {
    auto it = payload_cache_.find(p);
    if (it != payload_cache_.end()) return it->second;
    bool ok = canonicalize(t_.rerooted(p)) == *l_.payload;
    payload_cache_[p] = ok;
    return ok;
  }

  bool all_children(int v, const std::vector<char>& s) const {
    const Node& n = t_.at(v);
    if (n.kind == Kind::Plus || n.kind == Kind::With) {
      for (auto& b : n.branches)
        if (!s[b.cont]) return false;
      return true;
    }
    return s[n.cont];
  }

  bool some_child(int v, const std::vector<char>& s) const {
    const Node& n = t_.at(v);
    if (n.kind == Kind::Plus || n.kind == Kind::With) {
      for (auto& b : n.branches)
        if (s[b.cont]) return true;
      return false;
    }
    return s[n.cont];
  }

  // Least fixed point of axioms + may rules (+ corules when asked).
  std::vector<char> lfp(bool with_corules) const {
    std::vector<char> s = must_;
    auto fires = [&](int v) {
      return !s[v] && may_[v] && (all_children(v, s) || (with_corules && some_child(v, s)));
    };
    std::vector<int> work;
    for (size_t v = 0; v < n_; ++v)
      if (s[v]) work.push_back(static_cast<int>(v));
    for (size_t v = 0; v < n_; ++v)
      if (fires(static_cast<int>(v))) {
        s[v] = 1;
        work.push_back(static_cast<int>(v));
      }
    while (!work.empty()) {
      int v = work.back();
      work.pop_back();
      for (int p : preds_[v])
        if (fires(p)) {
          s[p] = 1;
          work.push_back(p);
        }
    }
    return s;
  }

  const TypeAutomaton& t_;
  const Label& l_;
  size_t n_;
  std::vector<char> must_, may_;
  std::vector<int> target_;
  std::vector<std::vector<int>> preds_;
  std::map<int, bool> payload_cache_;
};

}  // namespace

std::optional<TypeAutomaton> enabled(const TypeAutomaton& t, const Label& l, Mode mode) {
  Analysis a(t, l);
  auto en = a.enabled_set(mode);
  if (!en[t.root]) return std::nullopt;
  return a.derive(en);
}

std::vector<Derivative> immediate_transitions(const TypeAutomaton& t) {
  std::vector<Derivative> out;
  const Node& n = t.top();
  auto at = [&](int v) { return canonicalize(t.rerooted(v)); };
  switch (n.kind) {
    case Kind::One: out.push_back({Label::star(Dir::Out), at(t.root)}); break;
    case Kind::Bot: out.push_back({Label::star(Dir::In), at(t.root)}); break;
    case Kind::Plus:
    case Kind::With: {
      Dir d = n.kind == Kind::Plus ? Dir::Out : Dir::In;
      for (auto& b : n.branches) out.push_back({Label::tagged(d, b.tag, b.measure), at(b.cont)});
      break;
    }
    case Kind::Times:
    case Kind::Par: {
      Dir d = n.kind == Kind::Times ? Dir::Out : Dir::In;
      out.push_back({Label::chan(d, t.rerooted(n.payload)), at(n.cont)});
      break;
    }
  }
  return out;
}

std::vector<Label> candidate_labels(const TypeAutomaton& t, Dir d) {
  std::vector<Label> out{Label::star(d)};
  std::set<std::pair<std::string, unsigned>> tags;
  std::set<std::string> payloads;
  for (int v : reachable(t, t.root)) {
    const Node& n = t.at(v);
    for (auto& b : n.branches)
      if (tags.insert({b.tag, b.measure}).second) out.push_back(Label::tagged(d, b.tag, b.measure));
    if (n.kind == Kind::Times || n.kind == Kind::Par) {
      Label l = Label::chan(d, t.rerooted(n.payload));
      if (payloads.insert(l.payload->key()).second) out.push_back(std::move(l));
    }
  }
  return out;
}

std::vector<Derivative> transitions(const TypeAutomaton& t, Dir d, Mode mode) {
  std::vector<Derivative> out;
  for (auto& l : candidate_labels(t, d)) {
    auto r = enabled(t, l, mode);
    if (r) out.push_back({l, std::move(*r)});
  }
  return out;
}

std::vector<Label> enumerate_labels(const TypeAutomaton& t, Dir d, Mode mode) {
  std::vector<Label> out;
  for (auto& tr : transitions(t, d, mode)) out.push_back(tr.label);
  return out;
}

bool fas_oracle(const TypeAutomaton& t, const Label& l) {
  // Runs of immediate transitions in the direction opposite to l.
  bool input = l.dir == Dir::In;
  size_t n = t.size();
  std::vector<std::vector<int>> succ(n);
  for (size_t v = 0; v < n; ++v) {
    const Node& x = t.at(static_cast<int>(v));
    int iv = static_cast<int>(v);
    switch (x.kind) {
      case Kind::One:
        if (input) succ[v] = {iv};
        break;
      case Kind::Bot:
        if (!input) succ[v] = {iv};
        break;
      case Kind::Plus:
      case Kind::With:
        if ((x.kind == Kind::Plus) == input)
          for (auto& b : x.branches) succ[v].push_back(b.cont);
        break;
      case Kind::Times:
      case Kind::Par:
        if ((x.kind == Kind::Times) == input) succ[v] = {x.cont};
        break;
    }
  }
  std::vector<char> reach(n, 0);
  std::vector<int> stack{t.root};
  reach[t.root] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int s : succ[v])
      if (!reach[s]) {
        reach[s] = 1;
        stack.push_back(s);
      }
  }
  // Nodes from which an infinite fair run exists.
  std::vector<char> d(n, 0);
  for (size_t v = 0; v < n; ++v) d[v] = !succ[v].empty();
  for (bool changed = true; changed;) {
    changed = false;
    for (size_t v = 0; v < n; ++v) {
      if (!d[v]) continue;
      for (int s : succ[v])
        if (!d[s]) {
          d[v] = 0;
          changed = true;
          break;
        }
    }
  }
  for (size_t v = 0; v < n; ++v)
    if (reach[v] && d[v]) return false;
  // Every end point must take l by an axiom; 0 and top count as axioms.
  Label probe = l;
  for (size_t v = 0; v < n; ++v) {
    if (!reach[v] || !succ[v].empty()) continue;
    const Node& x = t.at(static_cast<int>(v));
    bool ok = false;
    switch (x.kind) {
      case Kind::One: ok = !input && l.msg == Label::Msg::Star; break;
      case Kind::Bot: ok = input && l.msg == Label::Msg::Star; break;
      case Kind::Plus:
      case Kind::With:
        if (x.branches.empty() && (x.kind == Kind::Plus) == input) ok = true;
        if ((x.kind == Kind::With) == input && l.msg == Label::Msg::Tag)
          for (auto& b : x.branches) ok = ok || (b.tag == l.tag && b.measure == l.measure);
        break;
      case Kind::Times:
      case Kind::Par:
        if ((x.kind == Kind::Par) == input && l.msg == Label::Msg::Chan)
          ok = canonicalize(t.rerooted(x.payload)) == *probe.payload;
        break;
    }
    if (!ok) return false;
  }
  return true;
}

std::optional<TypeAutomaton> derivative_seq(const TypeAutomaton& t, const std::vector<Label>& ls, Mode mode) {
  TypeAutomaton cur = t;
  for (auto& l : ls) {
    auto next = enabled(cur, l, mode);
    if (!next) return std::nullopt;
    cur = std::move(*next);
  }
  return cur;
}

}  // namespace skit
