#include "skit/types.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "lexer.hpp"

namespace skit {

using detail::Cursor;
using detail::lex;
using detail::parse_texpr;

const TypeDecl* TypeGrammarSource::find(const std::string& name) const {
  for (auto& d : decls)
    if (d.name == name) return &d;
  return nullptr;
}

std::string TypeAutomaton::key() const {
  std::string out;
  out.reserve(nodes.size() * 12 + 8);
  char buf[16];
  auto num = [&](long v) {
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, r.ptr);
  };
  num(root);
  for (auto& n : nodes) {
    out += '|';
    out += static_cast<char>('0' + static_cast<int>(n.kind));
    for (auto& b : n.branches) {
      out += b.tag;
      out += '@';
      num(b.measure);
      out += '>';
      num(b.cont);
      out += ',';
    }
    if (n.kind == Kind::Times || n.kind == Kind::Par) {
      num(n.payload);
      out += '.';
      num(n.cont);
    }
  }
  return out;
}

// Follows bare references and duals; a declaration reached again before any
// constructor means the equations are not guarded.
void check_guarded(const TypeGrammarSource& src) {
  for (auto& d : src.decls) {
    std::set<std::string> seen{d.name};
    TExprP e = d.body;
    while (e) {
      if (e->k == TExpr::K::Dual) {
        e = e->cont;
      } else if (e->k == TExpr::K::Ref) {
        if (seen.count(e->name)) throw ParseError("unguarded recursion through '" + e->name + "'", d.line, 1);
        seen.insert(e->name);
        const TypeDecl* next = src.find(e->name);
        e = next ? next->body : nullptr;
      } else {
        break;
      }
    }
  }
}

TypeGrammarSource parse_types(const std::string& text) {
  Cursor c(lex(text));
  TypeGrammarSource src;
  while (!c.at_end()) {
    int line = c.peek().line, col = c.peek().col;
    c.expect_word("type");
    TypeDecl d;
    d.line = line;
    d.name = c.ident("type name");
    if (src.find(d.name)) throw ParseError("duplicate declaration of '" + d.name + "'", line, col);
    c.expect("=");
    d.body = parse_texpr(c);
    c.accept(";");
    src.decls.push_back(std::move(d));
  }
  check_guarded(src);
  return src;
}

namespace {

Kind mirror_kind(Kind k) {
  switch (k) {
    case Kind::One: return Kind::Bot;
    case Kind::Bot: return Kind::One;
    case Kind::Plus: return Kind::With;
    case Kind::With: return Kind::Plus;
    case Kind::Times: return Kind::Par;
    case Kind::Par: return Kind::Times;
  }
  return k;
}

template <class F>
void for_children(const Node& n, F&& f) {
  if (n.kind == Kind::Plus || n.kind == Kind::With) {
    for (auto& b : n.branches) f(b.cont);
  } else if (n.kind == Kind::Times || n.kind == Kind::Par) {
    f(n.payload);
    f(n.cont);
  }
}

std::vector<int> children(const Node& n) {
  std::vector<int> out;
  if (n.kind == Kind::Plus || n.kind == Kind::With) {
    for (auto& b : n.branches) out.push_back(b.cont);
  } else if (n.kind == Kind::Times || n.kind == Kind::Par) {
    out.push_back(n.payload);
    out.push_back(n.cont);
  }
  return out;
}

class Resolver {
 public:
  explicit Resolver(const TypeGrammarSource& src) : src_(src) {}

  TypeAutomaton run(const TExprP& e) {
    int r = build(e, "");
    int root = real(r);
    // Pull out everything reachable, replacing placeholders.
    TypeAutomaton t;
    std::unordered_map<int, int> remap;
    std::function<int(int)> copy = [&](int id) -> int {
      id = real(id);
      auto it = remap.find(id);
      if (it != remap.end()) return it->second;
      int nid = static_cast<int>(t.nodes.size());
      remap[id] = nid;
      t.nodes.push_back(raw_[id].node);
      Node n = raw_[id].node;
      for (auto& b : n.branches) b.cont = copy(b.cont);
      if (n.kind == Kind::Times || n.kind == Kind::Par) {
        n.payload = copy(n.payload);
        n.cont = copy(n.cont);
      }
      t.nodes[nid] = n;
      return nid;
    };
    t.root = copy(root);
    return canonicalize(t);
  }

 private:
  struct Raw {
    bool dual_of = false;
    int of = -1;
    Node node;
  };

  int alloc(Raw r) {
    raw_.push_back(std::move(r));
    return static_cast<int>(raw_.size()) - 1;
  }

  int decl(const std::string& name, const TExpr& where) {
    auto it = memo_.find(name);
    if (it != memo_.end()) {
      if (it->second < 0) throw TypeError("unguarded recursion through '" + name + "'");
      return it->second;
    }
    const TypeDecl* d = src_.find(name);
    if (!d) {
      throw TypeError("unknown type name '" + name + "' at " + std::to_string(where.line) + ":" +
                      std::to_string(where.col));
    }
    memo_[name] = -1;
    int id = build(d->body, name);
    memo_[name] = id;
    return id;
  }

  // `owner` is the declaration whose body this is, so its id is known before
  // the children are built.
  int build(const TExprP& e, const std::string& owner) {
    switch (e->k) {
      case TExpr::K::Ref: return decl(e->name, *e);
      case TExpr::K::Dual: {
        int id = alloc(Raw{true, -1, {}});
        if (!owner.empty()) memo_[owner] = id;
        int of = build(e->cont, "");
        raw_[id].of = of;
        return id;
      }
      default: break;
    }
    Raw r;
    int id = alloc(r);
    if (!owner.empty()) memo_[owner] = id;
    Node n;
    switch (e->k) {
      case TExpr::K::One: n.kind = Kind::One; break;
      case TExpr::K::Bot: n.kind = Kind::Bot; break;
      case TExpr::K::Plus:
      case TExpr::K::With:
        n.kind = e->k == TExpr::K::Plus ? Kind::Plus : Kind::With;
        for (auto& a : e->arms) n.branches.push_back({a.tag, a.measure, build(a.body, "")});
        std::sort(n.branches.begin(), n.branches.end(),
                  [](const Branch& x, const Branch& y) { return x.tag < y.tag; });
        break;
      case TExpr::K::Times:
      case TExpr::K::Par:
        n.kind = e->k == TExpr::K::Times ? Kind::Times : Kind::Par;
        n.payload = build(e->payload, "");
        n.cont = build(e->cont, "");
        break;
      default: break;
    }
    raw_[id].node = n;
    return id;
  }

  int real(int id) {
    if (!raw_[id].dual_of) return id;
    auto it = real_memo_.find(id);
    if (it != real_memo_.end()) {
      if (it->second < 0) throw TypeError("unguarded recursion through dual");
      return it->second;
    }
    real_memo_[id] = -1;
    int r = mirror(raw_[id].of);
    real_memo_[id] = r;
    return r;
  }

  int mirror(int id) {
    if (raw_[id].dual_of) return real(raw_[id].of);
    auto it = mirror_memo_.find(id);
    if (it != mirror_memo_.end()) return it->second;
    int nid = alloc(Raw{});
    mirror_memo_[id] = nid;
    Node n = raw_[id].node;
    n.kind = mirror_kind(n.kind);
    for (auto& b : n.branches) b.cont = mirror(b.cont);
    if (n.kind == Kind::Times || n.kind == Kind::Par) {
      n.payload = mirror(n.payload);
      n.cont = mirror(n.cont);
    }
    raw_[nid].node = n;
    return nid;
  }

  const TypeGrammarSource& src_;
  std::vector<Raw> raw_;
  std::map<std::string, int> memo_;
  std::unordered_map<int, int> real_memo_, mirror_memo_;
};

}  // namespace

TypeAutomaton resolve(const TypeGrammarSource& src, const std::string& name) {
  auto e = std::make_shared<TExpr>();
  e->k = TExpr::K::Ref;
  e->name = name;
  return Resolver(src).run(e);
}

TypeAutomaton resolve_expr(const TypeGrammarSource& src, const TExprP& e) { return Resolver(src).run(e); }

TypeAutomaton parse_type(const std::string& text) {
  auto toks = lex(text);
  if (toks.front().k == detail::Tok::Ident && toks.front().s == "type") {
    auto src = parse_types(text);
    return resolve(src, src.decls.front().name);
  }
  Cursor c(std::move(toks));
  auto e = parse_texpr(c);
  if (!c.at_end()) c.fail("trailing input after type");
  return resolve_expr(TypeGrammarSource{}, e);
}

TypeAutomaton dual(const TypeAutomaton& t) {
  TypeAutomaton d = t;
  for (auto& n : d.nodes) n.kind = mirror_kind(n.kind);
  return d;
}

Polarity polarity(Kind k) {
  return (k == Kind::One || k == Kind::Plus || k == Kind::Times) ? Polarity::Pos : Polarity::Neg;
}

Polarity polarity(const TypeAutomaton& t) { return polarity(t.top().kind); }

std::vector<int> reachable(const TypeAutomaton& t, int from) {
  std::vector<char> seen(t.size(), 0);
  std::vector<int> order, stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for_children(t.at(n), [&](int c) {
      if (!seen[c]) {
        seen[c] = 1;
        stack.push_back(c);
      }
    });
  }
  return order;
}

namespace {

// Hopcroft partition refinement over the live nodes. Edges are labelled by
// branch (tag and measure) or by payload/continuation position; the initial
// split by kind and branch set makes every block agree on its labels.
std::vector<int> bisim_classes(const TypeAutomaton& t, const std::vector<int>& live) {
  size_t n = t.size();
  std::vector<int> block(n, -1);
  std::vector<std::vector<int>> members;
  std::map<std::pair<std::string, unsigned>, int> label_id;  // branch labels start at 2
  std::vector<int> src, lab, dst;
  {
    std::map<std::vector<int>, int> init;
    std::vector<int> sig;
    for (int v : live) {
      const Node& x = t.at(v);
      sig.assign(1, static_cast<int>(x.kind));
      for (auto& b : x.branches) {
        auto [it, _] = label_id.emplace(std::make_pair(b.tag, b.measure), static_cast<int>(label_id.size()) + 2);
        sig.push_back(it->second);
        src.push_back(v), lab.push_back(it->second), dst.push_back(b.cont);
      }
      if (x.kind == Kind::Times || x.kind == Kind::Par) {
        src.push_back(v), lab.push_back(0), dst.push_back(x.payload);
        src.push_back(v), lab.push_back(1), dst.push_back(x.cont);
      }
      auto [it, fresh] = init.emplace(sig, static_cast<int>(members.size()));
      if (fresh) members.emplace_back();
      block[v] = it->second;
      members[it->second].push_back(v);
    }
  }
  size_t nl = label_id.size() + 2;
  // Preimages in CSR form, indexed by target * nl + label.
  std::vector<int> off(n * nl + 1, 0), pre(src.size());
  for (size_t e = 0; e < src.size(); ++e) ++off[dst[e] * nl + lab[e] + 1];
  for (size_t i = 1; i < off.size(); ++i) off[i] += off[i - 1];
  {
    std::vector<int> fill(off.begin(), off.end() - 1);
    for (size_t e = 0; e < src.size(); ++e) pre[fill[dst[e] * nl + lab[e]]++] = src[e];
  }

  std::vector<char> pending;
  std::deque<std::pair<int, int>> work;
  auto push = [&](int b, int l) {
    size_t k = static_cast<size_t>(b) * nl + l;
    if (pending.size() <= k) pending.resize((k + 1) * 2, 0);
    if (!pending[k]) {
      pending[k] = 1;
      work.push_back({b, l});
    }
  };
  auto is_pending = [&](int b, int l) {
    size_t k = static_cast<size_t>(b) * nl + l;
    return k < pending.size() && pending[k];
  };
  for (size_t b = 0; b < members.size(); ++b)
    for (size_t l = 0; l < nl; ++l) push(static_cast<int>(b), static_cast<int>(l));

  std::vector<int> pos(n, -1);
  for (auto& m : members)
    for (size_t i = 0; i < m.size(); ++i) pos[m[i]] = static_cast<int>(i);
  std::vector<char> marked(n, 0);
  std::vector<int> hit, hit_count, touched;
  while (!work.empty()) {
    auto [b, l] = work.front();
    work.pop_front();
    pending[static_cast<size_t>(b) * nl + l] = 0;
    hit.clear();
    for (int v : members[b]) {
      size_t k = static_cast<size_t>(v) * nl + l;
      for (int i = off[k]; i < off[k + 1]; ++i)
        if (!marked[pre[i]]) {
          marked[pre[i]] = 1;
          hit.push_back(pre[i]);
        }
    }
    if (hit.empty()) continue;
    hit_count.resize(members.size(), 0);
    touched.clear();
    for (int p : hit)
      if (hit_count[block[p]]++ == 0) touched.push_back(block[p]);
    // Blocks hit entirely stay; the others lose their hit members to a new block.
    std::vector<std::pair<int, int>> splits;
    for (int c : touched) {
      bool whole = static_cast<size_t>(hit_count[c]) == members[c].size();
      hit_count[c] = whole ? -1 : static_cast<int>(members.size());
      if (!whole) {
        splits.push_back({c, static_cast<int>(members.size())});
        members.emplace_back();
      }
    }
    hit_count.resize(members.size(), 0);
    for (int p : hit) {
      marked[p] = 0;
      int c = block[p];
      int nb = hit_count[c];
      if (nb < 0) continue;
      auto& m = members[c];
      int i = pos[p];
      m[i] = m.back();
      pos[m[i]] = i;
      m.pop_back();
      block[p] = nb;
      pos[p] = static_cast<int>(members[nb].size());
      members[nb].push_back(p);
    }
    for (int c : touched) hit_count[c] = 0;
    for (auto [c, nb] : splits)
      for (size_t k = 0; k < nl; ++k) {
        int lk = static_cast<int>(k);
        if (is_pending(c, lk))
          push(nb, lk);
        else
          push(members[nb].size() < members[c].size() ? nb : c, lk);
      }
  }
  return block;
}

}  // namespace

TypeAutomaton canonicalize(const TypeAutomaton& t) {
  auto live = reachable(t, t.root);
  std::vector<int> cls = bisim_classes(t, live);
  // Breadth-first renumbering from the root; branches are already sorted.
  std::vector<int> repr(t.size(), -1), fresh(t.size(), -1);
  for (int n : live)
    if (repr[cls[n]] < 0) repr[cls[n]] = n;
  TypeAutomaton out;
  fresh[cls[t.root]] = 0;
  std::vector<int> order{cls[t.root]};
  for (size_t head = 0; head < order.size(); ++head)
    for_children(t.at(repr[order[head]]), [&](int ch) {
      int cc = cls[ch];
      if (fresh[cc] < 0) {
        fresh[cc] = static_cast<int>(order.size());
        order.push_back(cc);
      }
    });
  out.nodes.resize(order.size());
  for (size_t i = 0; i < order.size(); ++i) {
    Node n = t.at(repr[order[i]]);
    for (auto& b : n.branches) b.cont = fresh[cls[b.cont]];
    if (n.kind == Kind::Times || n.kind == Kind::Par) {
      n.payload = fresh[cls[n.payload]];
      n.cont = fresh[cls[n.cont]];
    }
    out.nodes[i] = std::move(n);
  }
  out.root = 0;
  return out;
}

bool equiv(const TypeAutomaton& a, const TypeAutomaton& b) { return canonicalize(a) == canonicalize(b); }

bool bisimilar(const TypeAutomaton& a, const TypeAutomaton& b) {
  std::set<std::pair<int, int>> seen;
  std::vector<std::pair<int, int>> work{{a.root, b.root}};
  while (!work.empty()) {
    auto p = work.back();
    work.pop_back();
    if (!seen.insert(p).second) continue;
    const Node& x = a.at(p.first);
    const Node& y = b.at(p.second);
    if (x.kind != y.kind || x.branches.size() != y.branches.size()) return false;
    for (size_t i = 0; i < x.branches.size(); ++i) {
      if (x.branches[i].tag != y.branches[i].tag || x.branches[i].measure != y.branches[i].measure) return false;
      work.push_back({x.branches[i].cont, y.branches[i].cont});
    }
    if (x.kind == Kind::Times || x.kind == Kind::Par) {
      work.push_back({x.payload, y.payload});
      work.push_back({x.cont, y.cont});
    }
  }
  return true;
}

bool is_first_order(const TypeAutomaton& t) {
  for (int n : reachable(t, t.root))
    if (t.at(n).kind == Kind::Times || t.at(n).kind == Kind::Par) return false;
  return true;
}

bool is_zero(const TypeAutomaton& t) { return t.top().kind == Kind::Plus && t.top().branches.empty(); }
bool is_top(const TypeAutomaton& t) { return t.top().kind == Kind::With && t.top().branches.empty(); }

namespace {
// Successors under immediate transitions.
std::vector<int> must_succ(const Node& n, int self) {
  switch (n.kind) {
    case Kind::One:
    case Kind::Bot: return {self};
    case Kind::Plus:
    case Kind::With: {
      std::vector<int> out;
      for (auto& b : n.branches) out.push_back(b.cont);
      return out;
    }
    case Kind::Times:
    case Kind::Par: return {n.cont};
  }
  return {};
}
}  // namespace

bool is_fairly_terminating(const TypeAutomaton& t) {
  // Nodes to analyse: everything reachable, payloads included.
  auto live = reachable(t, t.root);
  size_t n = t.size();
  // Terminal: 1, bot, and the empty choices (vacuously terminating).
  std::vector<char> good(n, 0);
  std::vector<std::vector<int>> pred(n);
  for (int v : live) {
    const Node& x = t.at(v);
    if (x.kind == Kind::One || x.kind == Kind::Bot ||
        ((x.kind == Kind::Plus || x.kind == Kind::With) && x.branches.empty()))
      good[v] = 1;
    for (int s : must_succ(x, v)) pred[s].push_back(v);
  }
  std::vector<int> stack;
  for (int v : live)
    if (good[v]) stack.push_back(v);
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int p : pred[v])
      if (!good[p]) {
        good[p] = 1;
        stack.push_back(p);
      }
  }
  for (int v : live)
    if (!good[v]) return false;
  return true;
}

TypeAutomaton make_one() { return TypeAutomaton{{Node{Kind::One, {}, -1, -1}}, 0}; }
TypeAutomaton make_bot() { return TypeAutomaton{{Node{Kind::Bot, {}, -1, -1}}, 0}; }

namespace {

class Printer {
 public:
  explicit Printer(const TypeAutomaton& t) : t_(t) {
    auto live = reachable(t, t.root);
    std::vector<int> indeg(t.size(), 0);
    for (int v : live)
      for (int c : children(t.at(v))) ++indeg[c];
    named_.assign(t.size(), -1);
    int k = 0;
    // Root first so that it becomes X0.
    if (indeg[t.root] > 0) named_[t.root] = k++;
    for (int v : live)
      if (v != t.root && indeg[v] > 1) named_[v] = k++;
    // A cycle always passes through a node with in-degree > 1 or the root,
    // except for a cycle not containing the root entered once; catch those.
    std::vector<int> state(t.size(), 0);
    std::function<void(int)> dfs = [&](int v) {
      state[v] = 1;
      for (int c : children(t.at(v))) {
        if (named_[c] >= 0) continue;
        if (state[c] == 1) {
          named_[c] = k++;
        } else if (state[c] == 0) {
          dfs(c);
        }
      }
      state[v] = 2;
    };
    dfs(t.root);
    count_ = k;
  }

  std::string run() {
    if (count_ == 0) return expr(t_.root, true);
    std::vector<int> by_name(count_);
    for (size_t v = 0; v < named_.size(); ++v)
      if (named_[v] >= 0) by_name[named_[v]] = static_cast<int>(v);
    std::string out;
    if (named_[t_.root] < 0) out += "type Root = " + expr(t_.root, true) + " ";
    for (int i = 0; i < count_; ++i) {
      out += "type X" + std::to_string(i) + " = " + expr(by_name[i], true);
      if (i + 1 < count_) out += " ";
    }
    return out;
  }

 private:
  std::string expr(int v, bool top) {
    if (!top && named_[v] >= 0) return "X" + std::to_string(named_[v]);
    const Node& n = t_.at(v);
    switch (n.kind) {
      case Kind::One: return "end!";
      case Kind::Bot: return "end?";
      case Kind::Plus:
      case Kind::With: {
        std::string s = n.kind == Kind::Plus ? "+{" : "&{";
        for (size_t i = 0; i < n.branches.size(); ++i) {
          auto& b = n.branches[i];
          if (i) s += ", ";
          s += b.tag;
          if (b.measure) s += "@" + std::to_string(b.measure);
          s += ": " + expr(b.cont, false);
        }
        return s + "}";
      }
      case Kind::Times:
      case Kind::Par:
        return std::string(n.kind == Kind::Times ? "!(" : "?(") + expr(n.payload, false) + ")." +
               expr(n.cont, false);
    }
    return "?";
  }

  const TypeAutomaton& t_;
  std::vector<int> named_;
  int count_ = 0;
};

}  // namespace

std::string show(const TypeAutomaton& t) { return Printer(t).run(); }

}  // namespace skit
