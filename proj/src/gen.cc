#include "skit/gen.hpp"

#include <algorithm>

namespace skit {

namespace {

size_t pick(std::mt19937_64& rng, size_t lo, size_t hi) { return std::uniform_int_distribution<size_t>(lo, hi)(rng); }

std::string tag(size_t i) { return std::string(1, static_cast<char>('a' + i)); }

void fill_branches(std::mt19937_64& rng, Node& n, size_t nodes, const GenOptions& o) {
  n.branches.clear();
  if (std::bernoulli_distribution(o.empty_choice)(rng)) return;
  std::vector<size_t> ts(o.tags);
  for (size_t i = 0; i < ts.size(); ++i) ts[i] = i;
  std::shuffle(ts.begin(), ts.end(), rng);
  size_t k = pick(rng, 1, std::min<size_t>(o.tags, 3));
  for (size_t i = 0; i < k; ++i) n.branches.push_back({tag(ts[i]), 0, static_cast<int>(pick(rng, 0, nodes - 1))});
  std::sort(n.branches.begin(), n.branches.end(), [](const Branch& a, const Branch& b) { return a.tag < b.tag; });
}

}  // namespace

TypeAutomaton random_type(std::mt19937_64& rng, const GenOptions& o) {
  size_t n = pick(rng, 1, std::max<size_t>(1, o.max_nodes));
  TypeAutomaton t;
  t.nodes.resize(n);
  for (auto& node : t.nodes) {
    // ends are rarer than choices so that graphs have some depth
    size_t r = pick(rng, 0, o.higher_order ? 9 : 7);
    if (r == 0)
      node.kind = Kind::One;
    else if (r == 1)
      node.kind = Kind::Bot;
    else if (r <= 4)
      node.kind = Kind::Plus;
    else if (r <= 7)
      node.kind = Kind::With;
    else
      node.kind = r == 8 ? Kind::Times : Kind::Par;
    if (node.kind == Kind::Plus || node.kind == Kind::With) fill_branches(rng, node, n, o);
    if (node.kind == Kind::Times || node.kind == Kind::Par) {
      node.payload = static_cast<int>(pick(rng, 0, n - 1));
      node.cont = static_cast<int>(pick(rng, 0, n - 1));
    }
  }
  return canonicalize(t);
}

TypeAutomaton random_ffst(std::mt19937_64& rng, size_t max_nodes) {
  GenOptions o;
  o.max_nodes = max_nodes;
  for (;;) {
    TypeAutomaton t = random_type(rng, o);
    if (is_fairly_terminating(t)) return t;
  }
}

std::pair<TypeAutomaton, TypeAutomaton> random_ffst_pair(std::mt19937_64& rng, size_t max_nodes) {
  for (;;) {
    TypeAutomaton s = random_ffst(rng, max_nodes);
    TypeAutomaton t = s;
    size_t mode = pick(rng, 0, 4);
    if (mode == 4) return {s, random_ffst(rng, max_nodes)};
    if (mode > 0) {
      size_t at = pick(rng, 0, t.nodes.size() - 1);
      Node& n = t.nodes[at];
      if (n.kind != Kind::Plus && n.kind != Kind::With) continue;
      if (mode == 1 && n.branches.size() > 1) {
        n.branches.erase(n.branches.begin() + static_cast<long>(pick(rng, 0, n.branches.size() - 1)));
      } else if (mode == 2) {
        std::string fresh;
        for (size_t i = 0; i < 3 && fresh.empty(); ++i)
          if (std::none_of(n.branches.begin(), n.branches.end(), [&](const Branch& b) { return b.tag == tag(i); }))
            fresh = tag(i);
        if (fresh.empty()) continue;
        n.branches.push_back({fresh, 0, static_cast<int>(pick(rng, 0, t.nodes.size() - 1))});
        std::sort(n.branches.begin(), n.branches.end(), [](const Branch& a, const Branch& b) { return a.tag < b.tag; });
      } else if (!n.branches.empty()) {
        n.branches[pick(rng, 0, n.branches.size() - 1)].cont = static_cast<int>(pick(rng, 0, t.nodes.size() - 1));
      }
    }
    t = canonicalize(t);
    if (!is_fairly_terminating(t)) continue;
    if (pick(rng, 0, 1)) std::swap(s, t);
    return {s, t};
  }
}

}  // namespace skit
