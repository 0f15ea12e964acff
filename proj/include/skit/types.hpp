// Regular session types as finite automata.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace skit {

enum class Kind : std::uint8_t { One, Bot, Plus, With, Times, Par };

struct Branch {
  std::string tag;
  unsigned measure = 0;
  int cont = -1;
  bool operator==(const Branch&) const = default;
};

// Plus/With use `branches` (sorted by tag); Times/Par use payload and cont.
struct Node {
  Kind kind = Kind::One;
  std::vector<Branch> branches;
  int payload = -1;
  int cont = -1;
  bool operator==(const Node&) const = default;
};

class TypeAutomaton {
 public:
  std::vector<Node> nodes;
  int root = 0;

  bool operator==(const TypeAutomaton&) const = default;

  const Node& at(int id) const { return nodes.at(static_cast<size_t>(id)); }
  const Node& top() const { return at(root); }
  size_t size() const { return nodes.size(); }

  // Same automaton, rooted elsewhere (not minimized).
  TypeAutomaton rerooted(int id) const {
    TypeAutomaton t = *this;
    t.root = id;
    return t;
  }

  // Stable textual key of the table; only meaningful on canonical forms.
  std::string key() const;
};

using TypeP = std::shared_ptr<const TypeAutomaton>;

enum class Polarity { Pos, Neg };

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error(msg + " at " + std::to_string(l) + ":" + std::to_string(c)),
        line(l), col(c) {}
};

struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Surface syntax, before resolution.
struct TExpr {
  enum class K { One, Bot, Plus, With, Times, Par, Ref, Dual } k = K::One;
  struct Arm {
    std::string tag;
    unsigned measure = 0;
    std::shared_ptr<TExpr> body;
  };
  std::vector<Arm> arms;
  std::shared_ptr<TExpr> payload, cont;  // Times/Par; Dual uses cont
  std::string name;                      // Ref
  int line = 0, col = 0;
};
using TExprP = std::shared_ptr<TExpr>;

struct TypeDecl {
  std::string name;
  TExprP body;
  int line = 0;
};

struct TypeGrammarSource {
  std::vector<TypeDecl> decls;
  const TypeDecl* find(const std::string& name) const;
};

TypeGrammarSource parse_types(const std::string& text);
// Throws ParseError when some declaration reaches itself through bare references.
void check_guarded(const TypeGrammarSource& src);

// Resolution of a name or of an anonymous expression over the declarations.
TypeAutomaton resolve(const TypeGrammarSource& src, const std::string& name);
TypeAutomaton resolve_expr(const TypeGrammarSource& src, const TExprP& e);

// Parses either an expression or a block of declarations (root = first one).
TypeAutomaton parse_type(const std::string& text);

TypeAutomaton dual(const TypeAutomaton& t);
Polarity polarity(const TypeAutomaton& t);
Polarity polarity(Kind k);
inline bool pos(const TypeAutomaton& t) { return polarity(t) == Polarity::Pos; }
inline bool neg(const TypeAutomaton& t) { return polarity(t) == Polarity::Neg; }

TypeAutomaton canonicalize(const TypeAutomaton& t);
bool equiv(const TypeAutomaton& a, const TypeAutomaton& b);
// Pairwise bisimulation; does not go through canonicalize.
bool bisimilar(const TypeAutomaton& a, const TypeAutomaton& b);

bool is_first_order(const TypeAutomaton& t);
bool is_fairly_terminating(const TypeAutomaton& t);
bool is_zero(const TypeAutomaton& t);
bool is_top(const TypeAutomaton& t);

std::vector<int> reachable(const TypeAutomaton& t, int from);

// Renders in the surface grammar: an expression when the graph is a tree,
// otherwise a block `type X0 = ... type X1 = ...` whose first name is the root.
std::string show(const TypeAutomaton& t);

// Builders, mostly for tests and the encoders.
TypeAutomaton make_one();
TypeAutomaton make_bot();

}  // namespace skit
