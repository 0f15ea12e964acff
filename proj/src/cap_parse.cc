#include <algorithm>
#include <map>
#include <set>

#include "lexer.hpp"
#include "skit/cap.hpp"

namespace skit {

using detail::Cursor;
using detail::Tok;

const char* kind_name(Proc::K k) {
  switch (k) {
    case Proc::K::Done: return "done";
    case Proc::K::Link: return "link";
    case Proc::K::Close: return "close";
    case Proc::K::Wait: return "wait";
    case Proc::K::Select: return "select";
    case Proc::K::Case: return "case";
    case Proc::K::Fork: return "fork";
    case Proc::K::Join: return "join";
    case Proc::K::Choice: return "choice";
    case Proc::K::Cut: return "cut";
    case Proc::K::Call: return "call";
  }
  return "?";
}

const Def* Program::find_def(const std::string& name) const {
  for (auto& d : defs)
    if (d.name == name) return &d;
  return nullptr;
}

const Signature* Program::find_sig(const std::string& name) const {
  for (auto& s : sigs)
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

void collect_cuts(const ProcP& p, std::vector<std::string>& out) {
  if (!p) return;
  if (p->k == Proc::K::Cut) out.push_back(p->cut_id);
  for (auto& [_, a] : p->arms) collect_cuts(a, out);
  collect_cuts(p->p, out);
  collect_cuts(p->q, out);
}

}  // namespace

std::vector<std::string> Program::cut_ids() const {
  std::vector<std::string> out;
  for (auto& d : defs) collect_cuts(d.body, out);
  collect_cuts(main, out);
  return out;
}

namespace {

using Names = std::vector<std::string>;

Names sorted_union(Names a, const Names& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

Names without(Names a, const std::string& x) {
  a.erase(std::remove(a.begin(), a.end(), x), a.end());
  return a;
}

// Cut annotations and signatures are resolved once every `type` is known.
struct PendingType {
  Proc* cut = nullptr;
  TExprP left, right;
};

class Parser {
 public:
  Parser(const std::string& text, Program& prog) : c_(detail::lex(text)), prog_(prog) {}

  void items(bool sigs_only) {
    while (!c_.at_end()) {
      const Tok& t = c_.peek();
      if (c_.is_word("type")) {
        c_.next();
        TypeDecl d;
        d.line = t.line;
        d.name = c_.ident("type name");
        if (prog_.types.find(d.name)) throw ParseError("duplicate declaration of '" + d.name + "'", t.line, t.col);
        c_.expect("=");
        d.body = detail::parse_texpr(c_);
        c_.accept(";");
        prog_.types.decls.push_back(std::move(d));
      } else if (c_.is_word("sig")) {
        c_.next();
        sig(t);
      } else if (!sigs_only && c_.is_word("def")) {
        c_.next();
        def(t);
      } else if (!sigs_only && c_.is_word("main")) {
        c_.next();
        if (prog_.main) throw ParseError("duplicate main", t.line, t.col);
        c_.expect("=");
        main_ = choice();
        c_.accept(";");
      } else {
        c_.fail(sigs_only ? "expected 'type' or 'sig'" : "expected 'type', 'sig', 'def' or 'main'");
      }
    }
  }

  void finish() {
    check_guarded(prog_.types);
    for (auto& pt : pending_) {
      pt.cut->left_type = std::make_shared<const TypeAutomaton>(resolve_expr(prog_.types, pt.left));
      pt.cut->right_type = std::make_shared<const TypeAutomaton>(resolve_expr(prog_.types, pt.right));
    }
    prog_.main = main_;
  }

  void check_program() {
    for (auto& d : prog_.defs) {
      Names params = d.params;
      std::sort(params.begin(), params.end());
      if (std::adjacent_find(params.begin(), params.end()) != params.end())
        throw ParseError("repeated parameter in definition of '" + d.name + "'", d.line, 1);
      if (params != d.body->fv) {
        std::string got;
        for (auto& n : d.body->fv) got += (got.empty() ? "" : ", ") + n;
        throw ParseError("free names of '" + d.name + "' are {" + got + "}, not its parameters", d.line, 1);
      }
    }
    for (auto& [call, where] : calls_) {
      const Def* d = prog_.find_def(call->name);
      if (!d) throw ParseError("call to undefined process '" + call->name + "'", where.first, where.second);
      if (d->params.size() != call->args.size())
        throw ParseError("'" + call->name + "' expects " + std::to_string(d->params.size()) + " arguments",
                         where.first, where.second);
    }
    check_call_guards();
  }

 private:
  void sig(const Tok& t) {
    Signature s;
    s.line = t.line;
    s.name = c_.ident("process name");
    if (prog_.find_sig(s.name)) throw ParseError("duplicate signature for '" + s.name + "'", t.line, t.col);
    c_.expect("(");
    std::vector<TExprP> exprs;
    if (!c_.is(")")) {
      do {
        std::string x = c_.ident("channel name");
        c_.expect(":");
        exprs.push_back(detail::parse_texpr(c_));
        s.params.push_back({x, nullptr});
      } while (c_.accept(","));
    }
    c_.expect(")");
    c_.accept(";");
    prog_.sigs.push_back(std::move(s));
    // Signatures are stored by index; pointers are fixed up after parsing.
    for (size_t i = 0; i < exprs.size(); ++i)
      sig_pending_.push_back({prog_.sigs.size() - 1, i, exprs[i]});
  }

  void def(const Tok& t) {
    Def d;
    d.line = t.line;
    d.name = c_.ident("process name");
    if (prog_.find_def(d.name)) throw ParseError("duplicate definition of '" + d.name + "'", t.line, t.col);
    c_.expect("(");
    if (!c_.is(")")) {
      do d.params.push_back(c_.ident("parameter")); while (c_.accept(","));
    }
    c_.expect(")");
    c_.expect("=");
    d.body = choice();
    c_.accept(";");
    prog_.defs.push_back(std::move(d));
  }

  std::shared_ptr<Proc> node(Proc::K k, const Tok& at) {
    auto p = std::make_shared<Proc>();
    p->k = k;
    p->line = at.line;
    p->col = at.col;
    return p;
  }

  ProcP choice() {
    const Tok& at = c_.peek();
    ProcP l = prefix();
    if (c_.is("(") && c_.is("+", 1) && c_.is(")", 2)) {
      c_.next(), c_.next(), c_.next();
      auto p = node(Proc::K::Choice, at);
      p->p = l;
      p->q = choice();
      p->fv = sorted_union(p->p->fv, p->q->fv);
      return p;
    }
    return l;
  }

  ProcP prefix() {
    const Tok& at = c_.peek();
    if (c_.is("(")) {
      c_.next();
      ProcP p = choice();
      c_.expect(")");
      return p;
    }
    if (c_.peek().k != Tok::Ident) c_.fail("expected a process");
    bool call_like = c_.is("(", 1) && !(c_.is("+", 2) && c_.is(")", 3));
    if (c_.is_word("done") && !call_like && !c_.is("!", 1) && !c_.is("?", 1)) {
      c_.next();
      return node(Proc::K::Done, at);
    }
    if (c_.is_word("link") && c_.peek(1).k == Tok::Ident) {
      c_.next();
      auto p = node(Proc::K::Link, at);
      p->x = c_.ident("channel");
      p->y = c_.ident("channel");
      if (p->x == p->y) throw ParseError("link of a channel with itself", at.line, at.col);
      p->fv = sorted_union({p->x}, {p->y});
      return p;
    }
    if (c_.is_word("close") && c_.peek(1).k == Tok::Ident) {
      c_.next();
      auto p = node(Proc::K::Close, at);
      p->x = c_.ident("channel");
      p->fv = {p->x};
      return p;
    }
    if (c_.is_word("wait") && c_.peek(1).k == Tok::Ident) {
      c_.next();
      auto p = node(Proc::K::Wait, at);
      p->x = c_.ident("channel");
      c_.expect(".");
      p->p = prefix();
      p->fv = sorted_union({p->x}, p->p->fv);
      return p;
    }
    if (c_.is_word("case") && c_.peek(1).k == Tok::Ident) {
      c_.next();
      auto p = node(Proc::K::Case, at);
      p->x = c_.ident("channel");
      c_.expect("{");
      Names fv{p->x};
      if (!c_.is("}")) {
        do {
          const Tok& tt = c_.peek();
          std::string tag = c_.ident("tag");
          for (auto& [other, _] : p->arms)
            if (other == tag) throw ParseError("duplicate branch '" + tag + "'", tt.line, tt.col);
          c_.expect(":");
          ProcP body = choice();
          fv = sorted_union(fv, body->fv);
          p->arms.push_back({tag, body});
        } while (c_.accept(","));
      }
      c_.expect("}");
      p->fv = fv;
      return p;
    }
    if (c_.is_word("new") && c_.peek(1).k == Tok::Ident) {
      c_.next();
      auto p = node(Proc::K::Cut, at);
      p->x = c_.ident("channel");
      c_.expect(":");
      PendingType pt;
      pt.cut = p.get();
      pt.left = detail::parse_texpr(c_);
      c_.expect(">");
      c_.expect("<");
      pt.right = detail::parse_texpr(c_);
      c_.expect("{");
      p->p = choice();
      c_.expect("|");
      c_.expect("|");
      p->q = choice();
      c_.expect("}");
      for (auto& n : p->p->fv)
        if (n != p->x && std::binary_search(p->q->fv.begin(), p->q->fv.end(), n))
          throw ParseError("channel '" + n + "' is used on both sides of a cut", at.line, at.col);
      p->fv = without(sorted_union(p->p->fv, p->q->fv), p->x);
      int& count = cut_count_[p->x];
      p->cut_id = "cut-" + p->x + (++count > 1 ? "-" + std::to_string(count) : "");
      pending_.push_back(pt);
      return p;
    }
    std::string x = c_.ident();
    if (c_.is("(")) {
      auto p = node(Proc::K::Call, at);
      p->name = x;
      c_.next();
      if (!c_.is(")")) {
        do p->args.push_back(c_.ident("argument")); while (c_.accept(","));
      }
      c_.expect(")");
      Names args = p->args;
      std::sort(args.begin(), args.end());
      if (std::adjacent_find(args.begin(), args.end()) != args.end())
        throw ParseError("the same channel is passed twice to '" + x + "'", at.line, at.col);
      p->fv = args;
      calls_.push_back({p.get(), {at.line, at.col}});
      return p;
    }
    if (c_.is("!") && c_.is("(", 1)) {
      c_.next(), c_.next();
      auto p = node(Proc::K::Fork, at);
      p->x = x;
      p->y = c_.ident("bound channel");
      c_.expect(")");
      c_.expect("{");
      p->p = choice();
      c_.expect("}");
      c_.expect(".");
      p->q = prefix();
      Names payload = without(p->p->fv, p->y);
      for (auto& n : payload)
        if (n == x || std::binary_search(p->q->fv.begin(), p->q->fv.end(), n))
          throw ParseError("channel '" + n + "' is used both by the sent process and by the sender", at.line,
                           at.col);
      p->fv = sorted_union(sorted_union(payload, p->q->fv), {x});
      return p;
    }
    if (c_.is("!")) {
      c_.next();
      auto p = node(Proc::K::Select, at);
      p->x = x;
      p->tag = c_.ident("tag");
      c_.expect(".");
      p->p = prefix();
      p->fv = sorted_union({x}, p->p->fv);
      return p;
    }
    if (c_.is("?") && c_.is("(", 1)) {
      c_.next(), c_.next();
      auto p = node(Proc::K::Join, at);
      p->x = x;
      p->y = c_.ident("bound channel");
      if (p->y == x) throw ParseError("bound channel shadows the subject", at.line, at.col);
      c_.expect(")");
      c_.expect(".");
      p->p = prefix();
      p->fv = sorted_union({x}, without(p->p->fv, p->y));
      return p;
    }
    c_.fail("expected '!', '?' or '(' after '" + x + "'");
  }

  // Calls reachable from a definition body without crossing a prefix or a
  // choice must not lead back to it.
  void unguarded(const Proc* p, std::vector<const Proc*>& out) {
    if (p->k == Proc::K::Call) out.push_back(p);
    if (p->k == Proc::K::Cut) {
      unguarded(p->p.get(), out);
      unguarded(p->q.get(), out);
    }
  }

  void check_call_guards() {
    std::map<std::string, std::vector<const Proc*>> edges;
    for (auto& d : prog_.defs) unguarded(d.body.get(), edges[d.name]);
    std::map<std::string, int> state;  // 1 on stack, 2 done
    std::function<void(const std::string&)> visit = [&](const std::string& n) {
      state[n] = 1;
      for (const Proc* c : edges[n]) {
        int s = state[c->name];
        if (s == 1) throw ParseError("unguarded invocation of '" + c->name + "'", c->line, c->col);
        if (s == 0) visit(c->name);
      }
      state[n] = 2;
    };
    for (auto& d : prog_.defs)
      if (!state[d.name]) visit(d.name);
  }

 public:
  struct SigPending {
    size_t sig;
    size_t index;
    TExprP e;
  };
  std::vector<SigPending> sig_pending_;
  std::vector<PendingType> pending_;

 private:
  Cursor c_;
  Program& prog_;
  ProcP main_;
  std::map<std::string, int> cut_count_;
  std::vector<std::pair<const Proc*, std::pair<int, int>>> calls_;
};

void resolve_sigs(Program& prog, const std::vector<Parser::SigPending>& ps) {
  for (auto& s : ps)
    prog.sigs[s.sig].params[s.index].second =
        std::make_shared<const TypeAutomaton>(resolve_expr(prog.types, s.e));
}

}  // namespace

Program parse_program(const std::string& text) {
  Program prog;
  Parser ps(text, prog);
  ps.items(false);
  ps.finish();
  resolve_sigs(prog, ps.sig_pending_);
  ps.check_program();
  return prog;
}

void merge_signatures(Program& prog, const std::string& text) {
  Parser ps(text, prog);
  ps.items(true);
  check_guarded(prog.types);
  resolve_sigs(prog, ps.sig_pending_);
}

std::string show(const Proc& p) {
  auto sub = [](const ProcP& q) {
    std::string s = show(*q);
    return q->k == Proc::K::Choice ? "(" + s + ")" : s;
  };
  switch (p.k) {
    case Proc::K::Done: return "done";
    case Proc::K::Link: return "link " + p.x + " " + p.y;
    case Proc::K::Close: return "close " + p.x;
    case Proc::K::Wait: return "wait " + p.x + "." + sub(p.p);
    case Proc::K::Select: return p.x + "!" + p.tag + "." + sub(p.p);
    case Proc::K::Case: {
      std::string s = "case " + p.x + " {";
      for (size_t i = 0; i < p.arms.size(); ++i)
        s += (i ? ", " : " ") + p.arms[i].first + ": " + show(*p.arms[i].second);
      return s + (p.arms.empty() ? "}" : " }");
    }
    case Proc::K::Fork: return p.x + "!(" + p.y + "){" + show(*p.p) + "}." + sub(p.q);
    case Proc::K::Join: return p.x + "?(" + p.y + ")." + sub(p.p);
    case Proc::K::Choice: return sub(p.p) + " (+) " + show(*p.q);
    case Proc::K::Cut:
      return "new " + p.x + " : " + show(*p.left_type) + " >< " + show(*p.right_type) + " { " + show(*p.p) +
             " || " + show(*p.q) + " }";
    case Proc::K::Call: {
      std::string s = p.name + "(";
      for (size_t i = 0; i < p.args.size(); ++i) s += (i ? ", " : "") + p.args[i];
      return s + ")";
    }
  }
  return "?";
}

}  // namespace skit
