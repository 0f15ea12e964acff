#include "lexer.hpp"

#include <cctype>

namespace skit::detail {

namespace {
bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '\'';
}
}  // namespace

std::vector<Tok> lex(const std::string& text) {
  std::vector<Tok> out;
  int line = 1, col = 1;
  size_t i = 0, n = text.size();
  auto adv = [&](size_t k) {
    for (size_t j = 0; j < k && i < n; ++j, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < n) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      adv(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < n && text[i + 1] == '/')) {
      while (i < n && text[i] != '\n') adv(1);
      continue;
    }
    Tok t;
    t.line = line;
    t.col = col;
    if (ident_start(c)) {
      size_t j = i;
      while (j < n && ident_char(text[j])) ++j;
      t.k = Tok::Ident;
      t.s = text.substr(i, j - i);
      adv(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      t.k = Tok::Num;
      t.s = text.substr(i, j - i);
      adv(j - i);
    } else if (std::string("{}(),:@.=!?+&<>|;*[]").find(c) != std::string::npos) {
      t.k = Tok::Punct;
      t.s = std::string(1, c);
      adv(1);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back(std::move(t));
  }
  Tok end;
  end.k = Tok::End;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

TExprP parse_texpr(Cursor& c) {
  auto e = std::make_shared<TExpr>();
  e->line = c.peek().line;
  e->col = c.peek().col;
  if (c.is_word("end") && (c.is("!", 1) || c.is("?", 1))) {
    c.next();
    e->k = c.next().s == "!" ? TExpr::K::One : TExpr::K::Bot;
    return e;
  }
  if ((c.is("+") || c.is("&")) && c.is("{", 1)) {
    e->k = c.next().s == "+" ? TExpr::K::Plus : TExpr::K::With;
    c.next();
    if (!c.is("}")) {
      do {
        TExpr::Arm arm;
        const Tok& tt = c.peek();
        arm.tag = c.ident("tag");
        if (c.accept("@")) arm.measure = c.number();
        for (auto& other : e->arms)
          if (other.tag == arm.tag) throw ParseError("duplicate tag '" + arm.tag + "'", tt.line, tt.col);
        c.expect(":");
        arm.body = parse_texpr(c);
        e->arms.push_back(std::move(arm));
      } while (c.accept(","));
    }
    c.expect("}");
    return e;
  }
  if ((c.is("!") || c.is("?")) && c.is("(", 1)) {
    e->k = c.next().s == "!" ? TExpr::K::Times : TExpr::K::Par;
    c.next();
    e->payload = parse_texpr(c);
    c.expect(")");
    c.expect(".");
    e->cont = parse_texpr(c);
    return e;
  }
  if (c.is_word("dual") && c.is("(", 1)) {
    c.next();
    c.next();
    e->k = TExpr::K::Dual;
    e->cont = parse_texpr(c);
    c.expect(")");
    return e;
  }
  if (c.peek().k == Tok::Ident) {
    e->k = TExpr::K::Ref;
    e->name = c.next().s;
    return e;
  }
  c.fail("expected a session type");
}

}  // namespace skit::detail
