// Tokenizer shared by the type and process grammars.
#pragma once

#include <string>
#include <vector>

#include "skit/types.hpp"

namespace skit::detail {

struct Tok {
  enum K { Ident, Num, Punct, End } k = End;
  std::string s;
  int line = 1, col = 1;
};

std::vector<Tok> lex(const std::string& text);

class Cursor {
 public:
  explicit Cursor(std::vector<Tok> toks) : t_(std::move(toks)) {}

  const Tok& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < t_.size() ? t_[i] : t_.back();
  }
  bool at_end() const { return peek().k == Tok::End; }
  bool is(const char* p, size_t ahead = 0) const {
    const Tok& t = peek(ahead);
    return t.k == Tok::Punct && t.s == p;
  }
  bool is_word(const char* w, size_t ahead = 0) const {
    const Tok& t = peek(ahead);
    return t.k == Tok::Ident && t.s == w;
  }
  const Tok& next() {
    const Tok& t = peek();
    if (pos_ < t_.size() - 1) ++pos_;
    return t;
  }
  bool accept(const char* p) {
    if (!is(p)) return false;
    next();
    return true;
  }
  void expect(const char* p) {
    if (!accept(p)) fail(std::string("expected '") + p + "'");
  }
  void expect_word(const char* w) {
    if (!is_word(w)) fail(std::string("expected '") + w + "'");
    next();
  }
  std::string ident(const char* what = "identifier") {
    if (peek().k != Tok::Ident) fail(std::string("expected ") + what);
    return next().s;
  }
  unsigned number() {
    if (peek().k != Tok::Num) fail("expected number");
    return static_cast<unsigned>(std::stoul(next().s));
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Tok& t = peek();
    std::string got = t.k == Tok::End ? "end of input" : "'" + t.s + "'";
    throw ParseError(msg + ", got " + got, t.line, t.col);
  }

 private:
  std::vector<Tok> t_;
  size_t pos_ = 0;
};

// Type expression grammar, used by both front ends.
TExprP parse_texpr(Cursor& c);

}  // namespace skit::detail
