#include "doctest.h"
#include "skit/lts.hpp"
#include "skit/types.hpp"

using namespace skit;

TEST_SUITE("types") {
  TEST_CASE("dual is an involution and swaps polarity") {
    TypeAutomaton s = parse_type("+{a: !(end!).end!, b: &{c: end?}}");
    CHECK(equiv(dual(dual(s)), s));
    CHECK(polarity(s) == Polarity::Pos);
    CHECK(polarity(dual(s)) == Polarity::Neg);
    CHECK(equiv(dual(parse_type("end!")), parse_type("end?")));
  }

  TEST_CASE("unfolding a recursive type gives the same automaton") {
    auto g = parse_types("type X = +{a: X, b: end!}\ntype Y = +{a: +{a: Y, b: end!}, b: end!}");
    CHECK(equiv(resolve(g, "X"), resolve(g, "Y")));
    CHECK(resolve(g, "X") == resolve(g, "Y"));  // canonical form
  }

  TEST_CASE("unguarded recursion is rejected") {
    CHECK_THROWS(resolve(parse_types("type X = X"), "X"));
  }

  TEST_CASE("empty choices") {
    CHECK(is_zero(parse_type("+{}")));
    CHECK(is_top(parse_type("&{}")));
    CHECK_FALSE(is_zero(parse_type("&{}")));
  }

  TEST_CASE("fair termination") {
    CHECK(is_fairly_terminating(resolve(parse_types("type X = +{a: X, b: end!}"), "X")));
    CHECK_FALSE(is_fairly_terminating(resolve(parse_types("type X = +{a: X}"), "X")));
  }

  TEST_CASE("first order") {
    CHECK(is_first_order(parse_type("+{a: end!}")));
    CHECK_FALSE(is_first_order(parse_type("!(end!).end!")));
  }
}

TEST_SUITE("lts") {
  TEST_CASE("an output choice offers each tag in full mode") {
    TypeAutomaton s = parse_type("+{a: end!, b: &{c: end?}}");
    auto ls = enumerate_labels(s, Dir::Out, Mode::Full);
    CHECK(ls.size() >= 2);
    auto d = enabled(s, Label::tagged(Dir::Out, "b"), Mode::Full);
    REQUIRE(d.has_value());
    CHECK(equiv(*d, parse_type("&{c: end?}")));
    CHECK_FALSE(enabled(s, Label::tagged(Dir::Out, "z"), Mode::Full).has_value());
  }

  TEST_CASE("an input cannot be emitted") {
    TypeAutomaton s = parse_type("&{a: end?}");
    CHECK(enabled(s, Label::tagged(Dir::In, "a"), Mode::Must).has_value());
    CHECK_FALSE(enabled(s, Label::tagged(Dir::Out, "a"), Mode::Must).has_value());
  }

  TEST_CASE("labels print and parse back") {
    for (const char* t : {"?a", "!a", "?*"}) CHECK(parse_label(t).str() == t);
  }
}
