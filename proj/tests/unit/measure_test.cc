#include "doctest.h"
#include "skit/cap.hpp"
#include "skit/corpus.hpp"
#include "skit/measure.hpp"

using namespace skit;

TEST_SUITE("measure") {
  TEST_CASE("least solution of a small system") {
    MeasureSystem s;
    int m = s.add_var("m");
    s.set(m, MExpr::min_plus(1, {MExpr::sum(1, {MExpr::variable(m)}), MExpr::constant(3)}));
    CHECK(s.solve()[0] == MeasureValue::of(4));
  }

  TEST_CASE("a self loop with no exit is infinite") {
    MeasureSystem s;
    int m = s.add_var("m");
    s.set(m, MExpr::sum(1, {MExpr::variable(m)}));
    CHECK(s.solve(1000)[0].inf);
  }

  TEST_CASE("max monus truncates at zero") {
    MExpr e = MExpr::max_monus({MExpr::constant(2), MExpr::constant(5)}, {3, 1});
    CHECK(e.eval({}) == MeasureValue::of(4));
    MExpr z = MExpr::max_monus({MExpr::constant(2)}, {3});
    CHECK(z.eval({}) == MeasureValue::of(0));
  }

  TEST_CASE("server measures") {
    Program p = parse_program(embedded_text("server.cap"));
    TypecheckOptions o;
    o.assume_cuts = {"cut-y"};
    TypeReport r = typecheck(p, o);
    CHECK(r.overall == Overall::Conditional);
    CHECK(r.errors.empty());
    CHECK(r.measures.at("Gather") == MeasureValue::of(2));
    CHECK(r.measures.at("Split") == MeasureValue::of(4));
    CHECK(r.measures.at("Worker") == MeasureValue::of(2));
    CHECK(r.measures.at("Server") == MeasureValue::of(6));
  }

  TEST_CASE("a process that never ends has infinite measure") {
    Program p = parse_program(embedded_text("omega.cap"));
    TypeReport r = typecheck(p);
    CHECK(r.overall == Overall::IllTyped);
    CHECK(r.measures.at("Omega").inf);
  }

  TEST_CASE("a fair choice with an exit is fine") {
    Program p = parse_program(embedded_text("fairchoice.cap"));
    TypeReport r = typecheck(p);
    CHECK(r.overall == Overall::WellTyped);
    CHECK(r.measures.at("A") == MeasureValue::of(1));
  }

  TEST_CASE("close with a stray name in scope") {
    Program p = parse_program(embedded_text("deadlock.cap"));
    TypeReport r = typecheck(p);
    CHECK(r.overall == Overall::IllTyped);
    REQUIRE_FALSE(r.errors.empty());
  }

  TEST_CASE("a missing signature makes inference throw") {
    Program p = parse_program("def A() = done");
    CHECK_THROWS_AS(infer_measures(p), TypeError);
  }

  TEST_CASE("the json report names the overall outcome") {
    Program p = parse_program(embedded_text("fairchoice.cap"));
    CHECK(report_json(typecheck(p)).find("well-typed") != std::string::npos);
  }
}
