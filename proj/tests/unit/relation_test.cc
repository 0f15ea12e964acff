#include "doctest.h"
#include "skit/relation.hpp"
#include "skit/types.hpp"

using namespace skit;

namespace {
Outcome rel(const char* s, const char* t, RelationKind k) {
  Verdict v = check(parse_type(s), parse_type(t), k);
  if (v.outcome == Outcome::Yes) CHECK(validate_witness(*v.witness, k));
  if (v.outcome == Outcome::No) CHECK(replay_counterexample(v));
  return v.outcome;
}
}  // namespace

TEST_SUITE("relation") {
  TEST_CASE("a type composes with its dual") {
    CHECK(rel("+{a: end!, b: &{c: end?}}", "&{a: end?, b: +{c: end!}}", RelationKind::Compose) == Outcome::Yes);
  }

  TEST_CASE("missing input branch breaks composition") {
    CHECK(rel("+{a: end!, b: end!}", "&{a: end?}", RelationKind::Compose) == Outcome::No);
  }

  TEST_CASE("width: a subtype may offer more outputs and accept fewer inputs") {
    CHECK(rel("+{a: end!}", "+{a: end!, b: end!}", RelationKind::SyncSub) == Outcome::Yes);
    CHECK(rel("+{a: end!, b: end!}", "+{a: end!}", RelationKind::SyncSub) == Outcome::No);
    CHECK(rel("&{a: end?, b: end?}", "&{a: end?}", RelationKind::SyncSub) == Outcome::Yes);
    CHECK(rel("&{a: end?}", "&{a: end?, b: end?}", RelationKind::SyncSub) == Outcome::No);
  }

  TEST_CASE("zero and top") {
    CHECK(rel("+{}", "&{a: end?}", RelationKind::FairSub) == Outcome::Yes);
    CHECK(rel("+{a: end!}", "&{}", RelationKind::FairSub) == Outcome::Yes);
  }

  TEST_CASE("every kind parses by name") {
    for (auto k : {RelationKind::Compose, RelationKind::FairSub, RelationKind::SyncSub, RelationKind::AsyncSub,
                   RelationKind::BzFairSub, RelationKind::AuxSub})
      CHECK(parse_kind(kind_name(k)) == k);
  }

  TEST_CASE("a tiny budget gives Unknown, not a guess") {
    auto g = parse_types("type S = +{task: S, stop: T}\ntype T = &{res: T, stop: end?}\n"
                         "type U = &{task: +{res: U}, stop: +{stop: end!}}");
    Budget b{3, 1024};
    Verdict v = check(resolve(g, "S"), resolve(g, "U"), RelationKind::Compose, b);
    CHECK(v.outcome == Outcome::Unknown);
  }
}
