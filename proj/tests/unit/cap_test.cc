#include <algorithm>

#include "doctest.h"
#include "skit/cap.hpp"
#include "skit/corpus.hpp"

using namespace skit;

namespace {

const char* kSplitWorker = R"(
type S = +{task@1: S, stop@0: T}
type T = &{res@0: T, stop@0: end?}
type U = &{task@1: +{res@0: U}, stop@0: +{stop@0: end!}}
def Split(y) = y!task.Split(y) (+) y!stop.Sink(y)
def Sink(y) = case y { res: Sink(y), stop: wait y.done }
def Worker(y) = case y { task: y!res.Worker(y), stop: y!stop.close y }
main = new y : S >< U { Split(y) || Worker(y) }
)";

std::vector<Redex> of_kind(const Config& c, Redex::K k) {
  std::vector<Redex> out;
  for (auto& r : enabled_redexes(c))
    if (r.k == k) out.push_back(r);
  return out;
}

size_t queued(const Config& c) {
  size_t n = 0;
  for (auto& [id, ch] : c.channels) n += ch.q[0].size() + ch.q[1].size();
  return n;
}

Config start(const Program& p) { return to_configuration(p, p.main); }

}  // namespace

TEST_SUITE("cap") {
  TEST_CASE("parses a worker definition") {
    Program p = parse_program("def Worker(y) = case y { task: y!res.Worker(y), stop: y!stop.close y }");
    REQUIRE(p.defs.size() == 1);
    CHECK(p.defs[0].params == std::vector<std::string>{"y"});
    CHECK(p.defs[0].body->k == Proc::K::Case);
    CHECK(p.defs[0].body->arms.size() == 2);
    CHECK(p.main == nullptr);
  }

  TEST_CASE("done parses and runs to completion at once") {
    Program p = parse_program("main = done");
    REQUIRE(p.main);
    CHECK(p.main->k == Proc::K::Done);
    CHECK(start(p).done());
  }

  TEST_CASE("an unguarded call is a parse error") {
    CHECK_THROWS_WITH_AS(parse_program("def A() = A()"), doctest::Contains("unguarded"), ParseError);
  }

  TEST_CASE("syntax errors carry a position") {
    try {
      parse_program("main = case x { a: done");
      FAIL("parsed");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(':') != std::string::npos);
    }
  }

  TEST_CASE("close meets wait once both queues are empty") {
    Program p = parse_program("main = new x : end! >< end? { close x || wait x.done }");
    Config c = start(p);
    auto rs = of_kind(c, Redex::K::Close);
    REQUIRE(rs.size() == 1);
    c = step(c, rs[0]);
    CHECK(c.done());
  }

  TEST_CASE("no close while a message is still buffered") {
    Program p = parse_program("main = new x : +{a: end!} >< &{a: end?} { x!a.close x || case x { a: wait x.done } }");
    Config c = start(p);
    CHECK(queued(c) == 1);
    CHECK(of_kind(c, Redex::K::Close).empty());
    auto sel = of_kind(c, Redex::K::Select);
    REQUIRE(sel.size() == 1);
    c = step(c, sel[0]);
    CHECK(queued(c) == 0);
    auto cl = of_kind(c, Redex::K::Close);
    REQUIRE(cl.size() == 1);
    CHECK(step(c, cl[0]).done());
  }

  TEST_CASE("a stale redex is refused") {
    Program p = parse_program("main = new x : end! >< end? { close x || wait x.done }");
    Config c = start(p);
    Redex r = of_kind(c, Redex::K::Close).at(0);
    Config after = step(c, r);
    CHECK_THROWS_AS(step(after, r), RunError);
  }

  TEST_CASE("a choice offers both sides and commits to one") {
    Program p = parse_program("main = done (+) new x : end! >< end? { close x || wait x.done }");
    Config c = start(p);
    auto rs = of_kind(c, Redex::K::Choice);
    REQUIRE(rs.size() == 2);
    auto left = std::find_if(rs.begin(), rs.end(), [](auto& r) { return r.side == 0; });
    REQUIRE(left != rs.end());
    CHECK(step(c, *left).done());
  }

  TEST_CASE("a link renames the forwarded endpoint") {
    Program p = parse_program(embedded_text("linkfwd.cap"));
    Config c = start(p);
    auto ls = of_kind(c, Redex::K::Link);
    REQUIRE(ls.size() == 1);
    size_t chans = c.channels.size();
    c = step(c, ls[0]);
    CHECK(c.channels.size() == chans - 1);
    RunResult r = run(c, Scheduler{Scheduler::Kind::Fair, 0, {}}, 20);
    CHECK(r.status == RunStatus::DoneReached);
  }

  TEST_CASE("the splitter buffers n tasks ahead of the worker") {
    Program p = parse_program(kSplitWorker);
    Config c = start(p);
    const size_t n = 5;
    size_t before = queued(c);
    for (size_t i = 0; i < n; ++i) {
      auto rs = of_kind(c, Redex::K::Choice);
      REQUIRE(rs.size() == 2);
      c = step(c, rs[0].side == 0 ? rs[0] : rs[1]);
    }
    CHECK(queued(c) == before + n);
    for (auto& [id, ch] : c.channels) {
      size_t k = ch.q[0].size() + ch.q[1].size();
      if (k) {
        for (auto* q : {&ch.q[0], &ch.q[1]})
          for (auto& m : *q) CHECK(m.tag == "task");
      }
    }
  }

  TEST_CASE("splitter and worker finish under every scheduler") {
    Program p = parse_program(kSplitWorker);
    for (auto kind : {Scheduler::Kind::Random, Scheduler::Kind::Fair}) {
      for (uint64_t seed = 0; seed < 10; ++seed) {
        Scheduler s{kind, seed, {}};
        CHECK(run(start(p), s, 5000).status == RunStatus::DoneReached);
      }
    }
    CHECK(is_weakly_terminating_probe(start(p), 500));
  }

  TEST_CASE("the deadlock fixture gets stuck") {
    Program p = parse_program(embedded_text("deadlock.cap"));
    RunResult r = run(start(p), Scheduler{}, 100);
    CHECK(r.status == RunStatus::StuckNotDone);
  }

  TEST_CASE("traces report every step") {
    Program p = parse_program(embedded_text("forkjoin.cap"));
    std::vector<TraceEvent> evs;
    RunResult r = run(start(p), Scheduler{}, 100, [&](const TraceEvent& e, const Config&) { evs.push_back(e); });
    CHECK(r.status == RunStatus::DoneReached);
    CHECK(evs.size() == r.steps);
    CHECK(trace_json(evs.at(0)).find("\"rule\"") != std::string::npos);
  }

  TEST_CASE("configuration keys ignore channel numbering") {
    Program p = parse_program(kSplitWorker);
    Config a = start(p), b = start(p);
    b.next_chan += 7;
    CHECK(config_key(a) == config_key(b));
  }
}
