#include <random>

#include "doctest.h"
#include "skit/corpus.hpp"
#include "skit/qm.hpp"
#include "skit/relation.hpp"

using namespace skit;

TEST_SUITE("qm") {
  TEST_CASE("the draining machine accepts after reading everything") {
    QueueMachine m = parse_machine_json(embedded_text("qm-drain.json"));
    QmRun r = simulate_qm(m, parse_word("ab"), 100);
    CHECK(r.status == QmStatus::Accepted);
    CHECK(r.steps == 3);
    CHECK(r.trace.front().queue == Word{"a", "b", "$"});
  }

  TEST_CASE("words are one symbol per character") {
    CHECK(parse_word("ab$") == Word{"a", "b", "$"});
    CHECK(show_word(parse_word("ab")) == "ab");
  }

  TEST_CASE("a partial transition table is rejected") {
    CHECK_THROWS_AS(parse_machine_json(R"({"states":["s"],"sigma":["a"],"gamma":["a","$"],"dollar":"$",
      "start":"s","delta":{"s,a":["s",""]}})"),
                    QmError);
  }

  TEST_CASE("machine json round trips") {
    QueueMachine m = parse_machine_json(embedded_text("qm-unary.json"));
    QueueMachine n = parse_machine_json(machine_json(m));
    CHECK(n.delta == m.delta);
    CHECK(n.start == m.start);
  }

  TEST_CASE("empty queue encodes as the end of input") {
    QueueMachine m = parse_machine_json(embedded_text("qm-drain.json"));
    TypeAutomaton q = encode_queue(m, {});
    CHECK(is_first_order(q));
    auto [q0, s0] = encode(m, parse_word("a"));
    CHECK(equiv(q0, encode_queue(m, parse_word("a$"))));
    CHECK(equiv(s0, encode_control(m, m.start)));
  }

  TEST_CASE("encodings follow the machine step by step") {
    for (const char* f : {"qm-drain.json", "qm-unary.json", "qm-loop.json"}) {
      QueueMachine m = parse_machine_json(embedded_text(f));
      CorrespondenceResult r = check_correspondence(m, parse_word(m.sigma.empty() ? "" : m.sigma[0]), 50);
      CHECK_MESSAGE(r.holds, f << ": " << r.failure);
    }
  }

  TEST_CASE("random machines are valid") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
      QueueMachine m = random_machine(rng, 3, 3);
      CHECK_NOTHROW(m.validate());
      Word w = random_input(rng, m, 4);
      CHECK(check_correspondence(m, w, 30).holds);
    }
  }
}
