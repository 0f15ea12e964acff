// Seeded random session types for property tests.
#pragma once

#include <random>
#include <utility>

#include "skit/types.hpp"

namespace skit {

struct GenOptions {
  size_t max_nodes = 8;
  bool higher_order = false;
  size_t tags = 3;  // tags drawn from a, b, c, ...
  double empty_choice = 0.05;
};

// Random graph over up to max_nodes states, rooted at the first; minimized.
TypeAutomaton random_type(std::mt19937_64& rng, const GenOptions& o = {});

// First-order and fairly terminating (rejection sampling).
TypeAutomaton random_ffst(std::mt19937_64& rng, size_t max_nodes = 8);

// A related pair: the second is the first with one branch dropped or added,
// a continuation swapped, or unchanged; both fairly terminating.
std::pair<TypeAutomaton, TypeAutomaton> random_ffst_pair(std::mt19937_64& rng, size_t max_nodes = 8);

}  // namespace skit
