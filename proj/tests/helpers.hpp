#pragma once

// Shared construction shorthand for tests.

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "epiplan/kripke.hpp"
#include "epiplan/rng.hpp"

namespace test_helpers {

using namespace epiplan;

inline Valuation make_val(std::uint32_t width,
                          std::initializer_list<std::uint32_t> trues) {
  Valuation v(width);
  for (std::uint32_t i : trues)
    v.set(i);
  return v;
}

struct StateSpec {
  std::uint32_t agents = 1;
  std::uint32_t width = 1;
  std::vector<std::vector<std::uint32_t>> worlds; // true indices per world
  std::vector<PointedKripke::EdgeList> edges;     // one list per agent
  std::uint32_t pointed = 0;
};

inline PointedKripke make_state(const StateSpec &spec) {
  std::vector<Valuation> vals;
  for (const auto &trues : spec.worlds) {
    Valuation v(spec.width);
    for (std::uint32_t i : trues)
      v.set(i);
    vals.push_back(std::move(v));
  }
  std::vector<PointedKripke::EdgeList> rel = spec.edges;
  rel.resize(spec.agents);
  return PointedKripke(spec.agents, std::move(vals), std::move(rel),
                       spec.pointed);
}

/// Random structure: 1..max_worlds worlds, random valuations over `width`
/// fluents, each directed edge present with probability ~1/2.
inline PointedKripke random_state(Rng &rng, std::uint32_t max_worlds,
                                  std::uint32_t width, std::uint32_t agents) {
  std::uint32_t n = 1 + static_cast<std::uint32_t>(rng.below(max_worlds));
  std::vector<Valuation> vals;
  for (std::uint32_t w = 0; w < n; ++w) {
    Valuation v(width);
    for (std::uint32_t f = 0; f < width; ++f)
      if (rng.below(2))
        v.set(f);
    vals.push_back(std::move(v));
  }
  std::vector<PointedKripke::EdgeList> rel(agents);
  for (std::uint32_t a = 0; a < agents; ++a)
    for (std::uint32_t u = 0; u < n; ++u)
      for (std::uint32_t v = 0; v < n; ++v)
        if (rng.below(2))
          rel[a].emplace_back(u, v);
  std::uint32_t pointed = static_cast<std::uint32_t>(rng.below(n));
  return PointedKripke(agents, std::move(vals), std::move(rel), pointed);
}

/// Random belief formula of at most the given depth.
inline BeliefFormula random_formula(Rng &rng, std::uint32_t depth,
                                    std::uint32_t width,
                                    std::uint32_t agents) {
  if (depth == 0 || rng.below(4) == 0) {
    Fluent f{static_cast<std::uint32_t>(rng.below(width))};
    return BeliefFormula::literal(f, rng.below(2) == 0);
  }
  switch (rng.below(7)) {
  case 0:
    return BeliefFormula::negation(
        random_formula(rng, depth - 1, width, agents));
  case 1:
    return BeliefFormula::conjunction(
        random_formula(rng, depth - 1, width, agents),
        random_formula(rng, depth - 1, width, agents));
  case 2:
    return BeliefFormula::disjunction(
        random_formula(rng, depth - 1, width, agents),
        random_formula(rng, depth - 1, width, agents));
  case 3:
    return BeliefFormula::implication(
        random_formula(rng, depth - 1, width, agents),
        random_formula(rng, depth - 1, width, agents));
  case 4:
  case 5: {
    Agent a{static_cast<std::uint32_t>(rng.below(agents))};
    return BeliefFormula::believes(
        a, random_formula(rng, depth - 1, width, agents));
  }
  default: {
    std::vector<Agent> group;
    for (std::uint32_t i = 0; i < agents; ++i)
      if (rng.below(2))
        group.push_back(Agent{i});
    if (group.empty())
      group.push_back(Agent{static_cast<std::uint32_t>(rng.below(agents))});
    return BeliefFormula::common(
        std::move(group), random_formula(rng, depth - 1, width, agents));
  }
  }
}

} // namespace test_helpers
