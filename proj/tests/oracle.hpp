#pragma once

// Independent model checker used as a test oracle. Kept deliberately
// different from the production evaluator: instead of recursing from the
// pointed world, it computes the full satisfaction set of every subformula
// across all worlds, and resolves common knowledge through an explicit
// Floyd-Warshall transitive closure of the union relation.

#include <cstdint>
#include <vector>

#include "epiplan/kripke.hpp"

namespace oracle {

inline std::vector<bool> sat_set(const epiplan::PointedKripke &m,
                                 const epiplan::BeliefFormula &f) {
  using Kind = epiplan::BeliefFormula::Kind;
  const std::uint32_t n = m.world_count();
  std::vector<bool> out(n, false);
  switch (f.kind()) {
  case Kind::Literal: {
    for (std::uint32_t w = 0; w < n; ++w)
      out[w] = m.world(w).valuation.test(f.fluent().index) == f.positive();
    return out;
  }
  case Kind::Not: {
    std::vector<bool> inner = sat_set(m, f.lhs());
    for (std::uint32_t w = 0; w < n; ++w)
      out[w] = !inner[w];
    return out;
  }
  case Kind::And: {
    std::vector<bool> l = sat_set(m, f.lhs()), r = sat_set(m, f.rhs());
    for (std::uint32_t w = 0; w < n; ++w)
      out[w] = l[w] && r[w];
    return out;
  }
  case Kind::Or: {
    std::vector<bool> l = sat_set(m, f.lhs()), r = sat_set(m, f.rhs());
    for (std::uint32_t w = 0; w < n; ++w)
      out[w] = l[w] || r[w];
    return out;
  }
  case Kind::Implies: {
    std::vector<bool> l = sat_set(m, f.lhs()), r = sat_set(m, f.rhs());
    for (std::uint32_t w = 0; w < n; ++w)
      out[w] = !l[w] || r[w];
    return out;
  }
  case Kind::Believes: {
    std::vector<bool> inner = sat_set(m, f.lhs());
    for (std::uint32_t w = 0; w < n; ++w) {
      bool all = true;
      for (std::uint32_t v : m.successors(f.agent(), w))
        all = all && inner[v];
      out[w] = all;
    }
    return out;
  }
  case Kind::Common: {
    std::vector<bool> inner = sat_set(m, f.lhs());
    // union relation of the group, then transitive closure (>= 1 step)
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (epiplan::Agent a : f.group())
      for (std::uint32_t w = 0; w < n; ++w)
        for (std::uint32_t v : m.successors(a, w))
          reach[w][v] = true;
    for (std::uint32_t k = 0; k < n; ++k)
      for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
          if (reach[i][k] && reach[k][j])
            reach[i][j] = true;
    for (std::uint32_t w = 0; w < n; ++w) {
      bool all = true;
      for (std::uint32_t v = 0; v < n; ++v)
        if (reach[w][v])
          all = all && inner[v];
      out[w] = all;
    }
    return out;
  }
  }
  return out;
}

inline bool entails(const epiplan::PointedKripke &m,
                    const epiplan::BeliefFormula &f) {
  return sat_set(m, f)[m.pointed()];
}

} // namespace oracle
