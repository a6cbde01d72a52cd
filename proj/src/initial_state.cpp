#include "epiplan/domain_io.hpp"

#include <algorithm>
#include <optional>

namespace epiplan {

namespace {

// B_i lit, reporting the agent and the literal
bool match_belief_literal(const BeliefFormula &f, Agent &agent, Fluent &fluent,
                          bool &positive) {
  if (f.kind() != BeliefFormula::Kind::Believes ||
      f.lhs().kind() != BeliefFormula::Kind::Literal)
    return false;
  agent = f.agent();
  fluent = f.lhs().fluent();
  positive = f.lhs().positive();
  return true;
}

// not B_i lit, where `not` may be a Not node around the belief
bool match_negated_belief_literal(const BeliefFormula &f, Agent &agent,
                                  Fluent &fluent, bool &positive) {
  if (f.kind() != BeliefFormula::Kind::Not)
    return false;
  return match_belief_literal(f.lhs(), agent, fluent, positive);
}

// B_i f or B_i not f (either order)
bool match_knows_whether(const BeliefFormula &f, Agent &agent,
                         Fluent &fluent) {
  if (f.kind() != BeliefFormula::Kind::Or)
    return false;
  Agent a1, a2;
  Fluent f1, f2;
  bool p1, p2;
  if (!match_belief_literal(f.lhs(), a1, f1, p1) ||
      !match_belief_literal(f.rhs(), a2, f2, p2))
    return false;
  if (!(a1 == a2) || !(f1 == f2) || p1 == p2)
    return false;
  agent = a1;
  fluent = f1;
  return true;
}

// not B_i f and not B_i not f (either order)
bool match_unaware(const BeliefFormula &f, Agent &agent, Fluent &fluent) {
  if (f.kind() != BeliefFormula::Kind::And)
    return false;
  Agent a1, a2;
  Fluent f1, f2;
  bool p1, p2;
  if (!match_negated_belief_literal(f.lhs(), a1, f1, p1) ||
      !match_negated_belief_literal(f.rhs(), a2, f2, p2))
    return false;
  if (!(a1 == a2) || !(f1 == f2) || p1 == p2)
    return false;
  agent = a1;
  fluent = f1;
  return true;
}

bool group_is_everyone(const std::vector<Agent> &group,
                       std::uint32_t agent_count) {
  std::vector<Agent> sorted = group;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() != agent_count)
    return false;
  for (std::uint32_t i = 0; i < agent_count; ++i)
    if (sorted[i].index != i)
      return false;
  return true;
}

} // namespace

PointedKripke initial_state(const EpistemicProblem &problem) {
  problem.validate();
  const std::uint32_t n_fluents = problem.fluent_count();
  const std::uint32_t n_agents = problem.agent_count();

  std::vector<std::optional<bool>> fixed(n_fluents);
  std::vector<std::vector<bool>> unaware(
      n_agents, std::vector<bool>(n_fluents, false));
  std::vector<BeliefFormula> constraints;

  for (const BeliefFormula &phi : problem.initial) {
    if (phi.kind() == BeliefFormula::Kind::Literal) {
      auto &slot = fixed[phi.fluent().index];
      if (slot.has_value() && *slot != phi.positive())
        throw std::invalid_argument(
            "unsatisfiable initial specification: contradictory literals for "
            "'" +
            problem.fluent_names[phi.fluent().index] + "'");
      slot = phi.positive();
      continue;
    }
    if (phi.kind() == BeliefFormula::Kind::Common) {
      if (!group_is_everyone(phi.group(), n_agents))
        throw std::invalid_argument(
            "unsupported initial fragment: common knowledge must range over "
            "all agents");
      const BeliefFormula &body = phi.lhs();
      Agent agent;
      Fluent fluent;
      if (match_knows_whether(body, agent, fluent))
        continue; // awareness is the default; verified at the end
      if (match_unaware(body, agent, fluent)) {
        unaware[agent.index][fluent.index] = true;
        continue;
      }
      if (body.is_fluent_formula()) {
        constraints.push_back(body);
        continue;
      }
      throw std::invalid_argument(
          "unsupported initial fragment: common knowledge body must be an "
          "awareness/ignorance pattern or a fluent formula");
    }
    throw std::invalid_argument(
        "unsupported initial fragment: top-level formulas must be literals "
        "or common knowledge");
  }

  // uncertain fluents: those some agent is ignorant of
  std::vector<std::uint32_t> uncertain;
  for (std::uint32_t f = 0; f < n_fluents; ++f)
    for (std::uint32_t a = 0; a < n_agents; ++a)
      if (unaware[a][f]) {
        uncertain.push_back(f);
        break;
      }
  if (uncertain.size() > 16)
    throw std::invalid_argument(
        "unsupported initial fragment: more than 16 uncertain fluents");

  Valuation pointed_valuation(n_fluents);
  for (std::uint32_t f = 0; f < n_fluents; ++f)
    pointed_valuation.set(f, fixed[f].value_or(false));

  // candidate worlds: vary the uncertain fluents, keep constraint models
  std::vector<Valuation> worlds;
  std::optional<std::uint32_t> pointed_index;
  const std::uint32_t combos = 1u << uncertain.size();
  for (std::uint32_t mask = 0; mask < combos; ++mask) {
    Valuation v = pointed_valuation;
    for (std::uint32_t j = 0; j < uncertain.size(); ++j)
      v.set(uncertain[j], (mask >> j) & 1);
    bool keep = true;
    for (const BeliefFormula &c : constraints)
      if (!eval_fluent_formula(v, c)) {
        keep = false;
        break;
      }
    if (!keep)
      continue;
    if (v == pointed_valuation)
      pointed_index = static_cast<std::uint32_t>(worlds.size());
    worlds.push_back(std::move(v));
  }
  if (!pointed_index)
    throw std::invalid_argument(
        "unsatisfiable initial specification: the literal assignment "
        "violates a common-knowledge constraint");

  // agents consider two worlds interchangeable when they agree on every
  // fluent the agent is aware of
  std::vector<PointedKripke::EdgeList> relations(n_agents);
  for (std::uint32_t a = 0; a < n_agents; ++a) {
    for (std::uint32_t u = 0; u < worlds.size(); ++u) {
      for (std::uint32_t v = 0; v < worlds.size(); ++v) {
        bool linked = true;
        for (std::uint32_t f : uncertain)
          if (!unaware[a][f] && worlds[u].test(f) != worlds[v].test(f)) {
            linked = false;
            break;
          }
        if (linked)
          relations[a].emplace_back(u, v);
      }
    }
  }

  PointedKripke state = bisim_reduce(prune_unreachable(
      PointedKripke(n_agents, std::move(worlds), std::move(relations),
                    *pointed_index)));

  for (const BeliefFormula &phi : problem.initial)
    if (!entails(state, phi))
      throw std::invalid_argument(
          "unsatisfiable initial specification: constructed structure does "
          "not entail every initial formula");
  return state;
}

} // namespace epiplan
