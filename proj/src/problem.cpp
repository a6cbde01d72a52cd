#include "epiplan/problem.hpp"

#include <set>
#include <stdexcept>

namespace epiplan {

std::int64_t EpistemicProblem::find_fluent(const std::string &name) const {
  for (std::size_t i = 0; i < fluent_names.size(); ++i)
    if (fluent_names[i] == name)
      return static_cast<std::int64_t>(i);
  return -1;
}

std::int64_t EpistemicProblem::find_agent(const std::string &name) const {
  for (std::size_t i = 0; i < agent_names.size(); ++i)
    if (agent_names[i] == name)
      return static_cast<std::int64_t>(i);
  return -1;
}

void EpistemicProblem::validate() const {
  if (agent_names.empty())
    throw std::invalid_argument("a problem needs at least one agent");
  auto check_unique = [](const std::vector<std::string> &names,
                         const char *what) {
    std::set<std::string> seen(names.begin(), names.end());
    if (seen.size() != names.size())
      throw std::invalid_argument(std::string("duplicate ") + what + " name");
  };
  check_unique(fluent_names, "fluent");
  check_unique(agent_names, "agent");
  {
    std::set<std::string> seen;
    for (const Action &a : actions)
      if (!seen.insert(a.name()).second)
        throw std::invalid_argument("duplicate action name: " + a.name());
  }

  auto check_formula = [&](const BeliefFormula &formula, const char *where) {
    std::uint32_t max_fluent = 0, max_agent = 0;
    bool any_fluent = false, any_agent = false;
    formula.collect_bounds(max_fluent, max_agent, any_fluent, any_agent);
    if (any_fluent && max_fluent >= fluent_count())
      throw std::invalid_argument(std::string(where) +
                                  " references an unknown fluent");
    if (any_agent && max_agent >= agent_count())
      throw std::invalid_argument(std::string(where) +
                                  " references an unknown agent");
  };
  for (const BeliefFormula &f : initial)
    check_formula(f, "initial formula");
  for (const BeliefFormula &f : goal)
    check_formula(f, "goal formula");

  for (const Action &a : actions) {
    std::uint32_t max_fluent = 0, max_agent = 0;
    bool any_fluent = false, any_agent = false;
    a.collect_bounds(max_fluent, max_agent, any_fluent, any_agent);
    if (any_fluent && max_fluent >= fluent_count())
      throw std::invalid_argument("action " + a.name() +
                                  " references an unknown fluent");
    if (any_agent && max_agent >= agent_count())
      throw std::invalid_argument("action " + a.name() +
                                  " references an unknown agent");
  }
}

bool satisfies_goal(const PointedKripke &state,
                    const EpistemicProblem &problem) {
  for (const BeliefFormula &g : problem.goal)
    if (!entails(state, g))
      return false;
  return true;
}

std::vector<Successor> successors(const PointedKripke &state,
                                  const EpistemicProblem &problem) {
  std::vector<Successor> out;
  for (std::uint32_t i = 0; i < problem.actions.size(); ++i) {
    const Action &action = problem.actions[i];
    if (executable(state, action))
      out.push_back(Successor{i, apply(state, action)});
  }
  return out;
}

} // namespace epiplan
