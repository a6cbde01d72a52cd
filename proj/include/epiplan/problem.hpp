#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epiplan/action.hpp"

namespace epiplan {

/// A complete planning problem: fluent and agent name tables, the action
/// repertoire, the initial belief specification I, and the goal G.
struct EpistemicProblem {
  std::vector<std::string> fluent_names;
  std::vector<std::string> agent_names;
  std::vector<Action> actions;
  std::vector<BeliefFormula> initial;
  std::vector<BeliefFormula> goal;

  std::uint32_t fluent_count() const {
    return static_cast<std::uint32_t>(fluent_names.size());
  }
  std::uint32_t agent_count() const {
    return static_cast<std::uint32_t>(agent_names.size());
  }

  /// Index of a named fluent/agent, or -1 when absent.
  std::int64_t find_fluent(const std::string &name) const;
  std::int64_t find_agent(const std::string &name) const;

  /// Throws std::invalid_argument on dangling indices, duplicate names, or
  /// an empty agent set.
  void validate() const;

  bool operator==(const EpistemicProblem &) const = default;
};

/// One expansion result: the action (by declaration index) and the reduced
/// state it leads to.
struct Successor {
  std::uint32_t action_index;
  PointedKripke state;
};

/// True iff the state entails every goal conjunct (vacuously true for an
/// empty goal list).
bool satisfies_goal(const PointedKripke &state,
                    const EpistemicProblem &problem);

/// All states reachable in one step, one entry per executable action, in
/// action declaration order.
std::vector<Successor> successors(const PointedKripke &state,
                                  const EpistemicProblem &problem);

} // namespace epiplan
