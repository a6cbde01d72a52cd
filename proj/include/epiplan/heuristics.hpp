#pragma once

#include <memory>
#include <string>

#include "epiplan/neural.hpp"
#include "epiplan/problem.hpp"
#include "epiplan/search.hpp"

namespace epiplan {

/// Constant-zero estimate; reduces A* to uniform-cost search.
HeuristicFn zero_heuristic();

/// Number of unsatisfied goal conjuncts. Zero exactly on goal states, so it
/// shares the min-cost orientation of the other heuristics.
HeuristicFn subgoal_heuristic(const EpistemicProblem &problem);

/// Learned distance-to-goal estimate: encode the state with the problem
/// goal, run the regressor in eval mode, map the normalized output back to
/// plan steps, clip at zero. Values always land in [0, d_max]. The model is
/// shared immutably, so the returned function is safe to call concurrently.
HeuristicFn gnn_heuristic(std::shared_ptr<const RegressorModel> model,
                          const EpistemicProblem &problem);

/// Lookup by CLI name: "zero", "subgoal", or "gnn" (the latter requires a
/// model). Throws std::invalid_argument for unknown names or a missing
/// model.
HeuristicFn make_heuristic(const std::string &name,
                           const EpistemicProblem &problem,
                           std::shared_ptr<const RegressorModel> model = {});

} // namespace epiplan
