#include "epiplan/heuristics.hpp"

#include <algorithm>
#include <stdexcept>

#include "epiplan/graph_embed.hpp"

namespace epiplan {

HeuristicFn zero_heuristic() {
  return [](const PointedKripke &) { return 0.0; };
}

HeuristicFn subgoal_heuristic(const EpistemicProblem &problem) {
  return [goal = problem.goal](const PointedKripke &state) {
    double unsatisfied = 0;
    for (const BeliefFormula &conjunct : goal)
      if (!entails(state, conjunct))
        ++unsatisfied;
    return unsatisfied;
  };
}

HeuristicFn gnn_heuristic(std::shared_ptr<const RegressorModel> model,
                          const EpistemicProblem &problem) {
  if (!model)
    throw std::invalid_argument("gnn heuristic requires a model");
  return [model, problem](const PointedKripke &state) {
    const StateGraph graph = encode_state(state, problem.goal, problem);
    const Batch batch = make_batch(graph);
    const double prediction = predict(*model, batch)[0];
    const double steps = denormalize_distance(prediction, model->prep);
    return std::max(0.0, steps);
  };
}

HeuristicFn make_heuristic(const std::string &name,
                           const EpistemicProblem &problem,
                           std::shared_ptr<const RegressorModel> model) {
  if (name == "zero")
    return zero_heuristic();
  if (name == "subgoal")
    return subgoal_heuristic(problem);
  if (name == "gnn")
    return gnn_heuristic(std::move(model), problem);
  throw std::invalid_argument("unknown heuristic: " + name);
}

} // namespace epiplan
