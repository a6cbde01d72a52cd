#include "epiplan/action.hpp"

#include <algorithm>
#include <stdexcept>

namespace epiplan {

ObservabilityFrame ObservabilityFrame::make(std::vector<Agent> fully,
                                            std::vector<Agent> partially) {
  auto normalize = [](std::vector<Agent> &agents) {
    std::sort(agents.begin(), agents.end());
    agents.erase(std::unique(agents.begin(), agents.end()), agents.end());
  };
  normalize(fully);
  normalize(partially);
  for (Agent a : fully)
    if (std::binary_search(partially.begin(), partially.end(), a))
      throw std::invalid_argument(
          "agent cannot be both fully and partially observant");
  ObservabilityFrame frame;
  frame.fully_observant = std::move(fully);
  frame.partially_observant = std::move(partially);
  return frame;
}

bool ObservabilityFrame::is_fully_observant(Agent agent) const {
  return std::binary_search(fully_observant.begin(), fully_observant.end(),
                            agent);
}

bool ObservabilityFrame::is_partially_observant(Agent agent) const {
  return std::binary_search(partially_observant.begin(),
                            partially_observant.end(), agent);
}

std::vector<Agent> ObservabilityFrame::oblivious(
    std::uint32_t agent_count) const {
  std::vector<Agent> out;
  for (std::uint32_t i = 0; i < agent_count; ++i)
    if (is_oblivious(Agent{i}))
      out.push_back(Agent{i});
  return out;
}

std::uint32_t ObservabilityFrame::max_agent_index() const {
  std::uint32_t best = 0;
  for (Agent a : fully_observant)
    best = std::max(best, a.index);
  for (Agent a : partially_observant)
    best = std::max(best, a.index);
  return best;
}

Action Action::ontic(std::string name, std::vector<FluentLiteral> effects,
                     std::optional<BeliefFormula> precondition,
                     ObservabilityFrame frame) {
  std::sort(effects.begin(), effects.end());
  effects.erase(std::unique(effects.begin(), effects.end()), effects.end());
  for (std::size_t i = 1; i < effects.size(); ++i)
    if (effects[i].fluent == effects[i - 1].fluent)
      throw std::invalid_argument("ontic effect assigns a fluent twice: " +
                                  name);
  Action action(std::move(name), Kind::Ontic, std::move(frame));
  action.m_effects = std::move(effects);
  action.m_precondition = std::move(precondition);
  return action;
}

Action Action::sensing(std::string name, Fluent sensed,
                       std::optional<BeliefFormula> precondition,
                       ObservabilityFrame frame) {
  Action action(std::move(name), Kind::Sensing, std::move(frame));
  action.m_sensed = sensed;
  action.m_precondition = std::move(precondition);
  return action;
}

Action Action::announcement(std::string name, BeliefFormula content,
                            std::optional<BeliefFormula> precondition,
                            ObservabilityFrame frame) {
  if (!content.is_fluent_formula())
    throw std::invalid_argument(
        "announcement content must be a fluent formula: " + name);
  Action action(std::move(name), Kind::Announcement, std::move(frame));
  action.m_content = std::move(content);
  action.m_precondition = std::move(precondition);
  return action;
}

void Action::collect_bounds(std::uint32_t &max_fluent,
                            std::uint32_t &max_agent, bool &any_fluent,
                            bool &any_agent) const {
  for (const FluentLiteral &lit : m_effects) {
    any_fluent = true;
    max_fluent = std::max(max_fluent, lit.fluent.index);
  }
  if (m_kind == Kind::Sensing) {
    any_fluent = true;
    max_fluent = std::max(max_fluent, m_sensed.index);
  }
  if (m_content)
    m_content->collect_bounds(max_fluent, max_agent, any_fluent, any_agent);
  if (m_precondition)
    m_precondition->collect_bounds(max_fluent, max_agent, any_fluent,
                                   any_agent);
  if (!m_frame.fully_observant.empty() ||
      !m_frame.partially_observant.empty()) {
    any_agent = true;
    max_agent = std::max(max_agent, m_frame.max_agent_index());
  }
}

bool executable(const PointedKripke &state, const Action &action) {
  if (action.precondition() && !entails(state, *action.precondition()))
    return false;
  if (action.kind() == Action::Kind::Announcement)
    return eval_fluent_formula(state.world(state.pointed()).valuation,
                               action.content());
  return true;
}

namespace {

Valuation apply_effects(Valuation valuation,
                        const std::vector<FluentLiteral> &effects) {
  for (const FluentLiteral &lit : effects)
    valuation.set(lit.fluent.index, lit.positive);
  return valuation;
}

// Per-world action outcome for sensing/announcement; constant for ontic so
// fully observant edges are never filtered there.
bool world_outcome(const PointedKripke &state, std::uint32_t world,
                   const Action &action) {
  switch (action.kind()) {
  case Action::Kind::Sensing:
    return state.world(world).valuation.test(action.sensed().index);
  case Action::Kind::Announcement:
    return eval_fluent_formula(state.world(world).valuation, action.content());
  case Action::Kind::Ontic:
    return true;
  }
  throw std::logic_error("unhandled action kind");
}

} // namespace

PointedKripke apply(const PointedKripke &state, const Action &action) {
  {
    std::uint32_t max_fluent = 0, max_agent = 0;
    bool any_fluent = false, any_agent = false;
    action.collect_bounds(max_fluent, max_agent, any_fluent, any_agent);
    if (any_fluent && max_fluent >= state.fluent_count())
      throw std::invalid_argument("action mentions an unknown fluent");
    if (any_agent && max_agent >= state.agent_count())
      throw std::invalid_argument("action mentions an unknown agent");
  }
  if (!executable(state, action))
    throw std::invalid_argument("action is not executable here: " +
                                action.name());

  const std::uint32_t n = state.world_count();
  const bool filter_outcome = action.kind() != Action::Kind::Ontic;

  // Layout: updated copy of world w at index w, old copy at index n + w.
  std::vector<Valuation> valuations;
  valuations.reserve(2 * n);
  for (std::uint32_t w = 0; w < n; ++w) {
    Valuation v = state.world(w).valuation;
    if (action.kind() == Action::Kind::Ontic)
      v = apply_effects(std::move(v), action.effects());
    valuations.push_back(std::move(v));
  }
  for (std::uint32_t w = 0; w < n; ++w)
    valuations.push_back(state.world(w).valuation);

  std::vector<bool> outcome(n);
  for (std::uint32_t w = 0; w < n; ++w)
    outcome[w] = world_outcome(state, w, action);

  std::vector<PointedKripke::EdgeList> relations(state.agent_count());
  for (std::uint32_t i = 0; i < state.agent_count(); ++i) {
    const Agent agent{i};
    const bool fully = action.frame().is_fully_observant(agent);
    const bool partially = action.frame().is_partially_observant(agent);
    PointedKripke::EdgeList &edges = relations[i];
    for (std::uint32_t u = 0; u < n; ++u) {
      for (std::uint32_t v : state.successors(agent, u)) {
        // The old structure is always retained verbatim.
        edges.emplace_back(n + u, n + v);
        if (fully) {
          if (!filter_outcome || outcome[u] == outcome[v])
            edges.emplace_back(u, v);
        } else if (partially) {
          edges.emplace_back(u, v);
        } else {
          // Oblivious agents believe nothing happened: their edges from
          // updated worlds land in the old copies.
          edges.emplace_back(u, n + v);
        }
      }
    }
  }

  PointedKripke updated(state.agent_count(), std::move(valuations),
                        std::move(relations), state.pointed());
  return bisim_reduce(prune_unreachable(updated));
}

} // namespace epiplan
