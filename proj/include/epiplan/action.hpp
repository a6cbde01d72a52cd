#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epiplan/kripke.hpp"

namespace epiplan {

/// Static observability partition of the agent set for one action. Agents
/// not listed as fully or partially observant are oblivious. Fully
/// observant agents learn the action's outcome; partially observant agents
/// learn only that it happened; oblivious agents believe nothing happened.
struct ObservabilityFrame {
  std::vector<Agent> fully_observant;
  std::vector<Agent> partially_observant;

  /// Normalizes (sorts, dedups) and rejects agents listed in both classes.
  static ObservabilityFrame make(std::vector<Agent> fully,
                                 std::vector<Agent> partially);

  bool is_fully_observant(Agent agent) const;
  bool is_partially_observant(Agent agent) const;
  bool is_oblivious(Agent agent) const {
    return !is_fully_observant(agent) && !is_partially_observant(agent);
  }

  /// Agents of [0, agent_count) in neither class, sorted.
  std::vector<Agent> oblivious(std::uint32_t agent_count) const;

  /// Largest agent index mentioned; 0 when the frame is empty.
  std::uint32_t max_agent_index() const;

  bool operator==(const ObservabilityFrame &) const = default;
};

/// One epistemic action. Ontic actions rewrite fluents; sensing actions
/// reveal one fluent's value; announcements reveal the value of a fluent
/// formula. An absent precondition means "always executable".
class Action {
public:
  enum class Kind : std::uint8_t { Ontic, Sensing, Announcement };

  /// Throws std::invalid_argument if a fluent occurs in `effects` with both
  /// polarities.
  static Action ontic(std::string name, std::vector<FluentLiteral> effects,
                      std::optional<BeliefFormula> precondition,
                      ObservabilityFrame frame);

  static Action sensing(std::string name, Fluent sensed,
                        std::optional<BeliefFormula> precondition,
                        ObservabilityFrame frame);

  /// Throws std::invalid_argument if `content` is not a fluent formula.
  static Action announcement(std::string name, BeliefFormula content,
                             std::optional<BeliefFormula> precondition,
                             ObservabilityFrame frame);

  const std::string &name() const { return m_name; }
  Kind kind() const { return m_kind; }
  const std::vector<FluentLiteral> &effects() const { return m_effects; }
  Fluent sensed() const { return m_sensed; }
  const BeliefFormula &content() const { return *m_content; }
  const std::optional<BeliefFormula> &precondition() const {
    return m_precondition;
  }
  const ObservabilityFrame &frame() const { return m_frame; }

  /// Largest fluent/agent index mentioned anywhere in the action, for
  /// validation against a problem's tables. The `any_*` flags record
  /// whether any fluent/agent is mentioned at all.
  void collect_bounds(std::uint32_t &max_fluent, std::uint32_t &max_agent,
                      bool &any_fluent, bool &any_agent) const;

  bool operator==(const Action &) const = default;

private:
  Action(std::string name, Kind kind, ObservabilityFrame frame)
      : m_name(std::move(name)), m_kind(kind), m_frame(std::move(frame)) {}

  std::string m_name;
  Kind m_kind;
  std::vector<FluentLiteral> m_effects;         // Ontic
  Fluent m_sensed;                              // Sensing
  std::optional<BeliefFormula> m_content;       // Announcement
  std::optional<BeliefFormula> m_precondition;
  ObservabilityFrame m_frame;
};

/// True when the action may fire in `state`: the precondition holds at the
/// pointed world, and for announcements the announced formula is actually
/// true there (announcements are truthful).
bool executable(const PointedKripke &state, const Action &action);

/// Product update of `state` with `action`, returned pruned and
/// bisimulation-reduced. Oblivious agents keep their old beliefs (their
/// edges lead into an unmodified copy of the old structure); fully
/// observant agents follow updated worlds restricted to outcome-consistent
/// pairs for sensing/announcement; partially observant agents follow
/// updated worlds without the outcome restriction.
/// Throws std::invalid_argument when the action is not executable or
/// mentions fluents/agents outside the state.
PointedKripke apply(const PointedKripke &state, const Action &action);

} // namespace epiplan
