#pragma once

#include <cstdint>
#include <vector>

#include "epiplan/formula.hpp"
#include "epiplan/valuation.hpp"

namespace epiplan {

/// One possible world. Worlds sharing a valuation inside a structure are
/// told apart by repetition, which is contiguous from 0 per valuation and
/// assigned canonically (by refinement rank) at construction.
struct World {
  Valuation valuation;
  std::uint32_t repetition = 0;
};

/// Pointed Kripke structure: finite world set, one binary accessibility
/// relation per agent, and a designated actual world. The structure is
/// immutable after construction; per-agent successor lists are sorted and
/// duplicate-free.
class PointedKripke {
public:
  /// One (source, target) accessibility pair.
  using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

  /// Builds a structure from raw parts. Throws std::invalid_argument when
  /// the world set is empty, valuations disagree on width, the pointed
  /// index or any edge endpoint is out of range, or agent_count is zero.
  PointedKripke(std::uint32_t agent_count, std::vector<Valuation> valuations,
                std::vector<EdgeList> relations, std::uint32_t pointed);

  std::uint32_t agent_count() const { return m_agent_count; }
  std::uint32_t fluent_count() const { return m_worlds[0].valuation.size(); }
  std::uint32_t world_count() const {
    return static_cast<std::uint32_t>(m_worlds.size());
  }
  std::uint32_t pointed() const { return m_pointed; }

  const World &world(std::uint32_t index) const { return m_worlds.at(index); }
  const std::vector<World> &worlds() const { return m_worlds; }

  /// Sorted successor world indices of `world` under `agent`.
  const std::vector<std::uint32_t> &successors(Agent agent,
                                               std::uint32_t world) const {
    return m_adjacency.at(agent.index).at(world);
  }

  /// Edge list of one agent's relation, sorted by (source, target).
  EdgeList edges(Agent agent) const;

  std::uint64_t edge_count() const;

  bool operator==(const PointedKripke &other) const;

private:
  std::uint32_t m_agent_count;
  std::vector<World> m_worlds;
  // m_adjacency[agent][world] -> sorted successor indices
  std::vector<std::vector<std::vector<std::uint32_t>>> m_adjacency;
  std::uint32_t m_pointed;
};

/// Evaluates a propositional formula against a single valuation.
/// Throws std::invalid_argument if the formula contains Believes/Common
/// or mentions a fluent outside the valuation.
bool eval_fluent_formula(const Valuation &world, const BeliefFormula &formula);

/// Truth of `formula` at an arbitrary world of `state`.
bool entails_at(const PointedKripke &state, std::uint32_t world,
                const BeliefFormula &formula);

/// Truth of `formula` at the pointed world.
bool entails(const PointedKripke &state, const BeliefFormula &formula);

/// Canonical bisimulation ranks: worlds u, v get the same rank iff they are
/// bisimilar, and ranks are invariant under isomorphism (renumbering worlds
/// never changes which rank a world's valuation/behaviour gets). Ranks are
/// dense in [0, distinct_classes).
std::vector<std::uint32_t> refinement_ranks(const PointedKripke &state);

/// Quotient of `state` by bisimilarity, with worlds emitted in canonical
/// rank order. The result entails exactly the formulas `state` does and has
/// the minimum number of worlds among bisimilar structures.
PointedKripke bisim_reduce(const PointedKripke &state);

/// Drops worlds not reachable from the pointed world via zero or more steps
/// of any agent's relation; surviving worlds keep their relative order.
PointedKripke prune_unreachable(const PointedKripke &state);

/// 64-bit content hash of a bisimulation-reduced structure. Equal for
/// isomorphic reduced structures, and therefore equal for any two states
/// that reduce to the same quotient.
std::uint64_t canonical_hash(const PointedKripke &state);

/// Deterministic node identifier for embedding a world into a graph whose
/// low identifiers [0, reserved_band) are taken by agents, fluents and
/// operator nodes. The id is a hash of (valuation, repetition, salt) folded
/// into [reserved_band, max_id]; bump `salt` to resolve collisions.
std::uint64_t world_node_id(const World &world, std::uint64_t reserved_band,
                            std::uint64_t max_id, std::uint64_t salt = 0);

} // namespace epiplan
