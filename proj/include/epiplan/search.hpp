#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "epiplan/problem.hpp"

namespace epiplan {

struct SearchLimits {
  std::int64_t timeout_ms = 600000;
  std::uint64_t max_nodes = std::numeric_limits<std::uint64_t>::max();
  std::uint32_t max_depth = std::numeric_limits<std::uint32_t>::max();
};

enum class SearchStatus : std::uint8_t { Solved, Exhausted, Timeout };

struct SearchResult {
  SearchStatus status = SearchStatus::Exhausted;
  std::vector<std::string> plan; // action names, empty when not solved
  std::uint64_t nodes_expanded = 0;
  std::int64_t elapsed_ms = 0;
};

/// state -> estimated plan steps to the goal (non-negative)
using HeuristicFn = std::function<double(const PointedKripke &)>;

/// Breadth-first search from the problem's initial state. Solved plans are
/// shortest. Duplicate states are pruned by the canonical hash of their
/// reduced form. A goal-satisfying initial state reports zero expansions;
/// otherwise every state dequeued from the frontier counts as expanded.
SearchResult bfs(const EpistemicProblem &problem,
                 const SearchLimits &limits = {});

/// Best-first search on f = depth + h, ties broken FIFO by insertion order.
/// h values are rounded to 2 decimals for stable ordering. States are
/// closed once expanded (no reopening), so plans are only optimal for
/// admissible heuristics.
SearchResult astar(const EpistemicProblem &problem, const HeuristicFn &h,
                   const SearchLimits &limits = {});

struct DfsConfig {
  std::uint32_t depth_limit = 10;
  double base_discard_prob = 0.0; // in [0, 1)
  std::uint64_t node_cap = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t rng_seed = 0;
};

/// One explored state: reduced structure, DFS depth of first discovery, and
/// its canonical hash.
struct ExploredNode {
  PointedKripke state;
  std::uint32_t depth = 0;
  std::uint64_t hash = 0;
};

/// Explored fragment of the reachable state space: nodes plus the directed
/// transition edges observed between them (successor lists are sorted and
/// duplicate-free).
struct ExploredGraph {
  std::vector<ExploredNode> nodes;
  std::vector<std::vector<std::uint32_t>> edges;
};

/// Randomized depth-limited DFS. Successor order at every node is a seeded
/// random permutation; a branch out of a non-root node is discarded with
/// probability p(depth, n) = base_discard_prob * (depth / depth_limit) *
/// min(1, 2n / node_cap), where depth is the branching node's depth and n
/// the current node count. Duplicate reduced states are recorded once and
/// not re-expanded. Deterministic for a fixed seed.
ExploredGraph dfs_collect(const EpistemicProblem &problem,
                          const DfsConfig &cfg);

/// One regression target produced from an explored state; distance is the
/// shortest explored path to a goal state, capped, or nullopt when no
/// explored path reaches a goal.
struct LabeledSample {
  PointedKripke state;
  std::vector<BeliefFormula> goal;
  std::optional<std::uint32_t> distance;
};

/// Labels every explored node with its shortest in-graph distance to an
/// explored goal state (multi-source reverse BFS), capped at d_max.
std::vector<LabeledSample> assign_distances(const ExploredGraph &graph,
                                            const EpistemicProblem &problem,
                                            std::uint32_t d_max = 50);

/// Replays a plan from the initial state; true when every action is
/// executable in sequence and the final state satisfies the goal.
bool validate_plan(const EpistemicProblem &problem,
                   const std::vector<std::string> &plan);

} // namespace epiplan
