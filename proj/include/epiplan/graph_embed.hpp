#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epiplan/problem.hpp"

namespace epiplan {

/// Largest node identifier representable in the embedding: 48-bit space.
inline constexpr std::uint64_t kMaxNodeId = (std::uint64_t{1} << 48) - 1;

/// Labeled directed graph form of (state, goal) consumed by the regressor.
/// Node IDs live in reserved bands: agents occupy [0, |AG|), fluent leaves
/// [|AG|, |AG|+|F|), operator/marker nodes the next contiguous block, and
/// world nodes hash into the remainder up to kMaxNodeId. Edge labels are
/// agent indices for Kripke edges, g = |AG| for goal-fragment edges, and
/// g+1 for the pointed-marker edge; label_count = |AG| + 2 regardless of
/// which labels a particular graph uses.
struct StateGraph {
  struct Edge {
    std::uint32_t src = 0; // index into nodes
    std::uint32_t dst = 0;
    std::uint32_t label = 0;
    auto operator<=>(const Edge &) const = default;
  };

  std::vector<std::uint64_t> nodes; // sorted unique IDs
  std::vector<Edge> edges;          // sorted unique
  std::uint32_t agent_count = 0;
  std::uint32_t label_count = 0;
  std::uint32_t pointed = 0; // node index of the designated world

  bool operator==(const StateGraph &) const = default;
};

/// Hands out consecutive reserved-band IDs for operator nodes.
struct IdAllocator {
  std::uint64_t next = 0;
  std::uint64_t take() { return next++; }
};

/// Goal-conjunct subgraph: operator nodes plus directed edges (all carrying
/// the goal label) among operators, shared agent IDs, and fluent-leaf IDs.
/// `attachments` lists the IDs the enclosing root must point at.
struct GoalFragment {
  struct Edge {
    std::uint64_t src = 0;
    std::uint64_t dst = 0;
    std::uint32_t label = 0;
  };

  std::vector<std::uint64_t> operator_nodes;
  std::vector<Edge> edges;
  std::vector<std::uint64_t> attachments;
};

/// Recursive goal-formula graph construction. Fluent formulas expand their
/// top-level disjuncts: a single-literal disjunct links the parent straight
/// to the fluent leaf, a multi-fluent disjunct gets a shared intermediate
/// node with edges to every mentioned leaf. B_a psi allocates an operator
/// node linked bidirectionally with agent a; C_G psi links one operator
/// node with every agent in G; other connectives allocate an operator node
/// and recurse on their children. Literal polarity is not encoded: both f
/// and not f reference the same leaf.
GoalFragment encode_goal(const BeliefFormula &formula, std::uint32_t goal_label,
                         IdAllocator &ids);

struct EncodeOptions {
  bool include_goal = true;
  bool include_pointed_marker = true;
};

/// Serializes a reduced state plus the problem goal into a StateGraph.
/// World IDs come from world_node_id over (valuation, repetition), with the
/// salt bumped deterministically on (astronomically rare) collisions. Nodes
/// are sorted by ID and edges lexicographically, so structurally equal
/// states encode to equal graphs regardless of world storage order.
StateGraph encode_state(const PointedKripke &state,
                        const std::vector<BeliefFormula> &goal,
                        const EpistemicProblem &problem,
                        const EncodeOptions &options = {});

/// Flat tensors for the network: per-node scalar ID / kMaxNodeId, edge
/// endpoints as parallel index arrays, per-edge scalar label/(label_count-1).
struct FeatureArrays {
  std::vector<double> node_features;
  std::vector<std::uint32_t> edge_src;
  std::vector<std::uint32_t> edge_dst;
  std::vector<double> edge_attr;
};

FeatureArrays to_feature_arrays(const StateGraph &graph);

/// Dot-language export (node IDs as names, labels as edge attributes,
/// metadata in graph attributes). from_dot parses exactly this shape and
/// round-trips: from_dot(to_dot(g)) == g. Throws std::runtime_error on
/// malformed input.
std::string to_dot(const StateGraph &graph);
StateGraph from_dot(const std::string &text);

/// One dataset record per line: {"nodes":[...], "edges":[[src,dst,label],
/// ...], "pointed":int, "agent_count":int, "label_count":int,
/// "distance":int} with -1 encoding an unlabeled (unreachable) sample.
std::string to_jsonl_record(const StateGraph &graph,
                            std::optional<std::uint32_t> distance);

struct DatasetRecord {
  StateGraph graph;
  std::optional<std::uint32_t> distance;
};

DatasetRecord from_jsonl_record(const std::string &line);
std::vector<DatasetRecord> read_jsonl(std::istream &in);
void write_jsonl(std::ostream &out, const std::vector<DatasetRecord> &records);

} // namespace epiplan
