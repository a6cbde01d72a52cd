#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "epiplan/domain_io.hpp"
#include "epiplan/graph_embed.hpp"
#include "epiplan/search.hpp"
#include "helpers.hpp"

using namespace epiplan;
using namespace test_helpers;

namespace {

// fragment edge lookup helper
bool has_edge(const GoalFragment &f, std::uint64_t src, std::uint64_t dst) {
  for (const GoalFragment::Edge &e : f.edges)
    if (e.src == src && e.dst == dst)
      return true;
  return false;
}

EpistemicProblem one_fluent_problem() {
  EpistemicProblem p;
  p.agent_names = {"a"};
  p.fluent_names = {"f"};
  p.goal.push_back(BeliefFormula::literal(Fluent{0}));
  p.validate();
  return p;
}

} // namespace

TEST_CASE("encode_goal mirrors the recursive construction") {
  // agent band [0,2), fluent leaves f->2, h->3, j->4 with two agents
  const std::uint32_t g = 2; // goal label = agent count

  SUBCASE("bare literal attaches the leaf directly") {
    IdAllocator ids{10};
    GoalFragment f = encode_goal(BeliefFormula::literal(Fluent{0}), g, ids);
    CHECK(f.operator_nodes.empty());
    CHECK(f.edges.empty());
    CHECK(f.attachments == std::vector<std::uint64_t>{2});
    CHECK(ids.next == 10); // nothing allocated
  }

  SUBCASE("negated literal shares the same leaf") {
    IdAllocator ids{10};
    GoalFragment f =
        encode_goal(BeliefFormula::literal(Fluent{1}, false), g, ids);
    CHECK(f.attachments == std::vector<std::uint64_t>{3});
    CHECK(f.operator_nodes.empty());
  }

  SUBCASE("belief operator links bidirectionally to its agent") {
    IdAllocator ids{10};
    GoalFragment f = encode_goal(
        BeliefFormula::believes(Agent{1}, BeliefFormula::literal(Fluent{0})),
        g, ids);
    REQUIRE(f.operator_nodes.size() == 1);
    std::uint64_t n = f.operator_nodes[0];
    CHECK(n == 10);
    CHECK(f.attachments == std::vector<std::uint64_t>{n});
    CHECK(f.edges.size() == 3);
    CHECK(has_edge(f, n, 1));
    CHECK(has_edge(f, 1, n));
    CHECK(has_edge(f, n, 2));
    for (const GoalFragment::Edge &e : f.edges)
      CHECK(e.label == g);
  }

  SUBCASE("common knowledge links every agent in the group") {
    IdAllocator ids{10};
    GoalFragment f = encode_goal(
        BeliefFormula::common({Agent{0}, Agent{1}},
                              BeliefFormula::literal(Fluent{0})),
        g, ids);
    REQUIRE(f.operator_nodes.size() == 1);
    std::uint64_t n = f.operator_nodes[0];
    CHECK(f.edges.size() == 5);
    CHECK(has_edge(f, n, 0));
    CHECK(has_edge(f, 0, n));
    CHECK(has_edge(f, n, 1));
    CHECK(has_edge(f, 1, n));
    CHECK(has_edge(f, n, 2));
  }

  SUBCASE("conjunction of fluents shares one intermediate node") {
    IdAllocator ids{10};
    GoalFragment f = encode_goal(
        BeliefFormula::conjunction(BeliefFormula::literal(Fluent{0}),
                                   BeliefFormula::literal(Fluent{1})),
        g, ids);
    REQUIRE(f.operator_nodes.size() == 1);
    std::uint64_t group = f.operator_nodes[0];
    CHECK(f.attachments == std::vector<std::uint64_t>{group});
    CHECK(f.edges.size() == 2);
    CHECK(has_edge(f, group, 2));
    CHECK(has_edge(f, group, 3));
  }

  SUBCASE("disjunction of literals attaches each leaf") {
    IdAllocator ids{10};
    GoalFragment f = encode_goal(
        BeliefFormula::disjunction(BeliefFormula::literal(Fluent{0}),
                                   BeliefFormula::literal(Fluent{1})),
        g, ids);
    CHECK(f.operator_nodes.empty());
    CHECK(f.edges.empty());
    CHECK(f.attachments == std::vector<std::uint64_t>{2, 3});
  }

  SUBCASE("mixed or-of-and expands disjuncts independently") {
    IdAllocator ids{10};
    BeliefFormula phi = BeliefFormula::disjunction(
        BeliefFormula::conjunction(BeliefFormula::literal(Fluent{0}),
                                   BeliefFormula::literal(Fluent{1})),
        BeliefFormula::literal(Fluent{2}));
    GoalFragment f = encode_goal(phi, g, ids);
    REQUIRE(f.operator_nodes.size() == 1);
    std::uint64_t group = f.operator_nodes[0];
    CHECK(f.attachments == std::vector<std::uint64_t>{group, 4});
    CHECK(f.edges.size() == 2);
  }

  SUBCASE("negated belief keeps an operator for the negation") {
    IdAllocator ids{10};
    BeliefFormula phi = BeliefFormula::negation(
        BeliefFormula::believes(Agent{0}, BeliefFormula::literal(Fluent{0})));
    GoalFragment f = encode_goal(phi, g, ids);
    REQUIRE(f.operator_nodes.size() == 2);
    std::uint64_t outer = f.operator_nodes[0];
    std::uint64_t inner = f.operator_nodes[1];
    CHECK(f.attachments == std::vector<std::uint64_t>{outer});
    CHECK(has_edge(f, outer, inner));
    CHECK(has_edge(f, inner, 0));
    CHECK(has_edge(f, 0, inner));
    CHECK(has_edge(f, inner, 2));
  }
}

TEST_CASE("encode_state builds the expected small graphs") {
  SUBCASE("single world, goal [f]: four nodes and three edges") {
    EpistemicProblem p = one_fluent_problem();
    PointedKripke init = initial_state(p);
    REQUIRE(init.world_count() == 1);
    StateGraph graph = encode_state(init, p.goal, p);

    CHECK(graph.nodes.size() == 4);
    CHECK(graph.edges.size() == 3);
    CHECK(graph.agent_count == 1);
    CHECK(graph.label_count == 3);

    // reserved IDs: fluent leaf 1, goal root 2, marker 3; world above 4
    CHECK(graph.nodes[0] == 1);
    CHECK(graph.nodes[1] == 2);
    CHECK(graph.nodes[2] == 3);
    CHECK(graph.nodes[3] >= 4);
    CHECK(graph.nodes[3] <= kMaxNodeId);
    CHECK(graph.pointed == 3);

    std::uint32_t world = 3, leaf = 0, root = 1, marker = 2;
    CHECK(graph.edges[0] == StateGraph::Edge{root, leaf, 1});    // goal
    CHECK(graph.edges[1] == StateGraph::Edge{marker, world, 2}); // marker
    CHECK(graph.edges[2] == StateGraph::Edge{world, world, 0});  // self loop
  }

  SUBCASE("ablation flags drop the goal and marker parts") {
    EpistemicProblem p = one_fluent_problem();
    PointedKripke init = initial_state(p);

    EncodeOptions no_marker;
    no_marker.include_pointed_marker = false;
    StateGraph graph = encode_state(init, p.goal, p, no_marker);
    CHECK(graph.nodes.size() == 3); // leaf, root, world
    CHECK(graph.edges.size() == 2);

    EncodeOptions bare;
    bare.include_goal = false;
    bare.include_pointed_marker = false;
    graph = encode_state(init, p.goal, p, bare);
    CHECK(graph.nodes.size() == 1);
    CHECK(graph.edges.size() == 1); // just the self loop
    CHECK(graph.pointed == 0);
  }

  SUBCASE("agent nodes appear when the goal mentions agents") {
    EpistemicProblem p = builtin_problem("coinbox", {{"tier", "2"}});
    PointedKripke init = initial_state(p);
    StateGraph graph = encode_state(init, p.goal, p);

    CHECK(graph.agent_count == 3);
    CHECK(graph.label_count == 5);
    // tier-2 goal is knows-whether for a1 -> agent node 0 materialized
    CHECK(std::find(graph.nodes.begin(), graph.nodes.end(), 0) !=
          graph.nodes.end());
    for (const StateGraph::Edge &e : graph.edges)
      CHECK(e.label < graph.label_count);
    // at least one world node sits above the reserved band
    CHECK(graph.nodes.back() > graph.agent_count + p.fluent_count());
  }

  SUBCASE("world storage order does not matter") {
    StateSpec spec;
    spec.agents = 1;
    spec.width = 1;
    spec.worlds = {{}, {0}};
    spec.edges = {{{0, 0}, {0, 1}, {1, 1}}};
    spec.pointed = 0;
    PointedKripke s1 = make_state(spec);

    StateSpec flipped;
    flipped.agents = 1;
    flipped.width = 1;
    flipped.worlds = {{0}, {}};
    flipped.edges = {{{1, 1}, {1, 0}, {0, 0}}};
    flipped.pointed = 1;
    PointedKripke s2 = make_state(flipped);

    EpistemicProblem p = one_fluent_problem();
    CHECK(encode_state(s1, p.goal, p) == encode_state(s2, p.goal, p));
  }

  SUBCASE("distinct states encode to distinct graphs") {
    EpistemicProblem p = builtin_problem("coinbox", {{"tier", "2"}});
    DfsConfig cfg;
    cfg.depth_limit = 4;
    cfg.node_cap = 40;
    ExploredGraph explored = dfs_collect(p, cfg);
    REQUIRE(explored.nodes.size() >= 9);
    std::vector<StateGraph> graphs;
    for (const ExploredNode &node : explored.nodes)
      graphs.push_back(encode_state(node.state, p.goal, p));
    for (std::size_t i = 0; i < graphs.size(); ++i)
      for (std::size_t j = i + 1; j < graphs.size(); ++j) {
        CAPTURE(i);
        CAPTURE(j);
        CHECK(graphs[i] != graphs[j]);
      }
  }
}

TEST_CASE("feature arrays normalize IDs and labels into [0,1]") {
  SUBCASE("boundary IDs") {
    StateGraph graph;
    graph.nodes = {0, kMaxNodeId};
    graph.agent_count = 2;
    graph.label_count = 4;
    graph.edges = {{0, 1, 0}, {1, 0, 1}, {0, 0, 2}, {1, 1, 3}};
    FeatureArrays arrays = to_feature_arrays(graph);
    REQUIRE(arrays.node_features.size() == 2);
    CHECK(arrays.node_features[0] == 0.0);
    CHECK(arrays.node_features[1] == 1.0);
    REQUIRE(arrays.edge_attr.size() == 4);
    CHECK(arrays.edge_attr[0] == 0.0);
    CHECK(arrays.edge_attr[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(arrays.edge_attr[2] == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(arrays.edge_attr[3] == 1.0);
    CHECK(arrays.edge_src == std::vector<std::uint32_t>{0, 1, 0, 1});
    CHECK(arrays.edge_dst == std::vector<std::uint32_t>{1, 0, 0, 1});
  }

  SUBCASE("all values bounded on a real encoding") {
    EpistemicProblem p = builtin_problem("selective");
    StateGraph graph = encode_state(initial_state(p), p.goal, p);
    FeatureArrays arrays = to_feature_arrays(graph);
    for (double v : arrays.node_features) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (double v : arrays.edge_attr) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("dot export is deterministic and round-trips") {
  SUBCASE("single isolated node") {
    StateGraph graph;
    graph.nodes = {42};
    graph.agent_count = 1;
    graph.label_count = 3;
    graph.pointed = 0;
    std::string dot = to_dot(graph);
    CHECK(dot.find("digraph {") != std::string::npos);
    CHECK(dot.find("42;") != std::string::npos);
    CHECK(from_dot(dot) == graph);
  }

  SUBCASE("coinbox initial encoding") {
    EpistemicProblem p = builtin_problem("coinbox", {{"tier", "2"}});
    StateGraph graph = encode_state(initial_state(p), p.goal, p);
    std::string dot = to_dot(graph);
    CHECK(to_dot(graph) == dot); // byte-stable
    StateGraph back = from_dot(dot);
    CHECK(back == graph);
  }

  SUBCASE("malformed input is rejected") {
    CHECK_THROWS_AS(from_dot("digraph { 1 -> }"), std::runtime_error);
    CHECK_THROWS_AS(from_dot("digraph { 1; }"), std::runtime_error);
  }
}

TEST_CASE("jsonl records round-trip states and labels") {
  EpistemicProblem p = builtin_problem("coinbox", {{"tier", "2"}});
  StateGraph graph = encode_state(initial_state(p), p.goal, p);

  SUBCASE("labeled record") {
    std::string line = to_jsonl_record(graph, 7);
    DatasetRecord back = from_jsonl_record(line);
    CHECK(back.graph == graph);
    CHECK(back.distance == 7u);
    CHECK(line.find("\"distance\":7") != std::string::npos);
  }

  SUBCASE("unreachable encodes as -1") {
    std::string line = to_jsonl_record(graph, std::nullopt);
    CHECK(line.find("\"distance\":-1") != std::string::npos);
    DatasetRecord back = from_jsonl_record(line);
    CHECK_FALSE(back.distance.has_value());
  }

  SUBCASE("stream round-trip preserves order") {
    DfsConfig cfg;
    cfg.depth_limit = 2;
    ExploredGraph explored = dfs_collect(p, cfg);
    std::vector<LabeledSample> samples = assign_distances(explored, p);
    std::vector<DatasetRecord> records;
    for (const LabeledSample &s : samples)
      records.push_back({encode_state(s.state, p.goal, p), s.distance});
    std::ostringstream out;
    write_jsonl(out, records);
    std::istringstream in(out.str());
    std::vector<DatasetRecord> back = read_jsonl(in);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(back[i].graph == records[i].graph);
      CHECK(back[i].distance == records[i].distance);
    }
  }
}
