#include "epiplan/graph_embed.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace epiplan {
namespace {

std::uint64_t fluent_leaf_id(std::uint32_t agent_count, Fluent fluent) {
  return agent_count + fluent.index;
}

// top-level disjuncts of a fluent formula (the or-spine)
void collect_disjuncts(const BeliefFormula &formula,
                       std::vector<BeliefFormula> &out) {
  if (formula.kind() == BeliefFormula::Kind::Or) {
    collect_disjuncts(formula.lhs(), out);
    collect_disjuncts(formula.rhs(), out);
  } else {
    out.push_back(formula);
  }
}

void collect_fluents(const BeliefFormula &formula, std::set<Fluent> &out) {
  switch (formula.kind()) {
  case BeliefFormula::Kind::Literal:
    out.insert(formula.fluent());
    return;
  case BeliefFormula::Kind::Not:
    collect_fluents(formula.lhs(), out);
    return;
  case BeliefFormula::Kind::And:
  case BeliefFormula::Kind::Or:
  case BeliefFormula::Kind::Implies:
    collect_fluents(formula.lhs(), out);
    collect_fluents(formula.rhs(), out);
    return;
  default:
    throw std::logic_error("collect_fluents: epistemic operator");
  }
}

struct GoalBuilder {
  std::uint32_t agent_count;
  std::uint32_t goal_label;
  IdAllocator &ids;
  GoalFragment fragment;

  void connect(std::uint64_t src, std::uint64_t dst) {
    fragment.edges.push_back({src, dst, goal_label});
  }

  std::uint64_t fresh_operator() {
    std::uint64_t id = ids.take();
    fragment.operator_nodes.push_back(id);
    return id;
  }

  // Builds the subgraph for `formula` and returns the IDs the parent must
  // point at. Epistemic/propositional operators yield one operator node;
  // fluent formulas may attach several leaves or intermediates directly.
  std::vector<std::uint64_t> build(const BeliefFormula &formula) {
    if (formula.is_fluent_formula()) {
      std::vector<std::uint64_t> attach;
      std::vector<BeliefFormula> disjuncts;
      collect_disjuncts(formula, disjuncts);
      for (const BeliefFormula &disjunct : disjuncts) {
        std::set<Fluent> fluents;
        collect_fluents(disjunct, fluents);
        if (fluents.size() > 1) {
          std::uint64_t group = fresh_operator();
          attach.push_back(group);
          for (Fluent f : fluents)
            connect(group, fluent_leaf_id(agent_count, f));
        } else {
          for (Fluent f : fluents)
            attach.push_back(fluent_leaf_id(agent_count, f));
        }
      }
      return attach;
    }

    std::uint64_t node = fresh_operator();
    switch (formula.kind()) {
    case BeliefFormula::Kind::Believes: {
      std::uint64_t agent = formula.agent().index;
      connect(node, agent);
      connect(agent, node);
      attach_children(node, formula.lhs());
      break;
    }
    case BeliefFormula::Kind::Common: {
      for (Agent a : formula.group()) {
        connect(node, a.index);
        connect(a.index, node);
      }
      attach_children(node, formula.lhs());
      break;
    }
    case BeliefFormula::Kind::Not:
      attach_children(node, formula.lhs());
      break;
    case BeliefFormula::Kind::And:
    case BeliefFormula::Kind::Or:
    case BeliefFormula::Kind::Implies:
      attach_children(node, formula.lhs());
      attach_children(node, formula.rhs());
      break;
    default:
      throw std::logic_error("encode_goal: unexpected formula kind");
    }
    return {node};
  }

  void attach_children(std::uint64_t parent, const BeliefFormula &child) {
    for (std::uint64_t id : build(child))
      connect(parent, id);
  }
};

void require(bool condition, const char *message) {
  if (!condition)
    throw std::runtime_error(message);
}

} // namespace

GoalFragment encode_goal(const BeliefFormula &formula, std::uint32_t goal_label,
                         IdAllocator &ids) {
  // the goal label equals |AG|, which is also where the fluent band starts
  GoalBuilder builder{goal_label, goal_label, ids, {}};
  builder.fragment.attachments = builder.build(formula);
  return builder.fragment;
}

StateGraph encode_state(const PointedKripke &state,
                        const std::vector<BeliefFormula> &goal,
                        const EpistemicProblem &problem,
                        const EncodeOptions &options) {
  const std::uint32_t agent_count = problem.agent_count();
  const std::uint32_t fluent_count = problem.fluent_count();
  const std::uint32_t goal_label = agent_count;
  const std::uint32_t marker_label = agent_count + 1;

  IdAllocator ids{static_cast<std::uint64_t>(agent_count) + fluent_count};

  std::optional<std::uint64_t> goal_root;
  std::vector<GoalFragment> fragments;
  if (options.include_goal) {
    goal_root = ids.take();
    fragments.reserve(goal.size());
    for (const BeliefFormula &conjunct : goal)
      fragments.push_back(encode_goal(conjunct, goal_label, ids));
  }
  std::optional<std::uint64_t> marker;
  if (options.include_pointed_marker)
    marker = ids.take();

  const std::uint64_t reserved_band_end = ids.next;

  // world IDs: hash of (valuation, repetition); bump the salt until unique
  std::vector<std::uint64_t> world_ids(state.world_count());
  std::unordered_set<std::uint64_t> used;
  for (std::uint32_t w = 0; w < state.world_count(); ++w) {
    std::uint64_t salt = 0;
    std::uint64_t id;
    do {
      id = world_node_id(state.world(w), reserved_band_end, kMaxNodeId, salt);
      ++salt;
    } while (!used.insert(id).second);
    world_ids[w] = id;
  }

  // gather every referenced node ID
  std::set<std::uint64_t> node_set(world_ids.begin(), world_ids.end());
  using RawEdge = std::array<std::uint64_t, 3>; // src id, dst id, label
  std::vector<RawEdge> raw_edges;
  for (std::uint32_t a = 0; a < state.agent_count(); ++a)
    for (const auto &[u, v] : state.edges(Agent{a}))
      raw_edges.push_back({world_ids[u], world_ids[v], a});
  if (goal_root) {
    node_set.insert(*goal_root);
    for (const GoalFragment &fragment : fragments) {
      for (std::uint64_t id : fragment.attachments)
        raw_edges.push_back({*goal_root, id, goal_label});
      for (const GoalFragment::Edge &e : fragment.edges)
        raw_edges.push_back({e.src, e.dst, e.label});
    }
  }
  if (marker) {
    node_set.insert(*marker);
    raw_edges.push_back({*marker, world_ids[state.pointed()], marker_label});
  }
  for (const RawEdge &e : raw_edges) {
    node_set.insert(e[0]);
    node_set.insert(e[1]);
  }

  StateGraph graph;
  graph.agent_count = agent_count;
  graph.label_count = agent_count + 2;
  graph.nodes.assign(node_set.begin(), node_set.end());

  std::map<std::uint64_t, std::uint32_t> index_of;
  for (std::uint32_t i = 0; i < graph.nodes.size(); ++i)
    index_of.emplace(graph.nodes[i], i);

  graph.edges.reserve(raw_edges.size());
  for (const RawEdge &e : raw_edges)
    graph.edges.push_back({index_of.at(e[0]), index_of.at(e[1]),
                           static_cast<std::uint32_t>(e[2])});
  std::sort(graph.edges.begin(), graph.edges.end());
  graph.edges.erase(std::unique(graph.edges.begin(), graph.edges.end()),
                    graph.edges.end());

  graph.pointed = index_of.at(world_ids[state.pointed()]);
  return graph;
}

FeatureArrays to_feature_arrays(const StateGraph &graph) {
  FeatureArrays arrays;
  arrays.node_features.reserve(graph.nodes.size());
  for (std::uint64_t id : graph.nodes)
    arrays.node_features.push_back(static_cast<double>(id) /
                                   static_cast<double>(kMaxNodeId));
  arrays.edge_src.reserve(graph.edges.size());
  arrays.edge_dst.reserve(graph.edges.size());
  arrays.edge_attr.reserve(graph.edges.size());
  const double denom = graph.label_count > 1 ? graph.label_count - 1 : 1;
  for (const StateGraph::Edge &e : graph.edges) {
    arrays.edge_src.push_back(e.src);
    arrays.edge_dst.push_back(e.dst);
    arrays.edge_attr.push_back(e.label / denom);
  }
  return arrays;
}

std::string to_dot(const StateGraph &graph) {
  std::ostringstream out;
  out << "digraph {\n";
  out << "  graph [agent_count=" << graph.agent_count
      << ", label_count=" << graph.label_count
      << ", pointed=" << graph.pointed << "];\n";
  for (std::uint64_t id : graph.nodes)
    out << "  " << id << ";\n";
  for (const StateGraph::Edge &e : graph.edges)
    out << "  " << graph.nodes[e.src] << " -> " << graph.nodes[e.dst]
        << " [label=" << e.label << "];\n";
  out << "}\n";
  return out.str();
}

StateGraph from_dot(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  StateGraph graph;
  bool saw_meta = false;
  std::map<std::uint64_t, std::uint32_t> index_of;
  std::vector<std::array<std::uint64_t, 3>> raw_edges;

  auto parse_u64 = [](const std::string &s, std::size_t &pos) {
    require(pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])),
            "dot parse: expected number");
    std::uint64_t value = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
      value = value * 10 + (s[pos++] - '0');
    return value;
  };
  auto skip_ws = [](const std::string &s, std::size_t &pos) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  };

  std::uint64_t pointed_meta = 0;
  bool in_graph = false;
  while (std::getline(in, line)) {
    std::size_t pos = 0;
    skip_ws(line, pos);
    if (pos >= line.size())
      continue;
    if (line.compare(pos, 9, "digraph {") == 0) {
      in_graph = true;
      continue;
    }
    if (line[pos] == '}')
      break;
    require(in_graph, "dot parse: content outside digraph");
    if (line.compare(pos, 7, "graph [") == 0) {
      pos += 7;
      auto read_attr = [&](const char *name) {
        std::size_t at = line.find(name, pos);
        require(at != std::string::npos, "dot parse: missing graph attribute");
        std::size_t p = at + std::string(name).size();
        return parse_u64(line, p);
      };
      graph.agent_count = static_cast<std::uint32_t>(read_attr("agent_count="));
      graph.label_count = static_cast<std::uint32_t>(read_attr("label_count="));
      pointed_meta = read_attr("pointed=");
      saw_meta = true;
      continue;
    }
    std::uint64_t src = parse_u64(line, pos);
    skip_ws(line, pos);
    if (pos < line.size() && line[pos] == ';') {
      if (index_of.emplace(src, graph.nodes.size()).second)
        graph.nodes.push_back(src);
      continue;
    }
    require(line.compare(pos, 2, "->") == 0, "dot parse: expected -> or ;");
    pos += 2;
    skip_ws(line, pos);
    std::uint64_t dst = parse_u64(line, pos);
    skip_ws(line, pos);
    require(line.compare(pos, 7, "[label=") == 0, "dot parse: expected label");
    pos += 7;
    std::uint64_t label = parse_u64(line, pos);
    raw_edges.push_back({src, dst, label});
  }
  require(saw_meta, "dot parse: missing graph metadata");
  require(std::is_sorted(graph.nodes.begin(), graph.nodes.end()),
          "dot parse: node list not sorted");
  for (const auto &e : raw_edges) {
    auto src_it = index_of.find(e[0]);
    auto dst_it = index_of.find(e[1]);
    require(src_it != index_of.end() && dst_it != index_of.end(),
            "dot parse: edge endpoint missing from node list");
    graph.edges.push_back({src_it->second, dst_it->second,
                           static_cast<std::uint32_t>(e[2])});
  }
  require(pointed_meta < graph.nodes.size(), "dot parse: pointed out of range");
  graph.pointed = static_cast<std::uint32_t>(pointed_meta);
  return graph;
}

std::string to_jsonl_record(const StateGraph &graph,
                            std::optional<std::uint32_t> distance) {
  nlohmann::json record;
  record["nodes"] = graph.nodes;
  nlohmann::json edges = nlohmann::json::array();
  for (const StateGraph::Edge &e : graph.edges)
    edges.push_back({e.src, e.dst, e.label});
  record["edges"] = std::move(edges);
  record["pointed"] = graph.pointed;
  record["agent_count"] = graph.agent_count;
  record["label_count"] = graph.label_count;
  record["distance"] =
      distance ? static_cast<std::int64_t>(*distance) : std::int64_t{-1};
  return record.dump();
}

DatasetRecord from_jsonl_record(const std::string &line) {
  nlohmann::json record = nlohmann::json::parse(line);
  DatasetRecord out;
  out.graph.nodes = record.at("nodes").get<std::vector<std::uint64_t>>();
  for (const nlohmann::json &e : record.at("edges")) {
    require(e.is_array() && e.size() == 3, "dataset record: malformed edge");
    out.graph.edges.push_back({e[0].get<std::uint32_t>(),
                               e[1].get<std::uint32_t>(),
                               e[2].get<std::uint32_t>()});
  }
  out.graph.pointed = record.at("pointed").get<std::uint32_t>();
  out.graph.agent_count = record.at("agent_count").get<std::uint32_t>();
  out.graph.label_count = record.at("label_count").get<std::uint32_t>();
  std::int64_t distance = record.at("distance").get<std::int64_t>();
  if (distance >= 0)
    out.distance = static_cast<std::uint32_t>(distance);
  return out;
}

std::vector<DatasetRecord> read_jsonl(std::istream &in) {
  std::vector<DatasetRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    records.push_back(from_jsonl_record(line));
  }
  return records;
}

void write_jsonl(std::ostream &out, const std::vector<DatasetRecord> &records) {
  for (const DatasetRecord &record : records)
    out << to_jsonl_record(record.graph, record.distance) << "\n";
}

} // namespace epiplan
