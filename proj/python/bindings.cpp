// Python surface of the planner: problem construction and parsing, state
// inspection and entailment, the two searches, dataset generation, regressor
// training and inference, aggregate metrics, and the CLI entry point.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "epiplan/cli.hpp"
#include "epiplan/domain_io.hpp"
#include "epiplan/graph_embed.hpp"
#include "epiplan/heuristics.hpp"
#include "epiplan/kripke.hpp"
#include "epiplan/metrics.hpp"
#include "epiplan/neural.hpp"
#include "epiplan/problem.hpp"
#include "epiplan/search.hpp"

namespace py = pybind11;
using namespace epiplan;

namespace {

std::map<std::string, std::string> to_params(const py::dict &params) {
  std::map<std::string, std::string> out;
  for (const auto &item : params)
    out[py::str(item.first).cast<std::string>()] =
        py::str(item.second).cast<std::string>();
  return out;
}

EpistemicProblem parse_or_raise(const std::string &text) {
  ParseResult result = parse_problem(DomainSource::from_text(text));
  if (!result.ok()) {
    std::ostringstream msg;
    for (const Diagnostic &d : result.diagnostics)
      msg << d.to_string() << '\n';
    throw py::value_error(msg.str());
  }
  return std::move(*result.problem);
}

SearchLimits make_limits(std::int64_t timeout_ms, std::uint64_t max_nodes,
                         std::uint32_t max_depth) {
  SearchLimits limits;
  limits.timeout_ms = timeout_ms;
  limits.max_nodes = max_nodes;
  limits.max_depth = max_depth;
  return limits;
}

using PySample = std::pair<StateGraph, std::optional<std::uint32_t>>;

std::shared_ptr<RegressorModel>
train_from_samples(const std::vector<PySample> &samples, std::uint32_t node_emb,
                   std::uint32_t edge_emb, std::uint32_t hidden,
                   std::uint32_t blocks, std::uint32_t epochs,
                   std::uint32_t batch, std::uint64_t seed, double lr,
                   double weight_decay, double balance_cap,
                   std::uint32_t d_max, std::vector<double> &losses) {
  std::vector<DatasetRecord> records;
  records.reserve(samples.size());
  for (const PySample &s : samples)
    records.push_back({s.first, s.second});
  PrepConfig prep;
  prep.d_max = d_max;
  prep.p_m = balance_cap;
  TrainingSet data = prepare_dataset(records, prep, seed);
  ModelDims dims{node_emb, edge_emb, hidden, blocks};
  auto model = std::make_shared<RegressorModel>(make_model(seed, dims, prep));
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = batch;
  cfg.seed = seed;
  AdamWConfig opt;
  opt.lr = lr;
  opt.weight_decay = weight_decay;
  losses = train(*model, data, cfg, opt).epoch_mse;
  return model;
}

} // namespace

PYBIND11_MODULE(_epiplan, m) {
  m.doc() = "Multi-agent epistemic planner with a learned search heuristic";

  py::class_<BeliefFormula>(m, "Formula")
      .def_static(
          "literal",
          [](std::uint32_t fluent, bool positive) {
            return BeliefFormula::literal(Fluent{fluent}, positive);
          },
          py::arg("fluent"), py::arg("positive") = true)
      .def_static("negation", &BeliefFormula::negation, py::arg("inner"))
      .def_static("conjunction", &BeliefFormula::conjunction, py::arg("lhs"),
                  py::arg("rhs"))
      .def_static("disjunction", &BeliefFormula::disjunction, py::arg("lhs"),
                  py::arg("rhs"))
      .def_static("implication", &BeliefFormula::implication, py::arg("lhs"),
                  py::arg("rhs"))
      .def_static(
          "believes",
          [](std::uint32_t agent, const BeliefFormula &inner) {
            return BeliefFormula::believes(Agent{agent}, inner);
          },
          py::arg("agent"), py::arg("inner"))
      .def_static(
          "common",
          [](const std::vector<std::uint32_t> &group,
             const BeliefFormula &inner) {
            std::vector<Agent> agents;
            for (std::uint32_t i : group)
              agents.push_back(Agent{i});
            return BeliefFormula::common(std::move(agents), inner);
          },
          py::arg("group"), py::arg("inner"));

  py::class_<EpistemicProblem>(m, "Problem")
      .def_property_readonly(
          "fluent_names",
          [](const EpistemicProblem &p) { return p.fluent_names; })
      .def_property_readonly(
          "agent_names",
          [](const EpistemicProblem &p) { return p.agent_names; })
      .def_property_readonly("action_names",
                             [](const EpistemicProblem &p) {
                               std::vector<std::string> names;
                               for (const Action &a : p.actions)
                                 names.push_back(a.name());
                               return names;
                             })
      .def_property_readonly(
          "goal", [](const EpistemicProblem &p) { return p.goal; })
      .def("__eq__", [](const EpistemicProblem &a,
                        const EpistemicProblem &b) { return a == b; })
      .def("__repr__", [](const EpistemicProblem &p) {
        return "<Problem: " + std::to_string(p.fluent_count()) + " fluents, " +
               std::to_string(p.agent_count()) + " agents, " +
               std::to_string(p.actions.size()) + " actions>";
      });

  py::class_<PointedKripke>(m, "State")
      .def_property_readonly("world_count", &PointedKripke::world_count)
      .def_property_readonly("agent_count", &PointedKripke::agent_count)
      .def_property_readonly("fluent_count", &PointedKripke::fluent_count)
      .def_property_readonly("pointed", &PointedKripke::pointed)
      .def("__eq__", [](const PointedKripke &a,
                        const PointedKripke &b) { return a == b; })
      .def("__repr__", [](const PointedKripke &s) {
        return "<State: " + std::to_string(s.world_count()) + " worlds, " +
               std::to_string(s.agent_count()) + " agents>";
      });

  py::class_<StateGraph>(m, "Graph")
      .def_property_readonly(
          "nodes", [](const StateGraph &g) { return g.nodes; })
      .def_property_readonly("edges",
                             [](const StateGraph &g) {
                               std::vector<std::tuple<std::uint32_t,
                                                      std::uint32_t,
                                                      std::uint32_t>>
                                   out;
                               for (const StateGraph::Edge &e : g.edges)
                                 out.emplace_back(e.src, e.dst, e.label);
                               return out;
                             })
      .def_readonly("agent_count", &StateGraph::agent_count)
      .def_readonly("label_count", &StateGraph::label_count)
      .def_readonly("pointed", &StateGraph::pointed)
      .def("to_dot", &to_dot)
      .def("__eq__",
           [](const StateGraph &a, const StateGraph &b) { return a == b; })
      .def("__repr__", [](const StateGraph &g) {
        return "<Graph: " + std::to_string(g.nodes.size()) + " nodes, " +
               std::to_string(g.edges.size()) + " edges>";
      });

  py::class_<RegressorModel, std::shared_ptr<RegressorModel>>(m, "Model")
      .def_property_readonly(
          "node_emb",
          [](const RegressorModel &m_) { return m_.dims.node_emb; })
      .def_property_readonly(
          "edge_emb",
          [](const RegressorModel &m_) { return m_.dims.edge_emb; })
      .def_property_readonly(
          "hidden", [](const RegressorModel &m_) { return m_.dims.hidden; })
      .def_property_readonly(
          "blocks",
          [](const RegressorModel &m_) { return m_.dims.blocks; })
      .def_property_readonly(
          "d_max", [](const RegressorModel &m_) { return m_.prep.d_max; })
      .def("__repr__", [](const RegressorModel &m_) {
        return "<Model: dims " + std::to_string(m_.dims.node_emb) + "/" +
               std::to_string(m_.dims.edge_emb) + "/" +
               std::to_string(m_.dims.hidden) + "/" +
               std::to_string(m_.dims.blocks) + ">";
      });

  py::class_<SearchResult>(m, "SearchResult")
      .def_property_readonly(
          "status",
          [](const SearchResult &r) { return std::string(status_name(r.status)); })
      .def_readonly("plan", &SearchResult::plan)
      .def_readonly("nodes_expanded", &SearchResult::nodes_expanded)
      .def_readonly("elapsed_ms", &SearchResult::elapsed_ms)
      .def("__repr__", [](const SearchResult &r) {
        return "<SearchResult: " + std::string(status_name(r.status)) +
               ", plan length " + std::to_string(r.plan.size()) + ", " +
               std::to_string(r.nodes_expanded) + " expanded>";
      });

  // problem construction
  m.def("parse_problem", &parse_or_raise, py::arg("text"),
        "Parse problem text; raises ValueError with diagnostics on failure.");
  m.def("serialize_problem", &serialize_problem, py::arg("problem"));
  m.def(
      "builtin_problem",
      [](const std::string &name, const py::dict &params) {
        return builtin_problem(name, to_params(params));
      },
      py::arg("name"), py::arg("params") = py::dict());
  m.def("load_instance", &load_instance, py::arg("spec"),
        "File path, or builtin shorthand like 'coinbox:tier=2'.");

  // states and entailment
  m.def("initial_state", &initial_state, py::arg("problem"));
  m.def("entails",
        py::overload_cast<const PointedKripke &, const BeliefFormula &>(
            &entails),
        py::arg("state"), py::arg("formula"));
  m.def("satisfies_goal", &satisfies_goal, py::arg("state"),
        py::arg("problem"));
  m.def("bisim_reduce", &bisim_reduce, py::arg("state"));
  m.def("canonical_hash", &canonical_hash, py::arg("state"));
  m.def(
      "successor_states",
      [](const PointedKripke &state, const EpistemicProblem &problem) {
        std::vector<std::pair<std::string, PointedKripke>> out;
        for (const Successor &s : successors(state, problem))
          out.emplace_back(problem.actions[s.action_index].name(), s.state);
        return out;
      },
      py::arg("state"), py::arg("problem"),
      "One (action name, state) pair per executable action.");

  // search
  m.def(
      "bfs",
      [](const EpistemicProblem &problem, std::int64_t timeout_ms,
         std::uint64_t max_nodes, std::uint32_t max_depth) {
        return bfs(problem, make_limits(timeout_ms, max_nodes, max_depth));
      },
      py::arg("problem"), py::arg("timeout_ms") = 600000,
      py::arg("max_nodes") = std::numeric_limits<std::uint64_t>::max(),
      py::arg("max_depth") = std::numeric_limits<std::uint32_t>::max());
  m.def(
      "astar",
      [](const EpistemicProblem &problem, const std::string &heuristic,
         std::shared_ptr<RegressorModel> model, std::int64_t timeout_ms,
         std::uint64_t max_nodes, std::uint32_t max_depth) {
        return astar(problem,
                     make_heuristic(heuristic, problem, std::move(model)),
                     make_limits(timeout_ms, max_nodes, max_depth));
      },
      py::arg("problem"), py::arg("heuristic") = "zero",
      py::arg("model") = nullptr, py::arg("timeout_ms") = 600000,
      py::arg("max_nodes") = std::numeric_limits<std::uint64_t>::max(),
      py::arg("max_depth") = std::numeric_limits<std::uint32_t>::max());
  m.def("validate_plan", &validate_plan, py::arg("problem"), py::arg("plan"));

  // graph encoding and datasets
  m.def(
      "encode_state",
      [](const PointedKripke &state, const EpistemicProblem &problem,
         bool include_goal, bool include_pointed_marker) {
        EncodeOptions options;
        options.include_goal = include_goal;
        options.include_pointed_marker = include_pointed_marker;
        return encode_state(state, problem.goal, problem, options);
      },
      py::arg("state"), py::arg("problem"), py::arg("include_goal") = true,
      py::arg("include_pointed_marker") = true);
  m.def("from_dot", &from_dot, py::arg("text"));
  m.def(
      "generate_dataset",
      [](const EpistemicProblem &problem, std::uint32_t depth,
         double discard_prob, std::uint64_t max_nodes, std::uint64_t seed,
         std::uint32_t d_max) {
        DfsConfig cfg;
        cfg.depth_limit = depth;
        cfg.base_discard_prob = discard_prob;
        cfg.node_cap = max_nodes;
        cfg.rng_seed = seed;
        ExploredGraph graph = dfs_collect(problem, cfg);
        std::vector<PySample> out;
        for (const LabeledSample &s : assign_distances(graph, problem, d_max))
          out.emplace_back(encode_state(s.state, s.goal, problem),
                           s.distance);
        return out;
      },
      py::arg("problem"), py::arg("depth") = 10,
      py::arg("discard_prob") = 0.0,
      py::arg("max_nodes") = std::numeric_limits<std::uint64_t>::max(),
      py::arg("seed") = 0, py::arg("d_max") = 50,
      "Randomized exploration; one (graph, distance-or-None) per state.");
  m.def(
      "read_jsonl",
      [](const std::string &path) {
        std::ifstream in(path, std::ios::binary);
        if (!in.good())
          throw std::runtime_error("cannot read " + path);
        std::vector<PySample> out;
        for (const DatasetRecord &r : read_jsonl(in))
          out.emplace_back(r.graph, r.distance);
        return out;
      },
      py::arg("path"));
  m.def(
      "write_jsonl",
      [](const std::string &path, const std::vector<PySample> &samples) {
        std::vector<DatasetRecord> records;
        for (const PySample &s : samples)
          records.push_back({s.first, s.second});
        std::ofstream out(path, std::ios::binary);
        if (!out.good())
          throw std::runtime_error("cannot write " + path);
        write_jsonl(out, records);
      },
      py::arg("path"), py::arg("samples"));

  // regressor
  m.def(
      "train_model",
      [](const std::vector<PySample> &samples, std::uint32_t node_emb,
         std::uint32_t edge_emb, std::uint32_t hidden, std::uint32_t blocks,
         std::uint32_t epochs, std::uint32_t batch, std::uint64_t seed,
         double lr, double weight_decay, double balance_cap,
         std::uint32_t d_max) {
        std::vector<double> losses;
        std::shared_ptr<RegressorModel> model = train_from_samples(
            samples, node_emb, edge_emb, hidden, blocks, epochs, batch, seed,
            lr, weight_decay, balance_cap, d_max, losses);
        return py::make_tuple(model, losses);
      },
      py::arg("samples"), py::arg("node_emb") = 64, py::arg("edge_emb") = 32,
      py::arg("hidden") = 128, py::arg("blocks") = 3, py::arg("epochs") = 100,
      py::arg("batch") = 64, py::arg("seed") = 0, py::arg("lr") = 1e-3,
      py::arg("weight_decay") = 1e-2, py::arg("balance_cap") = 0.5,
      py::arg("d_max") = 50,
      "Returns (model, per-epoch training MSE). Unlabeled samples are "
      "dropped and distance bins are capped before training.");
  m.def(
      "predict_distance",
      [](const RegressorModel &model, const StateGraph &graph) {
        double pred = predict(model, make_batch(graph))[0];
        return denormalize_distance(pred, model.prep);
      },
      py::arg("model"), py::arg("graph"),
      "Estimated plan steps to the goal (denormalized).");
  m.def(
      "save_model",
      [](const std::shared_ptr<RegressorModel> &model,
         const std::string &path) { save_model(*model, path); },
      py::arg("model"), py::arg("path"));
  m.def(
      "load_model",
      [](const std::string &path) {
        return std::make_shared<RegressorModel>(load_model(path));
      },
      py::arg("path"));
  m.def(
      "normalize_distance",
      [](std::uint32_t d, std::uint32_t d_max) {
        PrepConfig cfg;
        cfg.d_max = d_max;
        return normalize_distance(d, cfg);
      },
      py::arg("d"), py::arg("d_max") = 50);
  m.def(
      "denormalize_distance",
      [](double nd, std::uint32_t d_max) {
        PrepConfig cfg;
        cfg.d_max = d_max;
        return denormalize_distance(nd, cfg);
      },
      py::arg("nd"), py::arg("d_max") = 50);

  // aggregate metrics
  m.def("iqm", &iqm, py::arg("values"));
  m.def("iqr_std", &iqr_std, py::arg("values"));
  m.def("percent_reduction", &percent_reduction, py::arg("a_nodes"),
        py::arg("b_nodes"));

  // command-line entry point
  m.def(
      "run_cli",
      [](const std::vector<std::string> &args) { return run_cli(args); },
      py::arg("args"),
      "Run a CLI subcommand (args without the program name); returns the "
      "exit code.");
}
