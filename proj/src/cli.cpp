#include "epiplan/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

#include "epiplan/domain_io.hpp"
#include "epiplan/graph_embed.hpp"
#include "epiplan/heuristics.hpp"
#include "epiplan/metrics.hpp"
#include "epiplan/neural.hpp"

namespace epiplan {

namespace {

using ordered_json = nlohmann::ordered_json;

std::map<std::string, std::string> parse_params(const std::string &text,
                                                const std::string &spec) {
  std::map<std::string, std::string> params;
  std::stringstream stream(text);
  std::string pair;
  while (std::getline(stream, pair, ',')) {
    const std::size_t eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size())
      throw std::runtime_error("bad instance parameter '" + pair + "' in '" +
                               spec + "' (expected key=value)");
    params[pair.substr(0, eq)] = pair.substr(eq + 1);
  }
  return params;
}

SearchResult run_search(const EpistemicProblem &problem,
                        const ApproachSpec &approach,
                        const SearchLimits &limits) {
  if (approach.search == "bfs")
    return bfs(problem, limits);
  if (approach.search == "astar") {
    std::shared_ptr<const RegressorModel> model;
    if (approach.heuristic == "gnn") {
      if (approach.model_path.empty())
        throw std::invalid_argument("gnn heuristic requires --model");
      model =
          std::make_shared<const RegressorModel>(load_model(approach.model_path));
    }
    return astar(problem, make_heuristic(approach.heuristic, problem, model),
                 limits);
  }
  throw std::invalid_argument("unknown search: " + approach.search);
}

RunRecord wrap_result(const std::string &instance_name,
                      const std::string &approach_name,
                      const SearchResult &result) {
  RunRecord record;
  record.instance = instance_name;
  record.approach = approach_name;
  record.status = result.status;
  record.elapsed_ms = result.elapsed_ms;
  if (result.status == SearchStatus::Solved) {
    record.plan_length = static_cast<std::uint32_t>(result.plan.size());
    record.nodes_expanded = result.nodes_expanded;
  } else if (result.status == SearchStatus::Exhausted) {
    record.nodes_expanded = result.nodes_expanded;
  }
  return record;
}

ordered_json record_to_json(const RunRecord &record) {
  ordered_json j;
  j["instance"] = record.instance;
  j["approach"] = record.approach;
  j["status"] = status_name(record.status);
  if (record.plan_length)
    j["plan_length"] = *record.plan_length;
  if (record.nodes_expanded)
    j["nodes_expanded"] = *record.nodes_expanded;
  j["elapsed_ms"] = record.elapsed_ms;
  return j;
}

ordered_json optional_number(const std::optional<double> &value) {
  return value ? ordered_json(*value) : ordered_json(nullptr);
}

ordered_json aggregate_to_json(const ApproachAggregate &agg) {
  ordered_json j;
  j["approach"] = agg.approach;
  j["solved_count"] = agg.solved_count;
  j["length_iqm"] = optional_number(agg.length_iqm);
  j["length_iqr_std"] = optional_number(agg.length_iqr_std);
  j["nodes_iqm"] = optional_number(agg.nodes_iqm);
  j["nodes_iqr_std"] = optional_number(agg.nodes_iqr_std);
  j["elapsed_iqm_ms"] = optional_number(agg.elapsed_iqm_ms);
  j["elapsed_iqr_std_ms"] = optional_number(agg.elapsed_iqr_std_ms);
  return j;
}

// aggregate over the solved records of one approach within a subset
ApproachAggregate aggregate_records(const std::string &approach,
                                    const std::vector<const RunRecord *> &rows) {
  ApproachAggregate agg;
  agg.approach = approach;
  std::vector<double> lengths, nodes, elapsed;
  for (const RunRecord *r : rows) {
    if (r->status != SearchStatus::Solved)
      continue;
    lengths.push_back(static_cast<double>(*r->plan_length));
    nodes.push_back(static_cast<double>(*r->nodes_expanded));
    elapsed.push_back(static_cast<double>(r->elapsed_ms));
  }
  agg.solved_count = lengths.size();
  if (!lengths.empty()) {
    agg.length_iqm = iqm(lengths);
    agg.length_iqr_std = iqr_std(lengths);
    agg.nodes_iqm = iqm(nodes);
    agg.nodes_iqr_std = iqr_std(nodes);
    agg.elapsed_iqm_ms = iqm(elapsed);
    agg.elapsed_iqr_std_ms = iqr_std(elapsed);
  }
  return agg;
}

std::ofstream open_output(const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  return out;
}

struct SolveOptions {
  std::string instance;
  ApproachSpec approach;
  std::int64_t timeout_ms = 600000;
  std::uint64_t max_nodes = std::numeric_limits<std::uint64_t>::max();
  std::string out;
};

int cmd_solve(const SolveOptions &opt) {
  const EpistemicProblem problem = load_instance(opt.instance);
  SearchLimits limits;
  limits.timeout_ms = opt.timeout_ms;
  limits.max_nodes = opt.max_nodes;
  const SearchResult result = run_search(problem, opt.approach, limits);
  RunRecord record = wrap_result(opt.instance, opt.approach.name, result);

  ordered_json j = record_to_json(record);
  if (result.status == SearchStatus::Solved)
    j["plan"] = result.plan;
  const std::string text = j.dump(2) + "\n";
  if (opt.out.empty()) {
    std::cout << text;
  } else {
    open_output(opt.out) << text;
  }
  return 0;
}

struct DatagenOptions {
  std::string instance;
  DfsConfig dfs;
  std::uint32_t d_max = 50;
  std::string out;
};

int cmd_datagen(const DatagenOptions &opt) {
  const EpistemicProblem problem = load_instance(opt.instance);
  const ExploredGraph explored = dfs_collect(problem, opt.dfs);
  const std::vector<LabeledSample> samples =
      assign_distances(explored, problem, opt.d_max);
  std::vector<DatasetRecord> records;
  records.reserve(samples.size());
  for (const LabeledSample &sample : samples)
    records.push_back(
        {encode_state(sample.state, sample.goal, problem), sample.distance});
  if (opt.out.empty() || opt.out == "-") {
    write_jsonl(std::cout, records);
  } else {
    std::ofstream out = open_output(opt.out);
    write_jsonl(out, records);
  }
  return 0;
}

struct TrainOptions {
  std::string data;
  std::string out_model;
  std::string loss_csv;
  TrainConfig train;
  AdamWConfig optimizer;
  ModelDims dims;
  PrepConfig prep;
};

int cmd_train(const TrainOptions &opt) {
  std::ifstream in(opt.data, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + opt.data);
  const std::vector<DatasetRecord> records = read_jsonl(in);
  const TrainingSet data = prepare_dataset(records, opt.prep, opt.train.seed);

  RegressorModel model = make_model(opt.train.seed, opt.dims, opt.prep);
  const TrainResult result = train(model, data, opt.train, opt.optimizer);
  save_model(model, opt.out_model);

  const std::string csv_path =
      opt.loss_csv.empty() ? opt.out_model + ".loss.csv" : opt.loss_csv;
  std::ofstream csv = open_output(csv_path);
  csv << "epoch,mse\n";
  for (std::size_t e = 0; e < result.epoch_mse.size(); ++e) {
    char line[64];
    std::snprintf(line, sizeof line, "%zu,%.17g\n", e + 1,
                  result.epoch_mse[e]);
    csv << line;
  }
  std::cerr << "trained on " << data.graphs.size() << " samples ("
            << records.size() << " records), model -> " << opt.out_model
            << ", losses -> " << csv_path << "\n";
  return 0;
}

EvalManifest parse_manifest(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw std::runtime_error("manifest " + path + ": " + e.what());
  }
  EvalManifest manifest;
  try {
    manifest.timeout_ms = doc.value("timeout_ms", std::int64_t{600000});
    for (const auto &entry : doc.at("instances"))
      manifest.instances.push_back(entry.get<std::string>());
    for (const auto &entry : doc.at("approaches")) {
      ApproachSpec spec;
      spec.name = entry.at("name").get<std::string>();
      spec.search = entry.value("search", "bfs");
      spec.heuristic = entry.value("heuristic", "zero");
      spec.model_path = entry.value("model", "");
      manifest.approaches.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception &e) {
    throw std::runtime_error("manifest " + path + ": " + e.what());
  }
  return manifest;
}

struct EvalOptions {
  std::string manifest_path;
  std::string out;
};

int cmd_eval(const EvalOptions &opt) {
  const EvalManifest manifest = parse_manifest(opt.manifest_path);
  const Report report = run_eval(manifest);
  const std::string text = report_to_json(report);
  if (opt.out.empty()) {
    std::cout << text;
  } else {
    open_output(opt.out) << text;
  }
  print_report_table(report, std::cerr);
  return 0;
}

} // namespace

const char *status_name(SearchStatus status) {
  switch (status) {
  case SearchStatus::Solved:
    return "solved";
  case SearchStatus::Exhausted:
    return "exhausted";
  case SearchStatus::Timeout:
    return "timeout";
  }
  return "unknown";
}

EpistemicProblem load_instance(const std::string &spec) {
  if (std::filesystem::exists(spec)) {
    const DomainSource src = DomainSource::from_file(spec);
    const ParseResult parsed = parse_problem(src);
    if (!parsed.ok()) {
      std::string message = "cannot parse " + spec;
      for (const Diagnostic &d : parsed.diagnostics)
        message += "\n  " + d.to_string(src.origin);
      throw std::runtime_error(message);
    }
    return *parsed.problem;
  }
  try {
    const std::size_t colon = spec.find(':');
    if (colon == std::string::npos)
      return builtin_problem(spec);
    return builtin_problem(spec.substr(0, colon),
                           parse_params(spec.substr(colon + 1), spec));
  } catch (const std::exception &e) {
    throw std::runtime_error("no file '" + spec + "' and no such builtin (" +
                             e.what() + ")");
  }
}

RunRecord solve_instance(const std::string &instance_name,
                         const EpistemicProblem &problem,
                         const ApproachSpec &approach,
                         std::int64_t timeout_ms) {
  SearchLimits limits;
  limits.timeout_ms = timeout_ms;
  return wrap_result(instance_name, approach.name,
                     run_search(problem, approach, limits));
}

Report run_eval(const EvalManifest &manifest) {
  if (manifest.instances.empty())
    throw std::invalid_argument("eval manifest lists no instances");
  if (manifest.approaches.empty())
    throw std::invalid_argument("eval manifest lists no approaches");
  {
    std::set<std::string> names;
    for (const ApproachSpec &a : manifest.approaches)
      if (!names.insert(a.name).second)
        throw std::invalid_argument("duplicate approach name: " + a.name);
  }

  std::vector<EpistemicProblem> problems;
  problems.reserve(manifest.instances.size());
  for (const std::string &spec : manifest.instances)
    problems.push_back(load_instance(spec));

  Report report;
  report.baseline = manifest.approaches.front().name;
  for (std::size_t i = 0; i < manifest.instances.size(); ++i)
    for (const ApproachSpec &approach : manifest.approaches)
      report.records.push_back(solve_instance(manifest.instances[i],
                                              problems[i], approach,
                                              manifest.timeout_ms));

  // instances every approach solved
  for (const std::string &instance : manifest.instances) {
    bool all = true;
    for (const RunRecord &r : report.records)
      if (r.instance == instance && r.status != SearchStatus::Solved)
        all = false;
    if (all)
      report.commonly_solved_instances.push_back(instance);
  }

  for (const ApproachSpec &approach : manifest.approaches) {
    std::vector<const RunRecord *> own, common;
    for (const RunRecord &r : report.records) {
      if (r.approach != approach.name)
        continue;
      own.push_back(&r);
      if (std::find(report.commonly_solved_instances.begin(),
                    report.commonly_solved_instances.end(),
                    r.instance) != report.commonly_solved_instances.end())
        common.push_back(&r);
    }
    report.all_solved.push_back(aggregate_records(approach.name, own));
    report.commonly_solved.push_back(aggregate_records(approach.name, common));
  }

  const ApproachAggregate &base = report.commonly_solved.front();
  if (base.nodes_iqm && *base.nodes_iqm > 0)
    for (const ApproachAggregate &agg : report.commonly_solved)
      if (agg.nodes_iqm)
        report.node_reduction_percent.emplace_back(
            agg.approach, percent_reduction(*agg.nodes_iqm, *base.nodes_iqm));
  return report;
}

std::string report_to_json(const Report &report) {
  ordered_json j;
  j["records"] = ordered_json::array();
  for (const RunRecord &record : report.records)
    j["records"].push_back(record_to_json(record));

  ordered_json aggregates;
  aggregates["all_solved"] = ordered_json::array();
  for (const ApproachAggregate &agg : report.all_solved)
    aggregates["all_solved"].push_back(aggregate_to_json(agg));
  ordered_json common;
  common["instances"] = report.commonly_solved_instances;
  common["per_approach"] = ordered_json::array();
  for (const ApproachAggregate &agg : report.commonly_solved)
    common["per_approach"].push_back(aggregate_to_json(agg));
  aggregates["commonly_solved"] = std::move(common);

  ordered_json reduction;
  reduction["baseline"] = report.baseline;
  reduction["per_approach"] = ordered_json::array();
  for (const auto &[name, percent] : report.node_reduction_percent) {
    ordered_json row;
    row["approach"] = name;
    row["percent"] = percent;
    reduction["per_approach"].push_back(std::move(row));
  }
  aggregates["node_reduction_percent"] = std::move(reduction);
  j["aggregates"] = std::move(aggregates);

  ordered_json targets;
  targets["node_reduction_percent"] = {
      {"min", report.target_reduction_range.first},
      {"max", report.target_reduction_range.second}};
  targets["note"] = "reduction band a learned heuristic is expected to reach "
                    "against the blind baseline on commonly solved instances";
  j["soft_targets"] = std::move(targets);
  return j.dump(2) + "\n";
}

void print_report_table(const Report &report, std::ostream &out) {
  out << std::left << std::setw(28) << "instance" << std::setw(18)
      << "approach" << std::setw(11) << "status" << std::right << std::setw(7)
      << "length" << std::setw(9) << "nodes" << std::setw(9) << "ms" << "\n";
  for (const RunRecord &r : report.records) {
    out << std::left << std::setw(28) << r.instance << std::setw(18)
        << r.approach << std::setw(11) << status_name(r.status) << std::right;
    if (r.plan_length)
      out << std::setw(7) << *r.plan_length;
    else
      out << std::setw(7) << "-";
    if (r.nodes_expanded)
      out << std::setw(9) << *r.nodes_expanded;
    else
      out << std::setw(9) << "-";
    out << std::setw(9) << r.elapsed_ms << "\n";
  }

  out << "\ncommonly solved: " << report.commonly_solved_instances.size()
      << " of "
      << (report.commonly_solved.empty()
              ? 0
              : report.records.size() / report.commonly_solved.size())
      << " instances\n";
  out << std::left << std::setw(18) << "approach" << std::right << std::setw(8)
      << "solved" << std::setw(16) << "length IQM" << std::setw(16)
      << "nodes IQM" << std::setw(13) << "reduction" << "\n";
  for (const ApproachAggregate &agg : report.commonly_solved) {
    out << std::left << std::setw(18) << agg.approach << std::right
        << std::setw(8) << agg.solved_count;
    std::ostringstream len, nodes;
    if (agg.length_iqm) {
      len << std::fixed << std::setprecision(2) << *agg.length_iqm << "+/-"
          << *agg.length_iqr_std;
      nodes << std::fixed << std::setprecision(2) << *agg.nodes_iqm << "+/-"
            << *agg.nodes_iqr_std;
    } else {
      len << "-";
      nodes << "-";
    }
    out << std::setw(16) << len.str() << std::setw(16) << nodes.str();
    std::string reduction = "-";
    for (const auto &[name, percent] : report.node_reduction_percent)
      if (name == agg.approach)
        reduction = std::to_string(std::llround(percent)) + "%";
    out << std::setw(13) << reduction << "\n";
  }
  out << "target reduction band: "
      << std::llround(report.target_reduction_range.first) << "-"
      << std::llround(report.target_reduction_range.second) << "%\n";
}

int run_cli(int argc, const char *const *argv) {
  CLI::App app{"epistemic planner: solve, generate data, train, evaluate"};
  app.require_subcommand(1);

  SolveOptions solve_opt;
  CLI::App *solve = app.add_subcommand(
      "solve", "run one search on one instance and print the outcome");
  solve->add_option("instance", solve_opt.instance,
                    "problem file, or builtin spec like coinbox:tier=2")
      ->required();
  solve->add_option("--search", solve_opt.approach.search, "bfs or astar")
      ->check(CLI::IsMember({"bfs", "astar"}));
  solve->add_option("--heuristic", solve_opt.approach.heuristic,
                    "astar guidance: zero, subgoal, or gnn")
      ->check(CLI::IsMember({"zero", "subgoal", "gnn"}));
  solve->add_option("--model", solve_opt.approach.model_path,
                    "trained model file for the gnn heuristic");
  solve->add_option("--timeout-ms", solve_opt.timeout_ms,
                    "search wall-clock budget (default 600000)");
  solve->add_option("--max-nodes", solve_opt.max_nodes,
                    "abort after this many expansions");
  solve->add_option("--out", solve_opt.out,
                    "write the run record here instead of stdout");

  DatagenOptions datagen_opt;
  CLI::App *datagen = app.add_subcommand(
      "datagen", "explore an instance and emit a JSON-lines dataset");
  datagen->add_option("instance", datagen_opt.instance,
                      "problem file or builtin spec")
      ->required();
  datagen->add_option("--depth", datagen_opt.dfs.depth_limit,
                      "exploration depth limit (default 10)");
  datagen->add_option("--discard-prob", datagen_opt.dfs.base_discard_prob,
                      "base branch-discard probability in [0,1)")
      ->check(CLI::Range(0.0, 1.0));
  datagen->add_option("--max-nodes", datagen_opt.dfs.node_cap,
                      "stop exploring past this many recorded states");
  datagen->add_option("--seed", datagen_opt.dfs.rng_seed,
                      "exploration seed (default 0)");
  datagen->add_option("--d-max", datagen_opt.d_max,
                      "distance label cap (default 50)");
  datagen->add_option("--out", datagen_opt.out,
                      "dataset path ('-' or empty for stdout)");

  TrainOptions train_opt;
  CLI::App *train_cmd = app.add_subcommand(
      "train", "fit the distance regressor on a JSON-lines dataset");
  train_cmd->add_option("--data", train_opt.data, "JSON-lines dataset path")
      ->required();
  train_cmd
      ->add_option("--out-model", train_opt.out_model, "model container path")
      ->required();
  train_cmd->add_option("--loss-csv", train_opt.loss_csv,
                        "loss curve path (default <out-model>.loss.csv)");
  train_cmd->add_option("--epochs", train_opt.train.epochs,
                        "training epochs (default 100)");
  train_cmd->add_option("--batch", train_opt.train.batch_size,
                        "minibatch size (default 64)");
  train_cmd->add_option("--seed", train_opt.train.seed,
                        "init/shuffle/dropout seed (default 0)");
  train_cmd->add_option("--lr", train_opt.optimizer.lr,
                        "learning rate (default 1e-3)");
  train_cmd->add_option("--weight-decay", train_opt.optimizer.weight_decay,
                        "decoupled weight decay (default 1e-2)");
  train_cmd->add_option("--node-emb", train_opt.dims.node_emb,
                        "node embedding width (default 64)");
  train_cmd->add_option("--edge-emb", train_opt.dims.edge_emb,
                        "edge embedding width (default 32)");
  train_cmd->add_option("--hidden", train_opt.dims.hidden,
                        "convolution/head width (default 128)");
  train_cmd->add_option("--blocks", train_opt.dims.blocks,
                        "residual head blocks (default 3)");
  train_cmd
      ->add_option("--balance-cap", train_opt.prep.p_m,
                   "max fraction of samples per distance bin (default 0.5)")
      ->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--d-max", train_opt.prep.d_max,
                        "distance normalization cap (default 50)");

  EvalOptions eval_opt;
  CLI::App *eval = app.add_subcommand(
      "eval", "run an instance x approach matrix and report aggregates");
  eval->add_option("--manifest", eval_opt.manifest_path,
                   "JSON manifest: instances, approaches, timeout_ms")
      ->required();
  eval->add_option("--out", eval_opt.out,
                   "report JSON path (default stdout; table goes to stderr)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*solve)
      return cmd_solve(solve_opt);
    if (*datagen)
      return cmd_datagen(datagen_opt);
    if (*train_cmd)
      return cmd_train(train_opt);
    if (*eval)
      return cmd_eval(eval_opt);
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int run_cli(const std::vector<std::string> &args) {
  std::vector<const char *> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("epiplan");
  for (const std::string &arg : args)
    argv.push_back(arg.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace epiplan
