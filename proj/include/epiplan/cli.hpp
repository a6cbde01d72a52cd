#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "epiplan/problem.hpp"
#include "epiplan/search.hpp"

namespace epiplan {

/// One (instance, approach) outcome. A solved run carries plan length and
/// nodes expanded; an exhausted run carries only nodes expanded; a timed-out
/// run carries neither.
struct RunRecord {
  std::string instance;
  std::string approach;
  SearchStatus status = SearchStatus::Exhausted;
  std::optional<std::uint32_t> plan_length;
  std::optional<std::uint64_t> nodes_expanded;
  std::int64_t elapsed_ms = 0;
};

const char *status_name(SearchStatus status);

/// Search configuration a run is executed under.
struct ApproachSpec {
  std::string name;
  std::string search = "bfs";     // bfs | astar
  std::string heuristic = "zero"; // zero | subgoal | gnn
  std::string model_path;         // required for gnn
};

struct EvalManifest {
  std::vector<std::string> instances;
  std::vector<ApproachSpec> approaches;
  std::int64_t timeout_ms = 600000;
};

/// Per-approach aggregate over a subset of records; the metric fields are
/// empty when the subset is.
struct ApproachAggregate {
  std::string approach;
  std::uint64_t solved_count = 0;
  std::optional<double> length_iqm, length_iqr_std;
  std::optional<double> nodes_iqm, nodes_iqr_std;
  std::optional<double> elapsed_iqm_ms, elapsed_iqr_std_ms;
};

struct Report {
  std::vector<RunRecord> records;
  // each approach over the instances it solved
  std::vector<ApproachAggregate> all_solved;
  // every approach over the instances all of them solved
  std::vector<std::string> commonly_solved_instances;
  std::vector<ApproachAggregate> commonly_solved;
  // node-count reduction of each approach against the first one in the
  // manifest, from the commonly-solved nodes IQMs
  std::string baseline;
  std::vector<std::pair<std::string, double>> node_reduction_percent;
  // the reduction band a learned heuristic is expected to land in
  std::pair<double, double> target_reduction_range{48.0, 91.0};
};

/// "name" or "name:key=value,key=value" selects a built-in family; anything
/// naming an existing file is parsed as a problem file. Throws
/// std::runtime_error with diagnostics on parse failure.
EpistemicProblem load_instance(const std::string &spec);

/// Runs one search under the approach's configuration and wraps the
/// outcome. Timing covers the search call only.
RunRecord solve_instance(const std::string &instance_name,
                         const EpistemicProblem &problem,
                         const ApproachSpec &approach,
                         std::int64_t timeout_ms);

/// The full instance x approach matrix, records in manifest order
/// (instances outer), then aggregates.
Report run_eval(const EvalManifest &manifest);

/// Stable-order pretty JSON; reruns with identical seeds differ only in
/// fields whose names contain "elapsed".
std::string report_to_json(const Report &report);

void print_report_table(const Report &report, std::ostream &out);

/// Entry point behind main(): subcommands solve, datagen, train, eval.
/// Returns 0 on success (including searches that time out or exhaust), 1 on
/// usage errors, 2 on runtime failures.
int run_cli(int argc, const char *const *argv);
int run_cli(const std::vector<std::string> &args); // args without argv[0]

} // namespace epiplan
