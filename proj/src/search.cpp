#include "epiplan/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "epiplan/domain_io.hpp"
#include "epiplan/rng.hpp"

namespace epiplan {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ms_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                               start)
      .count();
}

// frontier/closed bookkeeping shared by bfs and astar
struct SearchNode {
  PointedKripke state;
  std::int64_t parent; // index into the arena, -1 for the root
  std::uint32_t action_index;
  std::uint32_t depth;
};

std::vector<std::string> plan_of(const std::vector<SearchNode> &arena,
                                 std::size_t leaf,
                                 const EpistemicProblem &problem) {
  std::vector<std::string> plan;
  for (std::int64_t at = static_cast<std::int64_t>(leaf);
       arena[at].parent >= 0; at = arena[at].parent)
    plan.push_back(problem.actions[arena[at].action_index].name());
  std::reverse(plan.begin(), plan.end());
  return plan;
}

} // namespace

SearchResult bfs(const EpistemicProblem &problem, const SearchLimits &limits) {
  const auto start = Clock::now();
  SearchResult result;

  PointedKripke init = initial_state(problem);
  if (satisfies_goal(init, problem)) {
    result.status = SearchStatus::Solved;
    result.elapsed_ms = ms_since(start);
    return result;
  }

  std::vector<SearchNode> arena;
  arena.push_back(SearchNode{std::move(init), -1, 0, 0});
  std::unordered_set<std::uint64_t> visited{canonical_hash(arena[0].state)};
  std::size_t head = 0;

  while (head < arena.size()) {
    if (ms_since(start) > limits.timeout_ms) {
      result.status = SearchStatus::Timeout;
      break;
    }
    if (result.nodes_expanded >= limits.max_nodes)
      break; // Exhausted
    const std::size_t current = head++;
    ++result.nodes_expanded;
    if (satisfies_goal(arena[current].state, problem)) {
      result.status = SearchStatus::Solved;
      result.plan = plan_of(arena, current, problem);
      break;
    }
    if (arena[current].depth >= limits.max_depth)
      continue;
    for (Successor &succ : successors(arena[current].state, problem)) {
      std::uint64_t hash = canonical_hash(succ.state);
      if (!visited.insert(hash).second)
        continue;
      arena.push_back(SearchNode{std::move(succ.state),
                                 static_cast<std::int64_t>(current),
                                 succ.action_index,
                                 arena[current].depth + 1});
    }
  }

  result.elapsed_ms = ms_since(start);
  return result;
}

SearchResult astar(const EpistemicProblem &problem, const HeuristicFn &h,
                   const SearchLimits &limits) {
  const auto start = Clock::now();
  SearchResult result;

  PointedKripke init = initial_state(problem);
  if (satisfies_goal(init, problem)) {
    result.status = SearchStatus::Solved;
    result.elapsed_ms = ms_since(start);
    return result;
  }

  // rounding keeps the ordering stable across platforms
  auto rounded_h = [&](const PointedKripke &state) {
    return std::round(h(state) * 100.0) / 100.0;
  };

  struct Entry {
    double f;
    std::uint64_t seq; // FIFO tie-break among equal f
    std::size_t node;
  };
  struct Order {
    bool operator()(const Entry &a, const Entry &b) const {
      if (a.f != b.f)
        return a.f > b.f;
      return a.seq > b.seq;
    }
  };

  std::vector<SearchNode> arena;
  arena.push_back(SearchNode{std::move(init), -1, 0, 0});
  std::priority_queue<Entry, std::vector<Entry>, Order> open;
  std::uint64_t seq = 0;
  open.push(Entry{rounded_h(arena[0].state), seq++, 0});
  std::unordered_set<std::uint64_t> closed;

  while (!open.empty()) {
    if (ms_since(start) > limits.timeout_ms) {
      result.status = SearchStatus::Timeout;
      break;
    }
    if (result.nodes_expanded >= limits.max_nodes)
      break; // Exhausted
    Entry entry = open.top();
    open.pop();
    SearchNode &node = arena[entry.node];
    // stale queue entries for an already-closed state are skipped unpopped
    if (!closed.insert(canonical_hash(node.state)).second)
      continue;
    ++result.nodes_expanded;
    if (satisfies_goal(node.state, problem)) {
      result.status = SearchStatus::Solved;
      result.plan = plan_of(arena, entry.node, problem);
      break;
    }
    if (node.depth >= limits.max_depth)
      continue;
    const std::uint32_t next_depth = node.depth + 1;
    const std::size_t current = entry.node;
    for (Successor &succ : successors(arena[current].state, problem)) {
      if (closed.count(canonical_hash(succ.state)))
        continue;
      double f = static_cast<double>(next_depth) + rounded_h(succ.state);
      arena.push_back(SearchNode{std::move(succ.state),
                                 static_cast<std::int64_t>(current),
                                 succ.action_index, next_depth});
      open.push(Entry{f, seq++, arena.size() - 1});
    }
  }

  result.elapsed_ms = ms_since(start);
  return result;
}

namespace {

struct DfsContext {
  const EpistemicProblem &problem;
  const DfsConfig &cfg;
  Rng rng;
  ExploredGraph graph;
  std::unordered_map<std::uint64_t, std::uint32_t> index_of;
  bool cap_reached = false;
};

void dfs_expand(DfsContext &ctx, std::uint32_t node) {
  const std::uint32_t depth = ctx.graph.nodes[node].depth;
  if (depth >= ctx.cfg.depth_limit || ctx.cap_reached)
    return;

  std::vector<Successor> succ = successors(ctx.graph.nodes[node].state,
                                           ctx.problem);
  std::vector<std::uint32_t> order =
      ctx.rng.permutation(static_cast<std::uint32_t>(succ.size()));

  for (std::uint32_t pick : order) {
    if (ctx.graph.nodes.size() >= ctx.cfg.node_cap) {
      ctx.cap_reached = true;
      return;
    }
    // deep, late branches are discarded most aggressively; branches out of
    // the root (depth 0) are never discarded
    if (depth > 0) {
      double fill = static_cast<double>(ctx.graph.nodes.size()) /
                    static_cast<double>(ctx.cfg.node_cap);
      double p = ctx.cfg.base_discard_prob *
                 (static_cast<double>(depth) /
                  static_cast<double>(ctx.cfg.depth_limit)) *
                 std::min(1.0, 2.0 * fill);
      if (ctx.rng.unit() < p)
        continue;
    }

    PointedKripke &next = succ[pick].state;
    std::uint64_t hash = canonical_hash(next);
    auto [it, inserted] = ctx.index_of.try_emplace(
        hash, static_cast<std::uint32_t>(ctx.graph.nodes.size()));
    if (!inserted) {
      ctx.graph.edges[node].push_back(it->second);
      continue;
    }
    std::uint32_t child = it->second;
    ctx.graph.nodes.push_back(ExploredNode{std::move(next), depth + 1, hash});
    ctx.graph.edges.emplace_back();
    ctx.graph.edges[node].push_back(child);
    dfs_expand(ctx, child);
    if (ctx.cap_reached)
      return;
  }
}

} // namespace

ExploredGraph dfs_collect(const EpistemicProblem &problem,
                          const DfsConfig &cfg) {
  DfsContext ctx{problem, cfg, Rng(cfg.rng_seed), {}, {}, false};
  PointedKripke init = initial_state(problem);
  std::uint64_t hash = canonical_hash(init);
  ctx.index_of.emplace(hash, 0);
  ctx.graph.nodes.push_back(ExploredNode{std::move(init), 0, hash});
  ctx.graph.edges.emplace_back();
  if (cfg.node_cap >= 1)
    dfs_expand(ctx, 0);

  for (auto &out : ctx.graph.edges) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return ctx.graph;
}

std::vector<LabeledSample> assign_distances(const ExploredGraph &graph,
                                            const EpistemicProblem &problem,
                                            std::uint32_t d_max) {
  const std::uint32_t n = static_cast<std::uint32_t>(graph.nodes.size());

  std::vector<std::vector<std::uint32_t>> reverse(n);
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t v : graph.edges[u])
      reverse[v].push_back(u);

  // multi-source BFS from every explored goal state, walking edges backward
  constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> dist(n, kUnset);
  std::vector<std::uint32_t> frontier;
  for (std::uint32_t u = 0; u < n; ++u)
    if (satisfies_goal(graph.nodes[u].state, problem)) {
      dist[u] = 0;
      frontier.push_back(u);
    }
  while (!frontier.empty()) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t v : frontier)
      for (std::uint32_t u : reverse[v])
        if (dist[u] == kUnset) {
          dist[u] = dist[v] + 1;
          next.push_back(u);
        }
    frontier = std::move(next);
  }

  std::vector<LabeledSample> samples;
  samples.reserve(n);
  for (std::uint32_t u = 0; u < n; ++u) {
    LabeledSample sample{graph.nodes[u].state, problem.goal, std::nullopt};
    if (dist[u] != kUnset)
      sample.distance = std::min(dist[u], d_max);
    samples.push_back(std::move(sample));
  }
  return samples;
}

bool validate_plan(const EpistemicProblem &problem,
                   const std::vector<std::string> &plan) {
  PointedKripke state = initial_state(problem);
  for (const std::string &name : plan) {
    const Action *action = nullptr;
    for (const Action &a : problem.actions)
      if (a.name() == name)
        action = &a;
    if (!action || !executable(state, *action))
      return false;
    state = apply(state, *action);
  }
  return satisfies_goal(state, problem);
}

} // namespace epiplan
