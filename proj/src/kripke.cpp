#include "epiplan/kripke.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace epiplan {

namespace {

using Adjacency = std::vector<std::vector<std::vector<std::uint32_t>>>;

// Canonical color refinement over (valuation, per-agent successor color
// sets). Same final color <=> bisimilar; colors are dense and invariant
// under world renumbering because every tie-break goes through sorted
// valuation / signature order, never through world indices.
std::vector<std::uint32_t> compute_ranks(std::uint32_t agent_count,
                                         const std::vector<World> &worlds,
                                         const Adjacency &adjacency) {
  const std::uint32_t n = static_cast<std::uint32_t>(worlds.size());

  std::vector<Valuation> palette;
  palette.reserve(n);
  for (const World &w : worlds)
    palette.push_back(w.valuation);
  std::sort(palette.begin(), palette.end());
  palette.erase(std::unique(palette.begin(), palette.end()), palette.end());

  std::vector<std::uint32_t> colors(n);
  for (std::uint32_t w = 0; w < n; ++w) {
    auto it =
        std::lower_bound(palette.begin(), palette.end(), worlds[w].valuation);
    colors[w] = static_cast<std::uint32_t>(it - palette.begin());
  }

  // signature = (own color, per agent the sorted set of successor colors)
  using Signature = std::pair<std::uint32_t, std::vector<std::vector<std::uint32_t>>>;
  std::size_t distinct = palette.size();
  while (true) {
    std::vector<Signature> signatures(n);
    for (std::uint32_t w = 0; w < n; ++w) {
      Signature sig;
      sig.first = colors[w];
      sig.second.resize(agent_count);
      for (std::uint32_t a = 0; a < agent_count; ++a) {
        std::vector<std::uint32_t> succ;
        succ.reserve(adjacency[a][w].size());
        for (std::uint32_t v : adjacency[a][w])
          succ.push_back(colors[v]);
        std::sort(succ.begin(), succ.end());
        succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
        sig.second[a] = std::move(succ);
      }
      signatures[w] = std::move(sig);
    }

    std::vector<Signature> order = signatures;
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());

    for (std::uint32_t w = 0; w < n; ++w) {
      auto it = std::lower_bound(order.begin(), order.end(), signatures[w]);
      colors[w] = static_cast<std::uint32_t>(it - order.begin());
    }

    if (order.size() == distinct)
      return colors;
    distinct = order.size();
  }
}

void validate_formula(const BeliefFormula &formula, std::uint32_t fluent_count,
                      std::uint32_t agent_count) {
  std::uint32_t max_fluent = 0, max_agent = 0;
  bool any_fluent = false, any_agent = false;
  formula.collect_bounds(max_fluent, max_agent, any_fluent, any_agent);
  if (any_fluent && max_fluent >= fluent_count)
    throw std::invalid_argument("formula mentions an unknown fluent");
  if (any_agent && max_agent >= agent_count)
    throw std::invalid_argument("formula mentions an unknown agent");
}

} // namespace

PointedKripke::PointedKripke(std::uint32_t agent_count,
                             std::vector<Valuation> valuations,
                             std::vector<EdgeList> relations,
                             std::uint32_t pointed)
    : m_agent_count(agent_count), m_pointed(pointed) {
  if (agent_count == 0)
    throw std::invalid_argument("at least one agent is required");
  if (valuations.empty())
    throw std::invalid_argument("a structure needs at least one world");
  if (relations.size() != agent_count)
    throw std::invalid_argument("one relation per agent is required");
  if (pointed >= valuations.size())
    throw std::invalid_argument("pointed world out of range");
  const std::uint32_t width = valuations[0].size();
  for (const Valuation &v : valuations)
    if (v.size() != width)
      throw std::invalid_argument("world valuations disagree on fluent count");

  const std::uint32_t n = static_cast<std::uint32_t>(valuations.size());
  m_worlds.resize(n);
  for (std::uint32_t w = 0; w < n; ++w)
    m_worlds[w].valuation = std::move(valuations[w]);

  m_adjacency.assign(agent_count, std::vector<std::vector<std::uint32_t>>(n));
  for (std::uint32_t a = 0; a < agent_count; ++a) {
    for (auto [src, dst] : relations[a]) {
      if (src >= n || dst >= n)
        throw std::invalid_argument("edge endpoint out of range");
      m_adjacency[a][src].push_back(dst);
    }
    for (auto &succ : m_adjacency[a]) {
      std::sort(succ.begin(), succ.end());
      succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    }
  }

  // Canonical repetition assignment: within each valuation group, order by
  // (refinement rank, index) and number from 0. On reduced structures ranks
  // are unique per world, so the numbering is isomorphism-invariant.
  std::vector<std::uint32_t> ranks =
      compute_ranks(m_agent_count, m_worlds, m_adjacency);
  std::map<Valuation, std::vector<std::uint32_t>> groups;
  for (std::uint32_t w = 0; w < n; ++w)
    groups[m_worlds[w].valuation].push_back(w);
  for (auto &[valuation, members] : groups) {
    std::sort(members.begin(), members.end(),
              [&](std::uint32_t lhs, std::uint32_t rhs) {
                if (ranks[lhs] != ranks[rhs])
                  return ranks[lhs] < ranks[rhs];
                return lhs < rhs;
              });
    for (std::uint32_t i = 0; i < members.size(); ++i)
      m_worlds[members[i]].repetition = i;
  }
}

PointedKripke::EdgeList PointedKripke::edges(Agent agent) const {
  EdgeList out;
  const auto &per_world = m_adjacency.at(agent.index);
  for (std::uint32_t src = 0; src < per_world.size(); ++src)
    for (std::uint32_t dst : per_world[src])
      out.emplace_back(src, dst);
  return out;
}

std::uint64_t PointedKripke::edge_count() const {
  std::uint64_t total = 0;
  for (const auto &relation : m_adjacency)
    for (const auto &succ : relation)
      total += succ.size();
  return total;
}

bool PointedKripke::operator==(const PointedKripke &other) const {
  if (m_agent_count != other.m_agent_count || m_pointed != other.m_pointed ||
      m_worlds.size() != other.m_worlds.size())
    return false;
  for (std::size_t w = 0; w < m_worlds.size(); ++w)
    if (m_worlds[w].valuation != other.m_worlds[w].valuation ||
        m_worlds[w].repetition != other.m_worlds[w].repetition)
      return false;
  return m_adjacency == other.m_adjacency;
}

bool eval_fluent_formula(const Valuation &world,
                         const BeliefFormula &formula) {
  switch (formula.kind()) {
  case BeliefFormula::Kind::Literal: {
    if (formula.fluent().index >= world.size())
      throw std::invalid_argument("formula mentions an unknown fluent");
    return world.test(formula.fluent().index) == formula.positive();
  }
  case BeliefFormula::Kind::Not:
    return !eval_fluent_formula(world, formula.lhs());
  case BeliefFormula::Kind::And:
    return eval_fluent_formula(world, formula.lhs()) &&
           eval_fluent_formula(world, formula.rhs());
  case BeliefFormula::Kind::Or:
    return eval_fluent_formula(world, formula.lhs()) ||
           eval_fluent_formula(world, formula.rhs());
  case BeliefFormula::Kind::Implies:
    return !eval_fluent_formula(world, formula.lhs()) ||
           eval_fluent_formula(world, formula.rhs());
  case BeliefFormula::Kind::Believes:
  case BeliefFormula::Kind::Common:
    throw std::invalid_argument(
        "belief operator in a propositional-only evaluation");
  }
  throw std::logic_error("unhandled formula kind");
}

namespace {

bool entails_unchecked(const PointedKripke &state, std::uint32_t world,
                       const BeliefFormula &formula) {
  switch (formula.kind()) {
  case BeliefFormula::Kind::Literal:
    return state.world(world).valuation.test(formula.fluent().index) ==
           formula.positive();
  case BeliefFormula::Kind::Not:
    return !entails_unchecked(state, world, formula.lhs());
  case BeliefFormula::Kind::And:
    return entails_unchecked(state, world, formula.lhs()) &&
           entails_unchecked(state, world, formula.rhs());
  case BeliefFormula::Kind::Or:
    return entails_unchecked(state, world, formula.lhs()) ||
           entails_unchecked(state, world, formula.rhs());
  case BeliefFormula::Kind::Implies:
    return !entails_unchecked(state, world, formula.lhs()) ||
           entails_unchecked(state, world, formula.rhs());
  case BeliefFormula::Kind::Believes: {
    for (std::uint32_t v : state.successors(formula.agent(), world))
      if (!entails_unchecked(state, v, formula.lhs()))
        return false;
    return true;
  }
  case BeliefFormula::Kind::Common: {
    // Worlds reachable in one or more steps of the union of the group's
    // relations must all satisfy the body.
    std::vector<bool> visited(state.world_count(), false);
    std::vector<std::uint32_t> frontier;
    for (Agent a : formula.group())
      for (std::uint32_t v : state.successors(a, world))
        if (!visited[v]) {
          visited[v] = true;
          frontier.push_back(v);
        }
    while (!frontier.empty()) {
      std::uint32_t v = frontier.back();
      frontier.pop_back();
      if (!entails_unchecked(state, v, formula.lhs()))
        return false;
      for (Agent a : formula.group())
        for (std::uint32_t next : state.successors(a, v))
          if (!visited[next]) {
            visited[next] = true;
            frontier.push_back(next);
          }
    }
    return true;
  }
  }
  throw std::logic_error("unhandled formula kind");
}

} // namespace

bool entails_at(const PointedKripke &state, std::uint32_t world,
                const BeliefFormula &formula) {
  if (world >= state.world_count())
    throw std::invalid_argument("world index out of range");
  validate_formula(formula, state.fluent_count(), state.agent_count());
  return entails_unchecked(state, world, formula);
}

bool entails(const PointedKripke &state, const BeliefFormula &formula) {
  return entails_at(state, state.pointed(), formula);
}

std::vector<std::uint32_t> refinement_ranks(const PointedKripke &state) {
  Adjacency adjacency(state.agent_count());
  for (std::uint32_t a = 0; a < state.agent_count(); ++a) {
    adjacency[a].resize(state.world_count());
    for (std::uint32_t w = 0; w < state.world_count(); ++w)
      adjacency[a][w] = state.successors(Agent{a}, w);
  }
  return compute_ranks(state.agent_count(), state.worlds(), adjacency);
}

PointedKripke bisim_reduce(const PointedKripke &state) {
  std::vector<std::uint32_t> ranks = refinement_ranks(state);
  std::uint32_t classes = 0;
  for (std::uint32_t r : ranks)
    classes = std::max(classes, r + 1);

  std::vector<Valuation> valuations(classes);
  std::vector<bool> seen(classes, false);
  for (std::uint32_t w = 0; w < state.world_count(); ++w)
    if (!seen[ranks[w]]) {
      seen[ranks[w]] = true;
      valuations[ranks[w]] = state.world(w).valuation;
    }

  std::vector<PointedKripke::EdgeList> relations(state.agent_count());
  for (std::uint32_t a = 0; a < state.agent_count(); ++a) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> quotient;
    for (std::uint32_t w = 0; w < state.world_count(); ++w)
      for (std::uint32_t v : state.successors(Agent{a}, w))
        quotient.emplace(ranks[w], ranks[v]);
    relations[a].assign(quotient.begin(), quotient.end());
  }

  return PointedKripke(state.agent_count(), std::move(valuations),
                       std::move(relations), ranks[state.pointed()]);
}

PointedKripke prune_unreachable(const PointedKripke &state) {
  std::vector<bool> reachable(state.world_count(), false);
  std::vector<std::uint32_t> frontier{state.pointed()};
  reachable[state.pointed()] = true;
  while (!frontier.empty()) {
    std::uint32_t w = frontier.back();
    frontier.pop_back();
    for (std::uint32_t a = 0; a < state.agent_count(); ++a)
      for (std::uint32_t v : state.successors(Agent{a}, w))
        if (!reachable[v]) {
          reachable[v] = true;
          frontier.push_back(v);
        }
  }

  std::vector<std::uint32_t> remap(state.world_count(), 0);
  std::vector<Valuation> valuations;
  for (std::uint32_t w = 0; w < state.world_count(); ++w)
    if (reachable[w]) {
      remap[w] = static_cast<std::uint32_t>(valuations.size());
      valuations.push_back(state.world(w).valuation);
    }

  std::vector<PointedKripke::EdgeList> relations(state.agent_count());
  for (std::uint32_t a = 0; a < state.agent_count(); ++a)
    for (std::uint32_t w = 0; w < state.world_count(); ++w)
      if (reachable[w])
        for (std::uint32_t v : state.successors(Agent{a}, w))
          if (reachable[v])
            relations[a].emplace_back(remap[w], remap[v]);

  return PointedKripke(state.agent_count(), std::move(valuations),
                       std::move(relations), remap[state.pointed()]);
}

std::uint64_t canonical_hash(const PointedKripke &state) {
  // Hash the canonical quotient form, so the value agrees for isomorphic
  // reduced structures and, more generally, for any two states with the
  // same bisimulation quotient.
  std::vector<std::uint32_t> ranks = refinement_ranks(state);
  std::uint32_t classes = 0;
  for (std::uint32_t r : ranks)
    classes = std::max(classes, r + 1);

  Digest digest;
  digest.add_u32(state.agent_count());
  digest.add_u32(state.fluent_count());
  digest.add_u32(classes);

  std::vector<bool> seen(classes, false);
  std::vector<const Valuation *> by_rank(classes, nullptr);
  for (std::uint32_t w = 0; w < state.world_count(); ++w)
    if (!seen[ranks[w]]) {
      seen[ranks[w]] = true;
      by_rank[ranks[w]] = &state.world(w).valuation;
    }
  for (std::uint32_t r = 0; r < classes; ++r)
    by_rank[r]->hash_into(digest);

  for (std::uint32_t a = 0; a < state.agent_count(); ++a) {
    std::set<std::pair<std::uint32_t, std::uint32_t>> quotient;
    for (std::uint32_t w = 0; w < state.world_count(); ++w)
      for (std::uint32_t v : state.successors(Agent{a}, w))
        quotient.emplace(ranks[w], ranks[v]);
    digest.add_u32(static_cast<std::uint32_t>(quotient.size()));
    for (auto [src, dst] : quotient) {
      digest.add_u32(src);
      digest.add_u32(dst);
    }
  }

  digest.add_u32(ranks[state.pointed()]);
  return digest.value();
}

std::uint64_t world_node_id(const World &world, std::uint64_t reserved_band,
                            std::uint64_t max_id, std::uint64_t salt) {
  if (max_id < reserved_band)
    throw std::invalid_argument("identifier band is empty");
  Digest digest;
  world.valuation.hash_into(digest);
  digest.add_u32(world.repetition);
  digest.add_u64(salt);
  const std::uint64_t span = max_id - reserved_band + 1;
  return reserved_band + digest.value() % span;
}

} // namespace epiplan
