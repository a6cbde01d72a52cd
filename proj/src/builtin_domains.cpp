#include "epiplan/domain_io.hpp"

#include <stdexcept>

namespace epiplan {

namespace {

std::uint32_t int_param(const std::map<std::string, std::string> &params,
                        const std::string &key, std::uint32_t fallback,
                        std::uint32_t lo, std::uint32_t hi) {
  auto it = params.find(key);
  std::uint32_t value = fallback;
  if (it != params.end()) {
    try {
      unsigned long parsed = std::stoul(it->second);
      value = static_cast<std::uint32_t>(parsed);
    } catch (const std::exception &) {
      throw std::invalid_argument("param '" + key + "' is not an integer: " +
                                  it->second);
    }
  }
  if (value < lo || value > hi)
    throw std::invalid_argument("param '" + key + "' out of range [" +
                                std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
  return value;
}

void reject_unknown_keys(const std::map<std::string, std::string> &params,
                         std::initializer_list<const char *> known) {
  for (const auto &[key, value] : params) {
    bool ok = false;
    for (const char *k : known)
      if (key == k)
        ok = true;
    if (!ok)
      throw std::invalid_argument("unknown param '" + key + "'");
  }
}

BeliefFormula knows_whether(Agent agent, Fluent fluent) {
  return BeliefFormula::disjunction(
      BeliefFormula::believes(agent, BeliefFormula::literal(fluent)),
      BeliefFormula::believes(agent, BeliefFormula::literal(fluent, false)));
}

BeliefFormula ignorant_of(Agent agent, Fluent fluent) {
  return BeliefFormula::conjunction(
      BeliefFormula::negation(
          BeliefFormula::believes(agent, BeliefFormula::literal(fluent))),
      BeliefFormula::negation(BeliefFormula::believes(
          agent, BeliefFormula::literal(fluent, false))));
}

std::vector<Agent> everyone(std::uint32_t n) {
  std::vector<Agent> all;
  for (std::uint32_t i = 0; i < n; ++i)
    all.push_back(Agent{i});
  return all;
}

// A group of agents shares a room with a locked box holding a coin; one
// agent starts with the key. Opening is public; peeking reveals the coin
// only to the peeker; keys can be handed over publicly. The tier picks the
// goal so that the optimal plan has exactly `tier` actions:
//   tier 1            -> open the box
//   tier t in [2,n+1] -> agents 1..t-1 each learn the coin's face
//   tier n+2          -> everyone learns the face and agent 2 ends up
//                        holding the key
EpistemicProblem make_coinbox(
    const std::map<std::string, std::string> &params) {
  reject_unknown_keys(params, {"agents", "tier"});
  const std::uint32_t n = int_param(params, "agents", 3, 3, 8);
  const std::uint32_t tier = int_param(params, "tier", 2, 1, n + 2);

  EpistemicProblem p;
  p.fluent_names = {"opened", "heads"};
  for (std::uint32_t i = 1; i <= n; ++i)
    p.fluent_names.push_back("key" + std::to_string(i));
  for (std::uint32_t i = 1; i <= n; ++i)
    p.agent_names.push_back("a" + std::to_string(i));

  const Fluent opened{0}, heads{1};
  auto key = [](std::uint32_t i) { return Fluent{1 + i}; }; // key of agent i

  ObservabilityFrame public_frame = ObservabilityFrame::make(everyone(n), {});
  for (std::uint32_t i = 1; i <= n; ++i) {
    p.actions.push_back(Action::ontic(
        "open_a" + std::to_string(i), {FluentLiteral{opened, true}},
        BeliefFormula::conjunction(
            BeliefFormula::literal(key(i)),
            BeliefFormula::literal(opened, false)),
        public_frame));
  }
  for (std::uint32_t i = 1; i <= n; ++i) {
    p.actions.push_back(Action::sensing(
        "peek_a" + std::to_string(i), heads, BeliefFormula::literal(opened),
        ObservabilityFrame::make({Agent{i - 1}}, {})));
  }
  for (std::uint32_t i = 1; i <= n; ++i)
    for (std::uint32_t j = 1; j <= n; ++j) {
      if (i == j)
        continue;
      p.actions.push_back(Action::ontic(
          "give_a" + std::to_string(i) + "_a" + std::to_string(j),
          {FluentLiteral{key(i), false}, FluentLiteral{key(j), true}},
          BeliefFormula::literal(key(i)), public_frame));
    }

  p.initial.push_back(BeliefFormula::literal(opened, false));
  p.initial.push_back(BeliefFormula::literal(heads));
  p.initial.push_back(BeliefFormula::literal(key(1)));
  for (std::uint32_t i = 0; i < n; ++i)
    p.initial.push_back(
        BeliefFormula::common(everyone(n), ignorant_of(Agent{i}, heads)));

  if (tier == 1) {
    p.goal.push_back(BeliefFormula::literal(opened));
  } else if (tier <= n + 1) {
    for (std::uint32_t i = 0; i + 1 < tier; ++i)
      p.goal.push_back(knows_whether(Agent{i}, heads));
  } else {
    for (std::uint32_t i = 0; i < n; ++i)
      p.goal.push_back(knows_whether(Agent{i}, heads));
    p.goal.push_back(BeliefFormula::literal(key(2)));
  }
  return p;
}

// One mobile agent walks a corridor of rooms carrying a secret; a broadcast
// is heard in the broadcaster's room and the two adjacent ones. The second
// agent waits `tier` rooms down the corridor, so the optimal plan is
// tier - 1 moves plus one broadcast. Remaining agents idle in room 1; with
// tier >= 3 the goal additionally requires keeping agent 3 ignorant.
EpistemicProblem make_selective(
    const std::map<std::string, std::string> &params) {
  reject_unknown_keys(params, {"agents", "rooms", "tier"});
  const std::uint32_t n = int_param(params, "agents", 2, 2, 8);
  const std::uint32_t k = int_param(params, "rooms", 2, 2, 12);
  const std::uint32_t tier = int_param(params, "tier", 1, 1, k - 1);

  EpistemicProblem p;
  p.fluent_names = {"secret"};
  for (std::uint32_t r = 1; r <= k; ++r)
    p.fluent_names.push_back("at_" + std::to_string(r));
  for (std::uint32_t i = 1; i <= n; ++i)
    p.agent_names.push_back("a" + std::to_string(i));

  const Fluent secret{0};
  auto at = [](std::uint32_t r) { return Fluent{r}; };

  // static listener positions; only agent 1 moves
  auto room_of = [&](std::uint32_t agent_index) -> std::uint32_t {
    return agent_index == 1 ? tier + 1 : 1;
  };

  ObservabilityFrame public_frame = ObservabilityFrame::make(everyone(n), {});
  for (std::uint32_t r = 1; r < k; ++r) {
    p.actions.push_back(Action::ontic(
        "move_" + std::to_string(r) + "_" + std::to_string(r + 1),
        {FluentLiteral{at(r), false}, FluentLiteral{at(r + 1), true}},
        BeliefFormula::literal(at(r)), public_frame));
  }
  for (std::uint32_t r = 1; r <= k; ++r) {
    std::vector<Agent> hearers{Agent{0}};
    for (std::uint32_t i = 1; i < n; ++i) {
      std::uint32_t room = room_of(i);
      if (room + 1 >= r && room <= r + 1)
        hearers.push_back(Agent{i});
    }
    p.actions.push_back(Action::announcement(
        "broadcast_" + std::to_string(r), BeliefFormula::literal(secret),
        BeliefFormula::literal(at(r)),
        ObservabilityFrame::make(std::move(hearers), {})));
  }

  p.initial.push_back(BeliefFormula::literal(secret));
  p.initial.push_back(BeliefFormula::literal(at(1)));
  for (std::uint32_t i = 1; i < n; ++i)
    p.initial.push_back(
        BeliefFormula::common(everyone(n), ignorant_of(Agent{i}, secret)));

  p.goal.push_back(BeliefFormula::believes(
      Agent{1}, BeliefFormula::literal(secret)));
  if (n >= 3 && tier >= 3)
    p.goal.push_back(BeliefFormula::negation(BeliefFormula::believes(
        Agent{2}, BeliefFormula::literal(secret))));
  return p;
}

} // namespace

EpistemicProblem builtin_problem(
    const std::string &name,
    const std::map<std::string, std::string> &params) {
  EpistemicProblem p;
  if (name == "coinbox")
    p = make_coinbox(params);
  else if (name == "selective")
    p = make_selective(params);
  else
    throw std::invalid_argument("unknown builtin problem '" + name +
                                "' (expected coinbox or selective)");
  p.validate();
  return p;
}

} // namespace epiplan
