#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace epiplan {

/// Index into the problem's fluent table.
struct Fluent {
  std::uint32_t index = 0;
  auto operator<=>(const Fluent &) const = default;
};

/// Index into the problem's agent table.
struct Agent {
  std::uint32_t index = 0;
  auto operator<=>(const Agent &) const = default;
};

/// Immutable belief formula over fluent literals, boolean connectives,
/// individual belief B_i and group common knowledge C_group. Copies share
/// subtrees; a formula is never modified after construction.
class BeliefFormula {
public:
  enum class Kind : std::uint8_t {
    Literal,
    Not,
    And,
    Or,
    Implies,
    Believes,
    Common,
  };

  static BeliefFormula literal(Fluent fluent, bool positive = true) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::Literal;
    node->fluent = fluent;
    node->positive = positive;
    return BeliefFormula(std::move(node));
  }

  static BeliefFormula negation(BeliefFormula inner) {
    return unary(Kind::Not, std::move(inner));
  }

  static BeliefFormula conjunction(BeliefFormula lhs, BeliefFormula rhs) {
    return binary(Kind::And, std::move(lhs), std::move(rhs));
  }

  static BeliefFormula disjunction(BeliefFormula lhs, BeliefFormula rhs) {
    return binary(Kind::Or, std::move(lhs), std::move(rhs));
  }

  static BeliefFormula implication(BeliefFormula lhs, BeliefFormula rhs) {
    return binary(Kind::Implies, std::move(lhs), std::move(rhs));
  }

  static BeliefFormula believes(Agent agent, BeliefFormula inner) {
    auto node = std::make_shared<Node>();
    node->kind = Kind::Believes;
    node->agent = agent;
    node->children.push_back(std::move(inner));
    return BeliefFormula(std::move(node));
  }

  static BeliefFormula common(std::vector<Agent> group, BeliefFormula inner) {
    if (group.empty())
      throw std::invalid_argument("common knowledge needs a non-empty group");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Common;
    node->group = std::move(group);
    node->children.push_back(std::move(inner));
    return BeliefFormula(std::move(node));
  }

  Kind kind() const { return m_node->kind; }

  Fluent fluent() const {
    require(Kind::Literal);
    return m_node->fluent;
  }

  bool positive() const {
    require(Kind::Literal);
    return m_node->positive;
  }

  Agent agent() const {
    require(Kind::Believes);
    return m_node->agent;
  }

  const std::vector<Agent> &group() const {
    require(Kind::Common);
    return m_node->group;
  }

  /// Single child of Not/Believes/Common, left child of a connective.
  const BeliefFormula &lhs() const { return m_node->children.at(0); }

  /// Right child of And/Or/Implies.
  const BeliefFormula &rhs() const { return m_node->children.at(1); }

  /// True when no Believes/Common occurs anywhere in the tree, i.e. the
  /// formula can be evaluated against a single world's valuation.
  bool is_fluent_formula() const {
    if (kind() == Kind::Believes || kind() == Kind::Common)
      return false;
    for (const BeliefFormula &child : m_node->children)
      if (!child.is_fluent_formula())
        return false;
    return true;
  }

  /// Nesting depth: literals have depth 0, every connective or modality
  /// adds one level.
  std::uint32_t depth() const {
    std::uint32_t best = 0;
    for (const BeliefFormula &child : m_node->children)
      best = std::max(best, child.depth());
    return kind() == Kind::Literal ? 0 : best + 1;
  }

  /// Largest fluent index mentioned, or nullopt-like 0 when none; used to
  /// validate formulas against a problem's fluent table.
  void collect_bounds(std::uint32_t &max_fluent, std::uint32_t &max_agent,
                      bool &any_fluent, bool &any_agent) const {
    switch (kind()) {
    case Kind::Literal:
      any_fluent = true;
      max_fluent = std::max(max_fluent, m_node->fluent.index);
      break;
    case Kind::Believes:
      any_agent = true;
      max_agent = std::max(max_agent, m_node->agent.index);
      break;
    case Kind::Common:
      for (Agent a : m_node->group) {
        any_agent = true;
        max_agent = std::max(max_agent, a.index);
      }
      break;
    default:
      break;
    }
    for (const BeliefFormula &child : m_node->children)
      child.collect_bounds(max_fluent, max_agent, any_fluent, any_agent);
  }

  /// Structural equality.
  bool operator==(const BeliefFormula &other) const {
    if (m_node == other.m_node)
      return true;
    if (kind() != other.kind())
      return false;
    switch (kind()) {
    case Kind::Literal:
      return m_node->fluent == other.m_node->fluent &&
             m_node->positive == other.m_node->positive;
    case Kind::Believes:
      if (!(m_node->agent == other.m_node->agent))
        return false;
      break;
    case Kind::Common:
      if (m_node->group != other.m_node->group)
        return false;
      break;
    default:
      break;
    }
    if (m_node->children.size() != other.m_node->children.size())
      return false;
    for (std::size_t i = 0; i < m_node->children.size(); ++i)
      if (!(m_node->children[i] == other.m_node->children[i]))
        return false;
    return true;
  }

private:
  struct Node {
    Kind kind = Kind::Literal;
    Fluent fluent;
    bool positive = true;
    Agent agent;
    std::vector<Agent> group;
    std::vector<BeliefFormula> children;
  };

  explicit BeliefFormula(std::shared_ptr<const Node> node)
      : m_node(std::move(node)) {}

  static BeliefFormula unary(Kind kind, BeliefFormula inner) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->children.push_back(std::move(inner));
    return BeliefFormula(std::move(node));
  }

  static BeliefFormula binary(Kind kind, BeliefFormula lhs, BeliefFormula rhs) {
    auto node = std::make_shared<Node>();
    node->kind = kind;
    node->children.push_back(std::move(lhs));
    node->children.push_back(std::move(rhs));
    return BeliefFormula(std::move(node));
  }

  void require(Kind kind) const {
    if (m_node->kind != kind)
      throw std::logic_error("belief formula accessor used on wrong kind");
  }

  std::shared_ptr<const Node> m_node;
};

/// Signed fluent occurrence, the unit of ontic effects.
struct FluentLiteral {
  Fluent fluent;
  bool positive = true;
  auto operator<=>(const FluentLiteral &) const = default;
};

} // namespace epiplan
