#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "epiplan/problem.hpp"

namespace epiplan {

/// Problem text plus a name for diagnostics ("builtin:<name>" or a path).
struct DomainSource {
  std::string text;
  std::string origin;

  static DomainSource from_file(const std::string &path);
  static DomainSource from_text(std::string text,
                                std::string origin = "<memory>") {
    return DomainSource{std::move(text), std::move(origin)};
  }
};

/// One parser/validator message anchored to a source span.
struct Diagnostic {
  enum class Severity : std::uint8_t { Error, Warning };
  Severity severity = Severity::Error;
  std::string message;
  std::uint32_t line = 1;   // 1-based
  std::uint32_t column = 1; // 1-based
  std::uint32_t length = 0; // characters on that line

  std::string to_string(const std::string &origin = "") const;
};

/// Outcome of parse_problem: a problem when no error occurred, plus all
/// collected diagnostics (warnings may accompany a successful parse).
struct ParseResult {
  std::optional<EpistemicProblem> problem;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return problem.has_value(); }
  bool has_errors() const;
};

/// Parses the line-oriented problem grammar:
///   fluent <name>;  agent <name>;
///   action <name> { type ontic|sensing|announcement;
///                   effect <lit>{, <lit>}; | senses <fluent>; | announces <formula>;
///                   pre <formula>; obs full=<agents> partial=<agents>; }
///   initially <formula>;  goal <formula>;
/// Formulas use `and`/`or`/`not`/`imp` (imp binds loosest, right
/// associative), `B(<agent>, <formula>)` and `C([<agents>], <formula>)`.
/// `#` starts a line comment. Never throws; all failures become
/// diagnostics. On success the initial specification has been checked to
/// determine a finite initial structure (see initial_state).
ParseResult parse_problem(const DomainSource &src);

/// Canonical text for a problem; parse_problem(serialize_problem(p))
/// reconstructs p exactly. Negations of bare fluents are canonicalized to
/// negative literals by the parser, so problems built that way round-trip
/// structurally.
std::string serialize_problem(const EpistemicProblem &problem);

/// Desk-scale benchmark families.
///   coinbox:   params agents (>= 3, default 3), tier (1..agents+2, default 2)
///   selective: params agents (>= 2, default 2), rooms (>= 2, default 2),
///              tier (1..rooms-1, default 1)
/// The tier is the optimal plan length of the generated instance.
/// Throws std::invalid_argument on unknown names or bad params.
EpistemicProblem builtin_problem(
    const std::string &name,
    const std::map<std::string, std::string> &params = {});

/// Builds the unique reduced initial structure for the supported initial
/// fragment: (i) fluent literals fixing the designated world, (ii) common
/// knowledge of per-agent awareness/ignorance of single fluents,
/// C(AG, B_i f or B_i not f) / C(AG, not B_i f and not B_i not f), and
/// (iii) common knowledge of fluent formulas. Throws std::invalid_argument
/// when a formula falls outside the fragment or the specification is
/// unsatisfiable.
PointedKripke initial_state(const EpistemicProblem &problem);

} // namespace epiplan
