#include "epiplan/domain_io.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace epiplan {

DomainSource DomainSource::from_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return DomainSource{buffer.str(), path};
}

std::string Diagnostic::to_string(const std::string &origin) const {
  std::ostringstream out;
  if (!origin.empty())
    out << origin << ":";
  out << line << ":" << column << ": "
      << (severity == Severity::Error ? "error" : "warning") << ": "
      << message;
  return out.str();
}

bool ParseResult::has_errors() const {
  for (const Diagnostic &d : diagnostics)
    if (d.severity == Diagnostic::Severity::Error)
      return true;
  return false;
}

namespace {

struct Token {
  enum class Type : std::uint8_t {
    Ident,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Equals,
    Minus,
    End,
  };
  Type type = Type::End;
  std::string text;
  std::uint32_t line = 1;
  std::uint32_t column = 1;
};

const std::set<std::string> kReserved = {
    "fluent", "agent",     "action",  "type", "ontic", "sensing",
    "announcement", "effect", "senses", "announces", "pre", "obs",
    "full", "partial", "initially", "goal", "and", "or", "not", "imp",
    "B", "C"};

class Lexer {
public:
  Lexer(const std::string &text, std::vector<Diagnostic> &diags)
      : m_text(text), m_diags(diags) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (m_pos < m_text.size()) {
      char c = m_text[m_pos];
      if (c == '#') {
        while (m_pos < m_text.size() && m_text[m_pos] != '\n')
          ++m_pos;
        continue;
      }
      if (c == '\n') {
        ++m_line;
        m_col = 1;
        ++m_pos;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        Token t{Token::Type::Ident, "", m_line, m_col};
        while (m_pos < m_text.size() &&
               (std::isalnum(static_cast<unsigned char>(m_text[m_pos])) ||
                m_text[m_pos] == '_')) {
          t.text.push_back(m_text[m_pos]);
          advance();
        }
        tokens.push_back(std::move(t));
        continue;
      }
      Token::Type type;
      switch (c) {
      case '{': type = Token::Type::LBrace; break;
      case '}': type = Token::Type::RBrace; break;
      case '(': type = Token::Type::LParen; break;
      case ')': type = Token::Type::RParen; break;
      case '[': type = Token::Type::LBracket; break;
      case ']': type = Token::Type::RBracket; break;
      case ',': type = Token::Type::Comma; break;
      case ';': type = Token::Type::Semi; break;
      case '=': type = Token::Type::Equals; break;
      case '-': type = Token::Type::Minus; break;
      default:
        m_diags.push_back({Diagnostic::Severity::Error,
                           std::string("unexpected character '") + c + "'",
                           m_line, m_col, 1});
        advance();
        continue;
      }
      tokens.push_back({type, std::string(1, c), m_line, m_col});
      advance();
    }
    tokens.push_back({Token::Type::End, "", m_line, m_col});
    return tokens;
  }

private:
  void advance() {
    ++m_pos;
    ++m_col;
  }

  const std::string &m_text;
  std::vector<Diagnostic> &m_diags;
  std::size_t m_pos = 0;
  std::uint32_t m_line = 1;
  std::uint32_t m_col = 1;
};

class Parser {
public:
  Parser(std::vector<Token> tokens, std::vector<Diagnostic> &diags)
      : m_tokens(std::move(tokens)), m_diags(diags) {}

  EpistemicProblem run() {
    while (peek().type != Token::Type::End) {
      const Token &t = peek();
      if (is_keyword(t, "fluent"))
        parse_name_decl("fluent", m_problem.fluent_names);
      else if (is_keyword(t, "agent"))
        parse_name_decl("agent", m_problem.agent_names);
      else if (is_keyword(t, "action"))
        parse_action();
      else if (is_keyword(t, "initially"))
        parse_top_formula(m_problem.initial, m_initially_span);
      else if (is_keyword(t, "goal"))
        parse_top_formula(m_problem.goal, m_goal_span);
      else {
        error(t, "expected a declaration (fluent/agent/action/initially/goal)");
        recover_top();
      }
    }
    return std::move(m_problem);
  }

  const Token *initially_span() const { return m_initially_span; }

private:
  static bool is_keyword(const Token &t, const char *word) {
    return t.type == Token::Type::Ident && t.text == word;
  }

  const Token &peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(m_pos + ahead, m_tokens.size() - 1);
    return m_tokens[i];
  }

  const Token &take() {
    const Token &t = m_tokens[m_pos];
    if (m_pos + 1 < m_tokens.size())
      ++m_pos;
    return t;
  }

  void error(const Token &at, const std::string &message) {
    m_diags.push_back({Diagnostic::Severity::Error, message, at.line,
                       at.column,
                       static_cast<std::uint32_t>(
                           std::max<std::size_t>(at.text.size(), 1))});
  }

  void warning(const Token &at, const std::string &message) {
    m_diags.push_back({Diagnostic::Severity::Warning, message, at.line,
                       at.column,
                       static_cast<std::uint32_t>(
                           std::max<std::size_t>(at.text.size(), 1))});
  }

  bool expect(Token::Type type, const char *what) {
    if (peek().type == type) {
      take();
      return true;
    }
    error(peek(), std::string("expected ") + what);
    return false;
  }

  // skip to just past the next ';', or stop before '}' / a top keyword
  void recover_statement() {
    while (true) {
      const Token &t = peek();
      if (t.type == Token::Type::End || t.type == Token::Type::RBrace)
        return;
      if (t.type == Token::Type::Semi) {
        take();
        return;
      }
      take();
    }
  }

  void recover_top() {
    while (true) {
      const Token &t = peek();
      if (t.type == Token::Type::End)
        return;
      if (t.type == Token::Type::Ident &&
          (t.text == "fluent" || t.text == "agent" || t.text == "action" ||
           t.text == "initially" || t.text == "goal"))
        return;
      take();
    }
  }

  bool declare_name(const Token &name_token,
                    std::vector<std::string> &table, const char *what) {
    if (name_token.type != Token::Type::Ident) {
      error(name_token, std::string("expected a ") + what + " name");
      return false;
    }
    if (kReserved.count(name_token.text)) {
      error(name_token, "'" + name_token.text + "' is a reserved word");
      return false;
    }
    if (m_problem.find_fluent(name_token.text) >= 0 ||
        m_problem.find_agent(name_token.text) >= 0) {
      error(name_token, "name '" + name_token.text + "' is already declared");
      return false;
    }
    table.push_back(name_token.text);
    return true;
  }

  void parse_name_decl(const char *what, std::vector<std::string> &table) {
    take(); // keyword
    const Token &name = take();
    if (!declare_name(name, table, what)) {
      recover_statement();
      return;
    }
    if (!expect(Token::Type::Semi, "';'"))
      recover_statement();
  }

  std::optional<Fluent> resolve_fluent(const Token &t) {
    std::int64_t i = m_problem.find_fluent(t.text);
    if (i < 0) {
      error(t, "undeclared fluent '" + t.text + "'");
      return std::nullopt;
    }
    return Fluent{static_cast<std::uint32_t>(i)};
  }

  std::optional<Agent> resolve_agent(const Token &t) {
    if (t.type != Token::Type::Ident) {
      error(t, "expected an agent name");
      return std::nullopt;
    }
    std::int64_t i = m_problem.find_agent(t.text);
    if (i < 0) {
      error(t, "undeclared agent '" + t.text + "'");
      return std::nullopt;
    }
    return Agent{static_cast<std::uint32_t>(i)};
  }

  // formula := imp_expr; imp right-assoc, or/and left-assoc, not > and > or
  std::optional<BeliefFormula> parse_formula() { return parse_imp(); }

  std::optional<BeliefFormula> parse_imp() {
    auto lhs = parse_or();
    if (!lhs)
      return std::nullopt;
    if (is_keyword(peek(), "imp")) {
      take();
      auto rhs = parse_imp();
      if (!rhs)
        return std::nullopt;
      return BeliefFormula::implication(std::move(*lhs), std::move(*rhs));
    }
    return lhs;
  }

  std::optional<BeliefFormula> parse_or() {
    auto lhs = parse_and();
    if (!lhs)
      return std::nullopt;
    while (is_keyword(peek(), "or")) {
      take();
      auto rhs = parse_and();
      if (!rhs)
        return std::nullopt;
      lhs = BeliefFormula::disjunction(std::move(*lhs), std::move(*rhs));
    }
    return lhs;
  }

  std::optional<BeliefFormula> parse_and() {
    auto lhs = parse_unary();
    if (!lhs)
      return std::nullopt;
    while (is_keyword(peek(), "and")) {
      take();
      auto rhs = parse_unary();
      if (!rhs)
        return std::nullopt;
      lhs = BeliefFormula::conjunction(std::move(*lhs), std::move(*rhs));
    }
    return lhs;
  }

  std::optional<BeliefFormula> parse_unary() {
    if (is_keyword(peek(), "not") || peek().type == Token::Type::Minus) {
      take();
      auto inner = parse_unary();
      if (!inner)
        return std::nullopt;
      // `not` before a bare fluent canonicalizes to a negative literal
      if (inner->kind() == BeliefFormula::Kind::Literal)
        return BeliefFormula::literal(inner->fluent(), !inner->positive());
      return BeliefFormula::negation(std::move(*inner));
    }
    return parse_primary();
  }

  std::optional<BeliefFormula> parse_primary() {
    const Token &t = peek();
    if (t.type == Token::Type::LParen) {
      take();
      auto inner = parse_formula();
      if (!inner)
        return std::nullopt;
      if (!expect(Token::Type::RParen, "')'"))
        return std::nullopt;
      return inner;
    }
    if (is_keyword(t, "B")) {
      take();
      if (!expect(Token::Type::LParen, "'(' after B"))
        return std::nullopt;
      auto agent = resolve_agent(take());
      if (!agent)
        return std::nullopt;
      if (!expect(Token::Type::Comma, "','"))
        return std::nullopt;
      auto inner = parse_formula();
      if (!inner)
        return std::nullopt;
      if (!expect(Token::Type::RParen, "')'"))
        return std::nullopt;
      return BeliefFormula::believes(*agent, std::move(*inner));
    }
    if (is_keyword(t, "C")) {
      take();
      if (!expect(Token::Type::LParen, "'(' after C"))
        return std::nullopt;
      if (!expect(Token::Type::LBracket, "'['"))
        return std::nullopt;
      std::vector<Agent> group;
      while (true) {
        auto agent = resolve_agent(take());
        if (!agent)
          return std::nullopt;
        group.push_back(*agent);
        if (peek().type == Token::Type::Comma) {
          take();
          continue;
        }
        break;
      }
      if (!expect(Token::Type::RBracket, "']'"))
        return std::nullopt;
      if (!expect(Token::Type::Comma, "','"))
        return std::nullopt;
      auto inner = parse_formula();
      if (!inner)
        return std::nullopt;
      if (!expect(Token::Type::RParen, "')'"))
        return std::nullopt;
      return BeliefFormula::common(std::move(group), std::move(*inner));
    }
    if (t.type == Token::Type::Ident && !kReserved.count(t.text)) {
      take();
      auto fluent = resolve_fluent(t);
      if (!fluent)
        return std::nullopt;
      return BeliefFormula::literal(*fluent);
    }
    error(t, "expected a formula");
    return std::nullopt;
  }

  void parse_top_formula(std::vector<BeliefFormula> &sink,
                         const Token *&span) {
    const Token &kw = take();
    if (span == nullptr)
      span = &kw;
    auto formula = parse_formula();
    if (!formula) {
      recover_statement();
      return;
    }
    if (!expect(Token::Type::Semi, "';'")) {
      recover_statement();
      return;
    }
    sink.push_back(std::move(*formula));
  }

  std::optional<FluentLiteral> parse_effect_literal() {
    bool positive = true;
    while (is_keyword(peek(), "not") || peek().type == Token::Type::Minus) {
      take();
      positive = !positive;
    }
    const Token &t = take();
    if (t.type != Token::Type::Ident) {
      error(t, "expected a fluent name in the effect list");
      return std::nullopt;
    }
    auto fluent = resolve_fluent(t);
    if (!fluent)
      return std::nullopt;
    return FluentLiteral{*fluent, positive};
  }

  std::vector<Agent> parse_agent_list() {
    std::vector<Agent> agents;
    while (true) {
      auto agent = resolve_agent(take());
      if (agent)
        agents.push_back(*agent);
      if (peek().type == Token::Type::Comma) {
        take();
        continue;
      }
      return agents;
    }
  }

  void parse_action() {
    take(); // 'action'
    const Token name = take();
    bool name_ok = true;
    if (name.type != Token::Type::Ident || kReserved.count(name.text)) {
      error(name, "expected an action name");
      name_ok = false;
    } else {
      for (const Action &a : m_problem.actions)
        if (a.name() == name.text) {
          error(name, "action '" + name.text + "' is already declared");
          name_ok = false;
        }
    }
    if (!expect(Token::Type::LBrace, "'{'")) {
      recover_top();
      return;
    }

    std::optional<std::string> type;
    std::vector<FluentLiteral> effects;
    bool has_effects = false;
    std::optional<Fluent> sensed;
    std::optional<BeliefFormula> content;
    std::optional<BeliefFormula> pre;
    std::vector<Agent> full, partial;
    bool has_obs = false;

    while (peek().type != Token::Type::RBrace &&
           peek().type != Token::Type::End) {
      const Token &field = peek();
      if (is_keyword(field, "type")) {
        take();
        const Token &value = take();
        if (is_keyword(value, "ontic") || is_keyword(value, "sensing") ||
            is_keyword(value, "announcement"))
          type = value.text;
        else
          error(value, "expected ontic, sensing, or announcement");
        if (!expect(Token::Type::Semi, "';'"))
          recover_statement();
      } else if (is_keyword(field, "effect")) {
        take();
        has_effects = true;
        if (peek().type != Token::Type::Semi) {
          while (true) {
            auto lit = parse_effect_literal();
            if (lit)
              effects.push_back(*lit);
            if (peek().type == Token::Type::Comma) {
              take();
              continue;
            }
            break;
          }
        }
        if (!expect(Token::Type::Semi, "';'"))
          recover_statement();
      } else if (is_keyword(field, "senses")) {
        take();
        const Token &t = take();
        if (t.type == Token::Type::Ident)
          sensed = resolve_fluent(t);
        else
          error(t, "expected a fluent name after senses");
        if (!expect(Token::Type::Semi, "';'"))
          recover_statement();
      } else if (is_keyword(field, "announces")) {
        take();
        content = parse_formula();
        if (!expect(Token::Type::Semi, "';'"))
          recover_statement();
      } else if (is_keyword(field, "pre")) {
        take();
        pre = parse_formula();
        if (!expect(Token::Type::Semi, "';'"))
          recover_statement();
      } else if (is_keyword(field, "obs")) {
        take();
        has_obs = true;
        while (is_keyword(peek(), "full") || is_keyword(peek(), "partial")) {
          bool is_full = peek().text == "full";
          take();
          if (!expect(Token::Type::Equals, "'='")) {
            recover_statement();
            break;
          }
          std::vector<Agent> agents = parse_agent_list();
          (is_full ? full : partial) = std::move(agents);
        }
        if (!expect(Token::Type::Semi, "';'"))
          recover_statement();
      } else {
        error(field, "unknown action field '" + field.text + "'");
        recover_statement();
      }
    }
    expect(Token::Type::RBrace, "'}'");

    if (!name_ok)
      return;
    if (!type) {
      error(name, "action '" + name.text + "' is missing its type");
      return;
    }
    if (!has_obs)
      warning(name, "action '" + name.text +
                        "' has no obs clause; every agent is oblivious");

    ObservabilityFrame frame;
    try {
      frame = ObservabilityFrame::make(std::move(full), std::move(partial));
    } catch (const std::invalid_argument &e) {
      error(name, e.what());
      return;
    }

    try {
      if (*type == "ontic") {
        if (sensed || content) {
          error(name, "ontic action cannot have senses/announces");
          return;
        }
        m_problem.actions.push_back(Action::ontic(
            name.text, std::move(effects), std::move(pre), std::move(frame)));
      } else if (*type == "sensing") {
        if (has_effects || content || !sensed) {
          error(name, "sensing action needs exactly a senses field");
          return;
        }
        m_problem.actions.push_back(Action::sensing(
            name.text, *sensed, std::move(pre), std::move(frame)));
      } else {
        if (has_effects || sensed || !content) {
          error(name, "announcement action needs exactly an announces field");
          return;
        }
        m_problem.actions.push_back(
            Action::announcement(name.text, std::move(*content),
                                 std::move(pre), std::move(frame)));
      }
    } catch (const std::invalid_argument &e) {
      error(name, e.what());
    }
  }

  std::vector<Token> m_tokens;
  std::vector<Diagnostic> &m_diags;
  std::size_t m_pos = 0;
  EpistemicProblem m_problem;
  const Token *m_initially_span = nullptr;
  const Token *m_goal_span = nullptr;
};

// ---- formula and problem printing ------------------------------------------

// precedence: imp=1 < or=2 < and=3 < not=4 < atoms/modals=5
int formula_prec(const BeliefFormula &f) {
  switch (f.kind()) {
  case BeliefFormula::Kind::Implies:
    return 1;
  case BeliefFormula::Kind::Or:
    return 2;
  case BeliefFormula::Kind::And:
    return 3;
  case BeliefFormula::Kind::Not:
    return 4;
  case BeliefFormula::Kind::Literal:
    return f.positive() ? 5 : 4;
  default:
    return 5;
  }
}

void print_formula(std::ostream &out, const BeliefFormula &f,
                   const EpistemicProblem &problem, int min_prec) {
  const int prec = formula_prec(f);
  if (prec < min_prec) {
    out << "(";
    print_formula(out, f, problem, 1);
    out << ")";
    return;
  }
  switch (f.kind()) {
  case BeliefFormula::Kind::Literal:
    if (!f.positive())
      out << "not ";
    out << problem.fluent_names.at(f.fluent().index);
    return;
  case BeliefFormula::Kind::Not:
    out << "not ";
    print_formula(out, f.lhs(), problem, 5);
    return;
  case BeliefFormula::Kind::And:
    print_formula(out, f.lhs(), problem, 3);
    out << " and ";
    print_formula(out, f.rhs(), problem, 4);
    return;
  case BeliefFormula::Kind::Or:
    print_formula(out, f.lhs(), problem, 2);
    out << " or ";
    print_formula(out, f.rhs(), problem, 3);
    return;
  case BeliefFormula::Kind::Implies:
    print_formula(out, f.lhs(), problem, 2);
    out << " imp ";
    print_formula(out, f.rhs(), problem, 1);
    return;
  case BeliefFormula::Kind::Believes:
    out << "B(" << problem.agent_names.at(f.agent().index) << ", ";
    print_formula(out, f.lhs(), problem, 1);
    out << ")";
    return;
  case BeliefFormula::Kind::Common: {
    out << "C([";
    for (std::size_t i = 0; i < f.group().size(); ++i) {
      if (i)
        out << ",";
      out << problem.agent_names.at(f.group()[i].index);
    }
    out << "], ";
    print_formula(out, f.lhs(), problem, 1);
    out << ")";
    return;
  }
  }
}

void print_agent_list(std::ostream &out, const std::vector<Agent> &agents,
                      const EpistemicProblem &problem) {
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (i)
      out << ",";
    out << problem.agent_names.at(agents[i].index);
  }
}

} // namespace

ParseResult parse_problem(const DomainSource &src) {
  ParseResult result;
  Lexer lexer(src.text, result.diagnostics);
  std::vector<Token> tokens = lexer.run();
  Parser parser(std::move(tokens), result.diagnostics);
  EpistemicProblem problem = parser.run();
  if (result.has_errors())
    return result;

  try {
    problem.validate();
  } catch (const std::invalid_argument &e) {
    result.diagnostics.push_back(
        {Diagnostic::Severity::Error, e.what(), 1, 1, 0});
    return result;
  }

  // The initial specification must pin down a finite structure.
  try {
    initial_state(problem);
  } catch (const std::invalid_argument &e) {
    Diagnostic d{Diagnostic::Severity::Error, e.what(), 1, 1, 0};
    if (const Token *t = parser.initially_span()) {
      d.line = t->line;
      d.column = t->column;
      d.length = static_cast<std::uint32_t>(t->text.size());
    }
    result.diagnostics.push_back(std::move(d));
    return result;
  }

  result.problem = std::move(problem);
  return result;
}

std::string serialize_problem(const EpistemicProblem &problem) {
  std::ostringstream out;
  for (const std::string &name : problem.fluent_names)
    out << "fluent " << name << ";\n";
  for (const std::string &name : problem.agent_names)
    out << "agent " << name << ";\n";

  for (const Action &a : problem.actions) {
    out << "action " << a.name() << " {\n";
    switch (a.kind()) {
    case Action::Kind::Ontic:
      out << "  type ontic;\n  effect ";
      for (std::size_t i = 0; i < a.effects().size(); ++i) {
        if (i)
          out << ", ";
        if (!a.effects()[i].positive)
          out << "not ";
        out << problem.fluent_names.at(a.effects()[i].fluent.index);
      }
      out << ";\n";
      break;
    case Action::Kind::Sensing:
      out << "  type sensing;\n  senses "
          << problem.fluent_names.at(a.sensed().index) << ";\n";
      break;
    case Action::Kind::Announcement:
      out << "  type announcement;\n  announces ";
      print_formula(out, a.content(), problem, 1);
      out << ";\n";
      break;
    }
    if (a.precondition()) {
      out << "  pre ";
      print_formula(out, *a.precondition(), problem, 1);
      out << ";\n";
    }
    const auto &frame = a.frame();
    if (!frame.fully_observant.empty() || !frame.partially_observant.empty()) {
      out << "  obs";
      if (!frame.fully_observant.empty()) {
        out << " full=";
        print_agent_list(out, frame.fully_observant, problem);
      }
      if (!frame.partially_observant.empty()) {
        out << " partial=";
        print_agent_list(out, frame.partially_observant, problem);
      }
      out << ";\n";
    }
    out << "}\n";
  }

  for (const BeliefFormula &f : problem.initial) {
    out << "initially ";
    print_formula(out, f, problem, 1);
    out << ";\n";
  }
  for (const BeliefFormula &f : problem.goal) {
    out << "goal ";
    print_formula(out, f, problem, 1);
    out << ";\n";
  }
  return out.str();
}

} // namespace epiplan
