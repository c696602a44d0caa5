#pragma once

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace planqa {

/// Parse failure with source position. `expected` names the token class
/// the parser was looking for when it gave up.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& message)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

/// A literal over schema parameters: arguments starting with '?' are
/// variables, anything else is a constant.
struct Literal {
  std::string predicate;
  std::vector<std::string> args;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

struct PredicateDecl {
  std::string name;
  std::vector<std::string> parameter_types;  // "object" when untyped

  friend bool operator==(const PredicateDecl&, const PredicateDecl&) = default;
};

struct TypedName {
  std::string name;
  std::string type;  // "object" when untyped

  friend bool operator==(const TypedName&, const TypedName&) = default;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> parameters;
  std::vector<Literal> preconditions;  // canonically sorted
  std::vector<Literal> add_effects;    // canonically sorted
  std::vector<Literal> delete_effects; // canonically sorted

  friend bool operator==(const ActionSchema&, const ActionSchema&) = default;
};

/// Schemas keep declaration order: grounding and the planner's tie-break
/// both follow it.
struct Domain {
  std::string name;
  std::vector<std::string> types;       // flat, excludes the implicit "object"
  std::vector<TypedName> constants;
  std::vector<PredicateDecl> predicates;
  std::vector<ActionSchema> schemas;

  const PredicateDecl* find_predicate(std::string_view pred) const {
    for (const auto& p : predicates)
      if (p.name == pred) return &p;
    return nullptr;
  }

  friend bool operator==(const Domain&, const Domain&) = default;
};

struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;

  std::string str() const {
    std::string out = predicate;
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ", ";
      out += args[i];
    }
    out += ')';
    return out;
  }

  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
  friend auto operator<=>(const GroundAtom&, const GroundAtom&) = default;
};

struct Problem {
  std::string name;
  std::string domain_name;
  std::vector<TypedName> objects;
  std::vector<GroundAtom> init;  // canonically sorted
  std::vector<GroundAtom> goal;  // canonically sorted

  friend bool operator==(const Problem&, const Problem&) = default;
};

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace detail {

struct Token {
  enum Kind { LParen, RParen, Symbol, End } kind = End;
  std::string text;  // lowercased
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(current_.line, current_.column, message);
  }

 private:
  void advance() {
    skip_space_and_comments();
    current_.line = line_;
    current_.column = column_;
    if (pos_ >= text_.size()) {
      current_.kind = Token::End;
      current_.text.clear();
      return;
    }
    char c = text_[pos_];
    if (c == '(') {
      consume();
      current_.kind = Token::LParen;
      current_.text = "(";
      return;
    }
    if (c == ')') {
      consume();
      current_.kind = Token::RParen;
      current_.text = ")";
      return;
    }
    std::string sym;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d)))
        break;
      sym += static_cast<char>(std::tolower(static_cast<unsigned char>(d)));
      consume();
    }
    current_.kind = Token::Symbol;
    current_.text = std::move(sym);
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') consume();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        consume();
      } else {
        break;
      }
    }
  }

  void consume() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  Token current_;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) {}

  Domain parse_domain() {
    Domain d;
    expect_lparen();
    expect_keyword("define");
    expect_lparen();
    expect_keyword("domain");
    d.name = expect_symbol("domain name");
    expect_rparen();

    std::unordered_set<std::string> predicate_names;
    while (lex_.peek().kind == Token::LParen) {
      expect_lparen();
      std::string section = expect_symbol("section keyword");
      if (section == ":requirements") {
        parse_requirements();
      } else if (section == ":types") {
        parse_name_list_into(d.types);
      } else if (section == ":constants") {
        d.constants = parse_typed_list(d, "constant");
      } else if (section == ":predicates") {
        while (lex_.peek().kind == Token::LParen) {
          d.predicates.push_back(parse_predicate_decl(d));
          if (!predicate_names.insert(d.predicates.back().name).second)
            lex_.fail("duplicate predicate '" + d.predicates.back().name + "'");
        }
        expect_rparen();
      } else if (section == ":action") {
        d.schemas.push_back(parse_action(d));
      } else {
        lex_.fail("unknown domain section '" + section + "'");
      }
    }
    expect_rparen();
    expect_end();
    return d;
  }

  Problem parse_problem(const Domain& domain) {
    Problem p;
    expect_lparen();
    expect_keyword("define");
    expect_lparen();
    expect_keyword("problem");
    p.name = expect_symbol("problem name");
    expect_rparen();

    std::unordered_map<std::string, std::string> object_types;
    for (const auto& c : domain.constants) object_types[c.name] = c.type;

    while (lex_.peek().kind == Token::LParen) {
      expect_lparen();
      std::string section = expect_symbol("section keyword");
      if (section == ":domain") {
        p.domain_name = expect_symbol("domain name");
        expect_rparen();
      } else if (section == ":requirements") {
        parse_requirements();
      } else if (section == ":objects") {
        p.objects = parse_typed_list(domain, "object");
        for (const auto& o : p.objects) {
          if (!object_types.emplace(o.name, o.type).second)
            lex_.fail("object '" + o.name + "' declared twice");
        }
      } else if (section == ":init") {
        while (lex_.peek().kind == Token::LParen)
          p.init.push_back(parse_ground_atom(domain, object_types));
        expect_rparen();
      } else if (section == ":goal") {
        parse_goal(domain, object_types, p.goal);
        expect_rparen();
      } else {
        lex_.fail("unknown problem section '" + section + "'");
      }
    }
    expect_rparen();
    expect_end();

    std::sort(p.init.begin(), p.init.end());
    p.init.erase(std::unique(p.init.begin(), p.init.end()), p.init.end());
    std::sort(p.goal.begin(), p.goal.end());
    p.goal.erase(std::unique(p.goal.begin(), p.goal.end()), p.goal.end());
    return p;
  }

 private:
  void parse_requirements() {
    while (lex_.peek().kind == Token::Symbol) {
      std::string req = lex_.take().text;
      if (req != ":strips" && req != ":typing")
        lex_.fail("unsupported requirement '" + req + "' (only :strips and :typing)");
    }
    expect_rparen();
  }

  void parse_name_list_into(std::vector<std::string>& out) {
    while (lex_.peek().kind == Token::Symbol) out.push_back(lex_.take().text);
    expect_rparen();
  }

  // Typed list "a b - t c" with trailing untyped names defaulting to object.
  std::vector<TypedName> parse_typed_list(const Domain& d, const char* what) {
    std::vector<TypedName> out;
    std::vector<std::string> pending;
    while (lex_.peek().kind == Token::Symbol) {
      std::string sym = lex_.take().text;
      if (sym == "-") {
        std::string type = expect_symbol("type name");
        check_type(d, type);
        for (auto& n : pending) out.push_back({std::move(n), type});
        pending.clear();
      } else {
        pending.push_back(std::move(sym));
      }
    }
    for (auto& n : pending) out.push_back({std::move(n), "object"});
    if (out.empty() && lex_.peek().kind == Token::RParen) {
      // empty list is fine
    }
    expect_rparen();
    (void)what;
    return out;
  }

  PredicateDecl parse_predicate_decl(const Domain& d) {
    expect_lparen();
    PredicateDecl decl;
    decl.name = expect_symbol("predicate name");
    std::vector<std::string> pending;
    while (lex_.peek().kind == Token::Symbol) {
      std::string sym = lex_.take().text;
      if (sym == "-") {
        std::string type = expect_symbol("type name");
        check_type(d, type);
        for (std::size_t i = 0; i < pending.size(); ++i) decl.parameter_types.push_back(type);
        pending.clear();
      } else {
        if (sym.empty() || sym[0] != '?') lex_.fail("expected parameter variable, got '" + sym + "'");
        pending.push_back(sym);
      }
    }
    for (std::size_t i = 0; i < pending.size(); ++i) decl.parameter_types.push_back("object");
    expect_rparen();
    return decl;
  }

  ActionSchema parse_action(const Domain& d) {
    ActionSchema a;
    a.name = expect_symbol("action name");
    std::unordered_set<std::string> param_names;
    std::unordered_set<std::string> constant_names;
    for (const auto& c : d.constants) constant_names.insert(c.name);

    while (lex_.peek().kind == Token::Symbol) {
      std::string key = lex_.take().text;
      if (key == ":parameters") {
        expect_lparen();
        a.parameters = parse_typed_list(d, "parameter");
        for (const auto& p : a.parameters) {
          if (p.name.empty() || p.name[0] != '?')
            lex_.fail("parameter '" + p.name + "' must start with '?'");
          if (!param_names.insert(p.name).second)
            lex_.fail("parameter '" + p.name + "' declared twice");
        }
      } else if (key == ":precondition") {
        parse_conjunction(d, param_names, constant_names, a.preconditions, nullptr);
      } else if (key == ":effect") {
        parse_conjunction(d, param_names, constant_names, a.add_effects, &a.delete_effects);
      } else {
        lex_.fail("unknown action keyword '" + key + "'");
      }
    }
    expect_rparen();

    std::sort(a.preconditions.begin(), a.preconditions.end());
    a.preconditions.erase(std::unique(a.preconditions.begin(), a.preconditions.end()),
                          a.preconditions.end());
    std::sort(a.add_effects.begin(), a.add_effects.end());
    a.add_effects.erase(std::unique(a.add_effects.begin(), a.add_effects.end()),
                        a.add_effects.end());
    std::sort(a.delete_effects.begin(), a.delete_effects.end());
    a.delete_effects.erase(std::unique(a.delete_effects.begin(), a.delete_effects.end()),
                           a.delete_effects.end());
    for (const auto& lit : a.add_effects) {
      if (std::binary_search(a.delete_effects.begin(), a.delete_effects.end(), lit))
        lex_.fail("action '" + a.name + "' both adds and deletes " + lit.predicate);
    }
    return a;
  }

  // (and L...) | L | (and), with (not L) allowed when deletes != nullptr.
  void parse_conjunction(const Domain& d, const std::unordered_set<std::string>& params,
                         const std::unordered_set<std::string>& constants,
                         std::vector<Literal>& positives, std::vector<Literal>* deletes) {
    expect_lparen();
    if (lex_.peek().kind == Token::Symbol && lex_.peek().text == "and") {
      lex_.take();
      while (lex_.peek().kind == Token::LParen) {
        expect_lparen();
        parse_literal_body(d, params, constants, positives, deletes);
      }
      expect_rparen();
    } else {
      parse_literal_body(d, params, constants, positives, deletes);
    }
  }

  // Consumes everything after the literal's '(' including its ')'.
  void parse_literal_body(const Domain& d, const std::unordered_set<std::string>& params,
                          const std::unordered_set<std::string>& constants,
                          std::vector<Literal>& positives, std::vector<Literal>* deletes) {
    std::string head = expect_symbol("predicate");
    if (head == "not") {
      if (deletes == nullptr) lex_.fail("negative preconditions are not supported");
      expect_lparen();
      Literal lit = parse_literal_tail(d, params, constants);
      deletes->push_back(std::move(lit));
      expect_rparen();
      return;
    }
    positives.push_back(parse_literal_tail_with_head(d, params, constants, head));
  }

  Literal parse_literal_tail(const Domain& d, const std::unordered_set<std::string>& params,
                             const std::unordered_set<std::string>& constants) {
    std::string head = expect_symbol("predicate");
    return parse_literal_tail_with_head(d, params, constants, head);
  }

  Literal parse_literal_tail_with_head(const Domain& d,
                                       const std::unordered_set<std::string>& params,
                                       const std::unordered_set<std::string>& constants,
                                       const std::string& head) {
    const PredicateDecl* decl = d.find_predicate(head);
    if (decl == nullptr) lex_.fail("undeclared predicate '" + head + "'");
    Literal lit;
    lit.predicate = head;
    while (lex_.peek().kind == Token::Symbol) {
      std::string arg = lex_.take().text;
      if (arg[0] == '?') {
        if (!params.contains(arg))
          lex_.fail("variable '" + arg + "' does not appear in parameters");
      } else if (!constants.contains(arg)) {
        lex_.fail("'" + arg + "' is not a declared constant");
      }
      lit.args.push_back(std::move(arg));
    }
    expect_rparen();
    if (lit.args.size() != decl->parameter_types.size())
      lex_.fail("predicate '" + head + "' expects " +
                std::to_string(decl->parameter_types.size()) + " arguments, got " +
                std::to_string(lit.args.size()));
    return lit;
  }

  GroundAtom parse_ground_atom(const Domain& d,
                               const std::unordered_map<std::string, std::string>& objects) {
    expect_lparen();
    std::string head = expect_symbol("predicate");
    const PredicateDecl* decl = d.find_predicate(head);
    if (decl == nullptr) lex_.fail("undeclared predicate '" + head + "'");
    GroundAtom atom;
    atom.predicate = head;
    while (lex_.peek().kind == Token::Symbol) {
      std::string arg = lex_.take().text;
      if (!objects.contains(arg)) lex_.fail("undeclared object '" + arg + "'");
      atom.args.push_back(std::move(arg));
    }
    expect_rparen();
    if (atom.args.size() != decl->parameter_types.size())
      lex_.fail("predicate '" + head + "' expects " +
                std::to_string(decl->parameter_types.size()) + " arguments, got " +
                std::to_string(atom.args.size()));
    return atom;
  }

  void parse_goal(const Domain& d, const std::unordered_map<std::string, std::string>& objects,
                  std::vector<GroundAtom>& out) {
    expect_lparen();
    if (lex_.peek().kind == Token::Symbol && lex_.peek().text == "and") {
      lex_.take();
      while (lex_.peek().kind == Token::LParen) out.push_back(parse_ground_atom(d, objects));
      expect_rparen();
    } else {
      // single atom form: rewind is not possible, so parse inline
      std::string head = expect_symbol("predicate");
      const PredicateDecl* decl = d.find_predicate(head);
      if (decl == nullptr) lex_.fail("undeclared predicate '" + head + "'");
      GroundAtom atom;
      atom.predicate = head;
      while (lex_.peek().kind == Token::Symbol) {
        std::string arg = lex_.take().text;
        if (!objects.contains(arg)) lex_.fail("undeclared object '" + arg + "'");
        atom.args.push_back(std::move(arg));
      }
      expect_rparen();
      if (atom.args.size() != decl->parameter_types.size())
        lex_.fail("predicate '" + head + "' expects " +
                  std::to_string(decl->parameter_types.size()) + " arguments, got " +
                  std::to_string(atom.args.size()));
      out.push_back(std::move(atom));
    }
  }

  void check_type(const Domain& d, const std::string& type) {
    if (type == "object") return;
    if (std::find(d.types.begin(), d.types.end(), type) == d.types.end())
      lex_.fail("undeclared type '" + type + "'");
  }

  void expect_lparen() {
    if (lex_.peek().kind != Token::LParen) {
      if (lex_.peek().kind == Token::End)
        lex_.fail("unbalanced parentheses: expected '(' before end of input");
      lex_.fail("expected '('");
    }
    lex_.take();
  }
  void expect_rparen() {
    if (lex_.peek().kind != Token::RParen) {
      if (lex_.peek().kind == Token::End)
        lex_.fail("unbalanced parentheses: expected ')' before end of input");
      lex_.fail("expected ')'");
    }
    lex_.take();
  }
  std::string expect_symbol(const char* what) {
    if (lex_.peek().kind != Token::Symbol) {
      if (lex_.peek().kind == Token::End)
        lex_.fail(std::string("unbalanced parentheses: expected ") + what +
                  " before end of input");
      lex_.fail(std::string("expected ") + what);
    }
    return lex_.take().text;
  }
  void expect_keyword(const char* kw) {
    std::string got = expect_symbol(kw);
    if (got != kw) lex_.fail("expected '" + std::string(kw) + "', got '" + got + "'");
  }
  void expect_end() {
    if (lex_.peek().kind != Token::End) lex_.fail("trailing input after final ')'");
  }

  Lexer lex_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

inline Domain parse_domain(std::string_view text) {
  return detail::Parser(text).parse_domain();
}

/// Problems are checked against their domain: predicate arities and
/// object declarations cannot be validated without it.
inline Problem parse_problem(std::string_view text, const Domain& domain) {
  return detail::Parser(text).parse_problem(domain);
}

// ---------------------------------------------------------------------------
// Pretty printer. Output is normalized (lowercase, 2-space indent, sorted
// literal sets, explicit (and ...)); parsing it back yields an equal AST.
// ---------------------------------------------------------------------------

namespace detail {

inline void print_typed_list(std::ostream& os, const std::vector<TypedName>& list) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) os << ' ';
    os << list[i].name;
    if (list[i].type != "object") os << " - " << list[i].type;
  }
}

inline void print_literal(std::ostream& os, const Literal& lit) {
  os << '(' << lit.predicate;
  for (const auto& a : lit.args) os << ' ' << a;
  os << ')';
}

}  // namespace detail

inline std::string to_pddl(const Domain& d) {
  std::ostringstream os;
  os << "(define (domain " << d.name << ")\n";
  os << "  (:requirements :strips :typing)\n";
  if (!d.types.empty()) {
    os << "  (:types";
    for (const auto& t : d.types) os << ' ' << t;
    os << ")\n";
  }
  if (!d.constants.empty()) {
    os << "  (:constants ";
    detail::print_typed_list(os, d.constants);
    os << ")\n";
  }
  os << "  (:predicates";
  for (const auto& p : d.predicates) {
    os << "\n    (" << p.name;
    for (std::size_t i = 0; i < p.parameter_types.size(); ++i) {
      os << " ?a" << i;
      if (p.parameter_types[i] != "object") os << " - " << p.parameter_types[i];
    }
    os << ')';
  }
  os << ")\n";
  for (const auto& a : d.schemas) {
    os << "  (:action " << a.name << "\n    :parameters (";
    detail::print_typed_list(os, a.parameters);
    os << ")\n    :precondition (and";
    for (const auto& lit : a.preconditions) {
      os << ' ';
      detail::print_literal(os, lit);
    }
    os << ")\n    :effect (and";
    for (const auto& lit : a.add_effects) {
      os << ' ';
      detail::print_literal(os, lit);
    }
    for (const auto& lit : a.delete_effects) {
      os << " (not ";
      detail::print_literal(os, lit);
      os << ')';
    }
    os << "))\n";
  }
  os << ")\n";
  return os.str();
}

inline std::string to_pddl(const Problem& p) {
  std::ostringstream os;
  os << "(define (problem " << p.name << ")\n";
  os << "  (:domain " << p.domain_name << ")\n";
  os << "  (:objects ";
  detail::print_typed_list(os, p.objects);
  os << ")\n  (:init";
  for (const auto& atom : p.init) {
    os << " (" << atom.predicate;
    for (const auto& a : atom.args) os << ' ' << a;
    os << ')';
  }
  os << ")\n  (:goal (and";
  for (const auto& atom : p.goal) {
    os << " (" << atom.predicate;
    for (const auto& a : atom.args) os << ' ' << a;
    os << ')';
  }
  os << "))\n)\n";
  return os.str();
}

}  // namespace planqa
