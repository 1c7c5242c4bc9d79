#pragma once

// MiniLang: a small imperative language with logging calls, direct
// invocations, string assignments and boolean control flow. Parsed by a
// hand-written recursive-descent parser and lowered to a ProgramModel.
//
//   unit    := { ["component" STRING] "void" IDENT "(" ")" block }
//   block   := "{" { stmt } "}"
//   stmt    := "log" "(" LEVEL "," part { "+" part } ")" ";"
//            | IDENT "(" ")" ";" | IDENT "=" STRING ";" | "return" ";"
//            | "if" "(" cond ")" block [ "else" block ]
//            | "while" "(" cond ")" block
//   cond    := "true" | "false" | [ "!" ] IDENT

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "logsynth/model.hpp"

namespace logsynth::minilang {

struct SourceUnit {
  std::string path;
  std::string text;
};

struct Stmt;
using Block = std::vector<Stmt>;

struct LogCall {
  LogLevel level = LogLevel::kInfo;
  std::vector<LogPart> parts;
  bool operator==(const LogCall&) const = default;
};
struct Invoke {
  std::string target;
  bool operator==(const Invoke&) const = default;
};
struct Assign {
  std::string var;
  std::string value;
  bool operator==(const Assign&) const = default;
};
struct If {
  Condition cond;
  Block then_block;
  std::optional<Block> else_block;
  bool operator==(const If&) const;
};
struct While {
  Condition cond;
  Block body;
  bool operator==(const While&) const;
};
struct Return {
  bool operator==(const Return&) const = default;
};

// Positions are carried for diagnostics and ignored by equality.
struct Stmt {
  std::variant<LogCall, Invoke, Assign, If, While, Return> node;
  int line = 0;
  int column = 0;

  bool operator==(const Stmt& other) const { return node == other.node; }
};

struct AstMethod {
  std::string name;
  std::optional<std::string> component;
  Block body;
  int line = 0;

  bool operator==(const AstMethod& other) const {
    return name == other.name && component == other.component && body == other.body;
  }
};

// Parses every method declaration of `source`, in order. Throws ParseError at
// the first syntax error, on invalid UTF-8, or on a duplicate method name.
std::vector<AstMethod> parse_unit(const SourceUnit& source);

// Renders methods back to MiniLang; parse_unit(print(m)) == m.
std::string print(std::span<const AstMethod> methods);

struct ParsedUnit {
  SourceUnit source;
  std::vector<AstMethod> methods;
};

// Builds the program model: one method per AstMethod (ids in input order),
// one call edge per Invoke, and a CFG per method with Entry = 0, Exit = 1 and
// one activity per non-return statement in source pre-order. Throws
// LoweringError for an unresolved callee or a duplicate method name.
ProgramModel lower_to_model(std::span<const AstMethod> methods);

// Same, across several units; fills `origins` when given.
ProgramModel lower_units(std::span<const ParsedUnit> units,
                         std::vector<StatementOrigin>* origins = nullptr);

}  // namespace logsynth::minilang
