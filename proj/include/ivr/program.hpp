#pragma once

// Guarded-command programs: variables over bounded integer intervals,
// probabilistic commands and an init expression.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ivr/errors.hpp"

namespace ivr {

struct Domain {
  std::int64_t lower = 0;
  std::int64_t upper = 0;

  std::uint64_t size() const { return static_cast<std::uint64_t>(upper - lower) + 1; }
  bool contains(std::int64_t v) const { return v >= lower && v <= upper; }
  friend bool operator==(const Domain&, const Domain&) = default;
};

struct VarDecl {
  std::string name;
  Domain domain;
  std::optional<std::int64_t> initial;  // `init <value>` on the declaration
  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

enum class ExprKind {
  IntLit,
  BoolLit,
  Var,
  Neg,
  Not,
  Add,
  Sub,
  Mul,
  Div,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind;
  std::int64_t value = 0;  // IntLit value, BoolLit 0/1
  std::size_t var = 0;     // Var
  ExprPtr lhs;
  ExprPtr rhs;

  bool is_boolean() const;
};

namespace expr {
ExprPtr integer(std::int64_t v);
ExprPtr boolean(bool b);
ExprPtr var(std::size_t index);
ExprPtr unary(ExprKind kind, ExprPtr operand);
ExprPtr binary(ExprKind kind, ExprPtr lhs, ExprPtr rhs);
ExprPtr eq(std::size_t var, std::int64_t value);
/// Left-nested conjunction; `true` when empty.
ExprPtr all_of(const std::vector<ExprPtr>& parts);
/// Left-nested disjunction; `false` when empty.
ExprPtr any_of(const std::vector<ExprPtr>& parts);
bool same(const ExprPtr& a, const ExprPtr& b);
}  // namespace expr

struct Assign {
  std::size_t var;
  ExprPtr value;
};

struct Branch {
  double probability;
  std::vector<Assign> updates;
};

struct Command {
  std::string action;
  ExprPtr guard;
  std::vector<Branch> branches;
};

struct Program {
  std::vector<VarDecl> vars;
  std::vector<Command> commands;
  ExprPtr init;
  bool has_init_block = false;

  std::optional<std::size_t> find_var(std::string_view name) const;
  /// Same program with ι replaced; written as an init block.
  Program with_init(ExprPtr init) const;
};

/// Total map variable index -> value.
struct Evaluation {
  std::vector<std::int64_t> values;

  std::int64_t operator[](std::size_t v) const { return values[v]; }
  friend bool operator==(const Evaluation&, const Evaluation&) = default;
  friend auto operator<=>(const Evaluation&, const Evaluation&) = default;
};

using Value = std::variant<std::int64_t, bool>;

Program parse(std::string_view source);
/// Type and consistency checks; parse() already applies them.
void validate(const Program& program);
std::string to_source(const Program& program);
std::string to_string(const Program& program, const ExprPtr& e);
bool structurally_equal(const Program& a, const Program& b);

Value eval_expr(const ExprPtr& e, const Evaluation& eta);
bool eval_bool(const ExprPtr& e, const Evaluation& eta);
std::int64_t eval_int(const ExprPtr& e, const Evaluation& eta);

}  // namespace ivr
