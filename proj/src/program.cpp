#include "ivr/program.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace ivr {

bool Expr::is_boolean() const {
  switch (kind) {
    case ExprKind::BoolLit:
    case ExprKind::Not:
    case ExprKind::Eq:
    case ExprKind::Ne:
    case ExprKind::Lt:
    case ExprKind::Le:
    case ExprKind::Gt:
    case ExprKind::Ge:
    case ExprKind::And:
    case ExprKind::Or:
      return true;
    default:
      return false;
  }
}

namespace expr {

ExprPtr integer(std::int64_t v) {
  return std::make_shared<const Expr>(Expr{ExprKind::IntLit, v, 0, nullptr, nullptr});
}

ExprPtr boolean(bool b) {
  return std::make_shared<const Expr>(Expr{ExprKind::BoolLit, b ? 1 : 0, 0, nullptr, nullptr});
}

ExprPtr var(std::size_t index) {
  return std::make_shared<const Expr>(Expr{ExprKind::Var, 0, index, nullptr, nullptr});
}

ExprPtr unary(ExprKind kind, ExprPtr operand) {
  return std::make_shared<const Expr>(Expr{kind, 0, 0, std::move(operand), nullptr});
}

ExprPtr binary(ExprKind kind, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(Expr{kind, 0, 0, std::move(lhs), std::move(rhs)});
}

ExprPtr eq(std::size_t v, std::int64_t value) {
  return binary(ExprKind::Eq, var(v), integer(value));
}

ExprPtr all_of(const std::vector<ExprPtr>& parts) {
  if (parts.empty()) return boolean(true);
  ExprPtr out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out = binary(ExprKind::And, out, parts[i]);
  return out;
}

ExprPtr any_of(const std::vector<ExprPtr>& parts) {
  if (parts.empty()) return boolean(false);
  ExprPtr out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out = binary(ExprKind::Or, out, parts[i]);
  return out;
}

bool same(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->value != b->value || a->var != b->var) return false;
  return same(a->lhs, b->lhs) && same(a->rhs, b->rhs);
}

}  // namespace expr

std::optional<std::size_t> Program::find_var(std::string_view name) const {
  for (std::size_t i = 0; i < vars.size(); ++i)
    if (vars[i].name == name) return i;
  return std::nullopt;
}

Program Program::with_init(ExprPtr new_init) const {
  Program p = *this;
  for (auto& v : p.vars) v.initial.reset();
  p.init = std::move(new_init);
  p.has_init_block = true;
  return p;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_expr(const Program& p, const ExprPtr& e, bool want_boolean, const std::string& where) {
  if (!e) throw ValidationError(where + ": missing expression");
  if (e->is_boolean() != want_boolean)
    throw ValidationError(where + ": expected " + (want_boolean ? "Boolean" : "integer") +
                          " expression, got " + to_string(p, e));
  switch (e->kind) {
    case ExprKind::IntLit:
    case ExprKind::BoolLit:
      return;
    case ExprKind::Var:
      if (e->var >= p.vars.size()) throw ValidationError(where + ": undeclared variable");
      return;
    case ExprKind::Neg:
      check_expr(p, e->lhs, false, where);
      return;
    case ExprKind::Not:
      check_expr(p, e->lhs, true, where);
      return;
    case ExprKind::And:
    case ExprKind::Or:
      check_expr(p, e->lhs, true, where);
      check_expr(p, e->rhs, true, where);
      return;
    default:  // arithmetic and comparisons take integer operands
      check_expr(p, e->lhs, false, where);
      check_expr(p, e->rhs, false, where);
      return;
  }
}

}  // namespace

void validate(const Program& p) {
  std::set<std::string> names;
  bool any_initial = false;
  for (const auto& v : p.vars) {
    if (!names.insert(v.name).second) throw ValidationError("duplicate declaration of " + v.name);
    if (v.domain.lower > v.domain.upper)
      throw ValidationError("empty domain for " + v.name);
    if (v.initial && !v.domain.contains(*v.initial))
      throw ValidationError("initial value of " + v.name + " outside its domain");
    any_initial = any_initial || v.initial.has_value();
  }
  if (p.has_init_block && any_initial)
    throw ValidationError("variable initialisers are not allowed together with an init block");
  check_expr(p, p.init, true, "init");

  for (std::size_t c = 0; c < p.commands.size(); ++c) {
    const auto& cmd = p.commands[c];
    const std::string where = "command " + std::to_string(c + 1);
    check_expr(p, cmd.guard, true, where + " guard");
    if (cmd.branches.empty()) throw ValidationError(where + ": no branches");
    double total = 0.0;
    for (const auto& b : cmd.branches) {
      if (!(b.probability > 0.0 && b.probability <= 1.0))
        throw ValidationError(where + ": probabilities must lie in (0,1]");
      total += b.probability;
      std::set<std::size_t> assigned;
      for (const auto& a : b.updates) {
        if (a.var >= p.vars.size()) throw ValidationError(where + ": undeclared variable");
        if (!assigned.insert(a.var).second)
          throw ValidationError(where + ": " + p.vars[a.var].name + " assigned twice");
        check_expr(p, a.value, false, where + " update");
      }
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw ValidationError(where + ": probabilities must sum to 1");
  }
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Or: return 1;
    case ExprKind::And: return 2;
    case ExprKind::Not: return 3;
    case ExprKind::Eq:
    case ExprKind::Ne:
    case ExprKind::Lt:
    case ExprKind::Le:
    case ExprKind::Gt:
    case ExprKind::Ge: return 4;
    case ExprKind::Add:
    case ExprKind::Sub: return 5;
    case ExprKind::Mul:
    case ExprKind::Div: return 6;
    case ExprKind::Neg: return 7;
    default: return 8;
  }
}

const char* symbol(ExprKind k) {
  switch (k) {
    case ExprKind::Or: return "|";
    case ExprKind::And: return "&";
    case ExprKind::Eq: return "=";
    case ExprKind::Ne: return "!=";
    case ExprKind::Lt: return "<";
    case ExprKind::Le: return "<=";
    case ExprKind::Gt: return ">";
    case ExprKind::Ge: return ">=";
    case ExprKind::Add: return "+";
    case ExprKind::Sub: return "-";
    case ExprKind::Mul: return "*";
    case ExprKind::Div: return "/";
    default: return "?";
  }
}

void print(std::ostream& os, const Program& p, const ExprPtr& e) {
  const auto wrapped = [&](const ExprPtr& sub, bool parens) {
    if (parens) os << '(';
    print(os, p, sub);
    if (parens) os << ')';
  };
  const int prec = precedence(e->kind);
  switch (e->kind) {
    case ExprKind::IntLit:
      os << e->value;
      return;
    case ExprKind::BoolLit:
      os << (e->value ? "true" : "false");
      return;
    case ExprKind::Var:
      os << (e->var < p.vars.size() ? p.vars[e->var].name : "?" + std::to_string(e->var));
      return;
    case ExprKind::Neg:
    case ExprKind::Not:
      os << (e->kind == ExprKind::Neg ? "-" : "!");
      wrapped(e->lhs, precedence(e->lhs->kind) < prec ||
                          (e->kind == ExprKind::Neg && e->lhs->kind == ExprKind::IntLit));
      return;
    default: {
      // Relations do not chain, so an equal-precedence left operand needs parentheses too.
      const bool relation = prec == 4;
      wrapped(e->lhs, relation ? precedence(e->lhs->kind) <= prec : precedence(e->lhs->kind) < prec);
      os << symbol(e->kind);
      wrapped(e->rhs, precedence(e->rhs->kind) <= prec);
      return;
    }
  }
}

std::string format_probability(double p) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, p);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string to_string(const Program& p, const ExprPtr& e) {
  std::ostringstream os;
  print(os, p, e);
  return os.str();
}

std::string to_source(const Program& p) {
  std::ostringstream os;
  for (const auto& v : p.vars) {
    os << "var " << v.name << " : [" << v.domain.lower << ".." << v.domain.upper << "]";
    if (v.initial) os << " init " << *v.initial;
    os << ";\n";
  }
  if (p.has_init_block) {
    os << "\ninit ";
    print(os, p, p.init);
    os << " endinit\n";
  }
  if (!p.commands.empty()) os << '\n';
  for (const auto& c : p.commands) {
    os << '[' << c.action << "] ";
    print(os, p, c.guard);
    os << " -> ";
    for (std::size_t b = 0; b < c.branches.size(); ++b) {
      const auto& br = c.branches[b];
      if (b > 0) os << " + ";
      os << format_probability(br.probability) << ':';
      if (br.updates.empty()) os << "true";
      for (std::size_t u = 0; u < br.updates.size(); ++u) {
        if (u > 0) os << '&';
        os << '(' << p.vars[br.updates[u].var].name << "'=";
        print(os, p, br.updates[u].value);
        os << ')';
      }
    }
    os << ";\n";
  }
  return os.str();
}

bool structurally_equal(const Program& a, const Program& b) {
  if (a.vars != b.vars || a.has_init_block != b.has_init_block) return false;
  if (!expr::same(a.init, b.init)) return false;
  if (a.commands.size() != b.commands.size()) return false;
  for (std::size_t c = 0; c < a.commands.size(); ++c) {
    const auto& x = a.commands[c];
    const auto& y = b.commands[c];
    if (x.action != y.action || !expr::same(x.guard, y.guard)) return false;
    if (x.branches.size() != y.branches.size()) return false;
    for (std::size_t i = 0; i < x.branches.size(); ++i) {
      const auto& bx = x.branches[i];
      const auto& by = y.branches[i];
      if (bx.probability != by.probability || bx.updates.size() != by.updates.size()) return false;
      for (std::size_t u = 0; u < bx.updates.size(); ++u) {
        if (bx.updates[u].var != by.updates[u].var) return false;
        if (!expr::same(bx.updates[u].value, by.updates[u].value)) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Evaluation

std::int64_t eval_int(const ExprPtr& e, const Evaluation& eta) {
  switch (e->kind) {
    case ExprKind::IntLit: return e->value;
    case ExprKind::Var:
      if (e->var >= eta.values.size()) throw EvalError("evaluation does not cover variable");
      return eta.values[e->var];
    case ExprKind::Neg: return -eval_int(e->lhs, eta);
    case ExprKind::Add: return eval_int(e->lhs, eta) + eval_int(e->rhs, eta);
    case ExprKind::Sub: return eval_int(e->lhs, eta) - eval_int(e->rhs, eta);
    case ExprKind::Mul: return eval_int(e->lhs, eta) * eval_int(e->rhs, eta);
    case ExprKind::Div: {
      const std::int64_t d = eval_int(e->rhs, eta);
      if (d == 0) throw EvalError("division by zero");
      return eval_int(e->lhs, eta) / d;
    }
    default: throw EvalError("expected an integer expression");
  }
}

bool eval_bool(const ExprPtr& e, const Evaluation& eta) {
  switch (e->kind) {
    case ExprKind::BoolLit: return e->value != 0;
    case ExprKind::Not: return !eval_bool(e->lhs, eta);
    case ExprKind::And: return eval_bool(e->lhs, eta) && eval_bool(e->rhs, eta);
    case ExprKind::Or: return eval_bool(e->lhs, eta) || eval_bool(e->rhs, eta);
    case ExprKind::Eq: return eval_int(e->lhs, eta) == eval_int(e->rhs, eta);
    case ExprKind::Ne: return eval_int(e->lhs, eta) != eval_int(e->rhs, eta);
    case ExprKind::Lt: return eval_int(e->lhs, eta) < eval_int(e->rhs, eta);
    case ExprKind::Le: return eval_int(e->lhs, eta) <= eval_int(e->rhs, eta);
    case ExprKind::Gt: return eval_int(e->lhs, eta) > eval_int(e->rhs, eta);
    case ExprKind::Ge: return eval_int(e->lhs, eta) >= eval_int(e->rhs, eta);
    default: throw EvalError("expected a Boolean expression");
  }
}

Value eval_expr(const ExprPtr& e, const Evaluation& eta) {
  if (e->is_boolean()) return eval_bool(e, eta);
  return eval_int(e, eta);
}

}  // namespace ivr
