#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "ivr/bdd.hpp"

namespace ivr::testing {

// Plain Boolean formula over bits 0..n-1, evaluated without any diagram.
struct Formula {
  enum Kind { Var, Const, Not, And, Or, Xor } kind;
  BitVar var = 0;
  bool value = false;
  std::shared_ptr<Formula> a, b;

  bool eval(std::uint64_t bits) const {
    switch (kind) {
      case Var: return (bits >> var) & 1u;
      case Const: return value;
      case Not: return !a->eval(bits);
      case And: return a->eval(bits) && b->eval(bits);
      case Or: return a->eval(bits) || b->eval(bits);
      case Xor: return a->eval(bits) != b->eval(bits);
    }
    return false;
  }

  NodeRef build(NodeTable& t) const {
    switch (kind) {
      case Var: return t.bit(var);
      case Const: return t.boolean(value);
      case Not: return t.negate(a->build(t));
      case And: return t.apply(Op::And, a->build(t), b->build(t));
      case Or: return t.apply(Op::Or, a->build(t), b->build(t));
      case Xor: return t.apply(Op::Xor, a->build(t), b->build(t));
    }
    return {};
  }
};

using FormulaPtr = std::shared_ptr<Formula>;

inline FormulaPtr random_formula(std::mt19937_64& rng, unsigned n, int depth) {
  auto f = std::make_shared<Formula>();
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 5);
  const int k = pick(rng);
  if (k <= 1) {
    if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) {
      f->kind = Formula::Const;
      f->value = rng() & 1u;
    } else {
      f->kind = Formula::Var;
      f->var = static_cast<BitVar>(std::uniform_int_distribution<unsigned>(0, n - 1)(rng));
    }
    return f;
  }
  if (k == 2) {
    f->kind = Formula::Not;
    f->a = random_formula(rng, n, depth - 1);
    return f;
  }
  f->kind = k == 3 ? Formula::And : (k == 4 ? Formula::Or : Formula::Xor);
  f->a = random_formula(rng, n, depth - 1);
  f->b = random_formula(rng, n, depth - 1);
  return f;
}

/// Bit i of the result is the formula's value on assignment i.
inline std::vector<bool> truth_table(const Formula& f, unsigned n) {
  std::vector<bool> out(std::size_t{1} << n);
  for (std::uint64_t a = 0; a < out.size(); ++a) out[a] = f.eval(a);
  return out;
}

inline Assignment assignment(std::uint64_t bits, unsigned n) {
  Assignment a;
  for (unsigned i = 0; i < n; ++i) a[i] = (bits >> i) & 1u;
  return a;
}

/// Values of a diagram on every assignment to bits 0..n-1.
inline std::vector<Terminal> tabulate(const NodeTable& t, const NodeRef& f, unsigned n) {
  std::vector<Terminal> out;
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << n); ++a) out.push_back(t.eval(f, assignment(a, n)));
  return out;
}

}  // namespace ivr::testing
