#pragma once

// Brute-force state-graph semantics, used as the oracle for symbolic
// construction on small instances.

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "ivr/program.hpp"

namespace ivr {

struct ExplicitModel {
  std::vector<Evaluation> states;
  std::vector<std::size_t> initial;
  /// successors[s] lists (target, probability), targets ascending.
  std::vector<std::vector<std::pair<std::size_t, double>>> successors;

  std::size_t edge_count() const;
  /// Index of an evaluation, if reachable.
  std::optional<std::size_t> find(const Evaluation& eta) const;

 private:
  friend ExplicitModel explicit_semantics(const Program&, std::size_t);
  std::map<Evaluation, std::size_t> index_;
};

/// All evaluations satisfying the program's init expression, in
/// lexicographic order of (declaration order, domain order).
std::vector<Evaluation> initial_evaluations(const Program& p, std::size_t bound);

/// Reachable DTMC from every initial evaluation. States without an enabled
/// command get a probability-1 self-loop.
ExplicitModel explicit_semantics(const Program& p, std::size_t state_bound);

}  // namespace ivr
