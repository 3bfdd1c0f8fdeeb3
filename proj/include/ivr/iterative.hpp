#pragma once

// Iterative reordering: start from one family member, admit more initial
// evaluations step by step and re-sift the variable order after each build.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ivr/reorder.hpp"
#include "ivr/symbolic.hpp"

namespace ivr {

/// Per-variable admitted values, each set sorted ascending.
struct EvaluationDomain {
  std::vector<std::vector<std::int64_t>> sets;

  std::size_t size() const { return sets.size(); }
  const std::vector<std::int64_t>& operator[](std::size_t v) const { return sets[v]; }
  /// Sum of the set sizes.
  std::size_t total() const;
  bool contains(std::size_t v, std::int64_t x) const;
  friend bool operator==(const EvaluationDomain&, const EvaluationDomain&) = default;
};

enum class Selection { PiMinimal, RhoMinimal, RhoMaximal };

std::string to_string(Selection s);
std::optional<Selection> parse_selection(std::string_view name);

struct Heuristic {
  Selection selection = Selection::PiMinimal;
  std::size_t step = 1;
};

struct IterationStats {
  std::size_t iteration = 0;
  BigCount combinations;
  BigCount states;
  std::size_t nodes_before = 0;
  std::size_t nodes_after = 0;
  double model_time_s = 0.0;
  double reorder_time_s = 0.0;
};

/// Values each variable takes in some initial evaluation, by projecting the
/// init diagram. Throws EmptyInit when ι is unsatisfiable.
EvaluationDomain goal_domain(const Program& p, const Encoding& enc);

/// ⋀_v ⋁_{x∈E(v)} (v = x), clauses in `order`, literals ascending.
ExprPtr cnf(const EvaluationDomain& e, const VarOrder& order);

std::size_t pick_variable(Selection sel, const EvaluationDomain& e, const EvaluationDomain& g,
                          const VarOrder& pi, const VarOrder& rho);

/// Adds the smallest value of G(v) missing from E(v).
EvaluationDomain grow(const EvaluationDomain& e, const EvaluationDomain& g, std::size_t v);

/// Lexicographically smallest initial evaluation, variables compared in
/// `pi` order and values in domain order.
Evaluation default_evaluation(const Program& p, const VarOrder& pi);

struct IterateOptions {
  SiftConfig sift;
  /// No new iteration starts after this point and a running build is cut
  /// short; the result is then marked truncated. Row 0 ignores it.
  std::optional<Clock::time_point> deadline;
};

struct IterateResult {
  VarOrder order;
  std::vector<IterationStats> rows;
  EvaluationDomain domain;
  bool truncated = false;
};

/// An intermediate build ran out of nodes or time. Carries the rows finished
/// before it and the order they produced.
class ConstructionFailed : public Error {
 public:
  enum class Cause { NodeLimit, TimeBudget };

  ConstructionFailed(std::size_t iteration, Cause cause, const std::string& detail,
                     std::vector<IterationStats> rows, VarOrder order);

  std::size_t iteration() const { return iteration_; }
  Cause cause() const { return cause_; }
  const std::string& detail() const { return detail_; }
  const std::vector<IterationStats>& rows() const { return rows_; }
  const VarOrder& order() const { return order_; }

 private:
  std::size_t iteration_;
  Cause cause_;
  std::string detail_;
  std::vector<IterationStats> rows_;
  VarOrder order_;
};

IterateResult iterate(const Program& p, const VarOrder& pi, std::optional<Evaluation> eta,
                      const Heuristic& h, const Budget& budget = {},
                      const IterateOptions& opts = {});

}  // namespace ivr
