#pragma once

// Bit encoding of program variables and symbolic construction of the
// initial-state BDD, the reachable-state BDD and the transition MTBDD.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ivr/bdd.hpp"
#include "ivr/program.hpp"
#include "ivr/reorder.hpp"

namespace ivr {

enum class Side { Row, Column };

/// Per variable v: k(v) = ceil(log2 |d(v)|) bits (at least one), value x
/// encoded as x - lower(v). Row and column bits of one variable form a group
/// r_{k-1} c_{k-1} ... r_0 c_0; groups are laid out in the given order.
class Encoding {
 public:
  Encoding(const Program& p, VarOrder order);

  std::size_t num_vars() const { return domains_.size(); }
  std::size_t num_bits() const { return groups_.num_bits(); }
  unsigned width(std::size_t v) const { return static_cast<unsigned>(rows_[v].size()); }
  const Domain& domain(std::size_t v) const { return domains_[v]; }
  /// Most significant bit first.
  const std::vector<BitVar>& row_bits(std::size_t v) const { return rows_[v]; }
  const std::vector<BitVar>& col_bits(std::size_t v) const { return cols_[v]; }
  const std::vector<BitVar>& bits(std::size_t v, Side side) const {
    return side == Side::Row ? rows_[v] : cols_[v];
  }
  std::vector<BitVar> all_row_bits() const;
  std::vector<BitVar> all_col_bits() const;
  std::vector<std::pair<BitVar, BitVar>> col_to_row() const;

  std::uint64_t code(std::size_t v, std::int64_t value) const;
  const BitGroups& groups() const { return groups_; }
  const VarOrder& order() const { return order_; }
  std::vector<BitVar> level_order() const { return groups_.expand(order_); }
  Encoding with_order(VarOrder order) const;

  /// Bits of `eta` on the chosen side.
  Assignment assign(const Evaluation& eta, Side side) const;
  /// Row bits from `from`, column bits from `to`.
  Assignment assign(const Evaluation& from, const Evaluation& to) const;

 private:
  Encoding() = default;
  std::vector<Domain> domains_;
  std::vector<std::vector<BitVar>> rows_;
  std::vector<std::vector<BitVar>> cols_;
  BitGroups groups_;
  VarOrder order_;
};

Encoding encode(const Program& p, const VarOrder& order);

struct Budget {
  std::size_t node_limit = kUnlimitedNodes;
  std::optional<double> time_limit_s;
  /// Absolute wall-clock cut-off; the earlier of this and the time limit applies.
  std::optional<Clock::time_point> deadline;
};

/// Fresh table laid out per `enc`, with the budget's node limit and deadline.
std::unique_ptr<NodeTable> make_table(const Encoding& enc, const Budget& budget);

/// Satisfying encodings of e on one side, conjoined with the range
/// constraint of every variable on that side.
NodeRef expr_to_bdd(NodeTable& table, const Program& p, const Encoding& enc, const ExprPtr& e,
                    Side side = Side::Row);

struct Reachability {
  NodeRef states;
  BigCount count;
  std::size_t iterations = 0;
};

/// Least fixpoint of the image operator from `init`.
Reachability reachable(NodeTable& table, const Program& p, const Encoding& enc,
                       const NodeRef& init);

/// Transition MTBDD over row and column bits for source states in `rows`:
/// T(s, s') is the probability of moving from s to s'. Deadlocked states in
/// `rows` get a self-loop of probability one.
NodeRef build_transition(NodeTable& table, const Program& p, const Encoding& enc,
                         const NodeRef& rows);

struct ModelStats {
  BigCount states;
  std::size_t init_nodes = 0;
  std::size_t trans_nodes = 0;
  std::size_t reach_nodes = 0;
  std::size_t peak_nodes = 0;
  std::size_t reach_iterations = 0;
  double build_seconds = 0.0;
};

struct SymbolicModel {
  std::unique_ptr<NodeTable> table;
  Encoding encoding;
  NodeRef init;
  NodeRef reach;
  NodeRef trans;
  ModelStats stats;

  SymbolicModel(std::unique_ptr<NodeTable> t, Encoding enc);
  SymbolicModel(SymbolicModel&&) noexcept = default;
  SymbolicModel& operator=(SymbolicModel&& other) noexcept;
  ~SymbolicModel();

  /// Drops init and reach so only the transition diagram stays live.
  void keep_only_transitions();
  double entry(const Evaluation& from, const Evaluation& to) const;
};

/// Builds init, reachable states and the reach-restricted transition
/// diagram. Budget breaches surface as NodeLimitExceeded/TimeBudgetExceeded
/// tagged with the phase that was running.
SymbolicModel construct(const Program& p, const VarOrder& order, const Budget& budget = {});

/// Row sums of the transition diagram over reachable states, each within
/// `tolerance` of one. Computed by summing out the column bits.
bool rows_stochastic(SymbolicModel& model, double tolerance = 1e-9);

std::string stats_json(const ModelStats& stats);

}  // namespace ivr
