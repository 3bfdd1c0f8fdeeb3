#pragma once

// Group sifting over program-variable bit blocks.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ivr/bdd.hpp"

namespace ivr {

/// Total order on program variables, by index.
class VarOrder {
 public:
  VarOrder() = default;
  explicit VarOrder(std::vector<std::size_t> vars);

  static VarOrder identity(std::size_t n);

  const std::vector<std::size_t>& vars() const { return vars_; }
  std::size_t size() const { return vars_.size(); }
  std::size_t operator[](std::size_t i) const { return vars_[i]; }
  /// Position of program variable v in this order.
  std::size_t position(std::size_t v) const;
  VarOrder reversed() const;

  friend bool operator==(const VarOrder&, const VarOrder&) = default;

 private:
  std::vector<std::size_t> vars_;
};

/// groups[v] lists the bits of program variable v, top to bottom.
struct BitGroups {
  std::vector<std::vector<BitVar>> groups;

  std::size_t size() const { return groups.size(); }
  std::size_t num_bits() const;
  /// Bit-level order obtained by laying the groups out in `order`.
  std::vector<BitVar> expand(const VarOrder& order) const;
};

struct SiftConfig {
  /// A scan direction stops once the live size exceeds this factor times the
  /// size at the start of the group's sift.
  double max_growth = 1.2;
  int passes = 1;
};

/// Reads the program-variable order off the table's current level
/// arrangement; throws if some group is not contiguous and in sequence.
VarOrder current_order(const NodeTable& table, const BitGroups& groups);

/// Moves the groups into `target` in place through adjacent swaps.
void move_to_order(NodeTable& table, const BitGroups& groups, const VarOrder& target);

/// Sifts every group once per pass and returns the resulting order. The
/// combined size of `roots` never grows; if it would, the input order is restored.
VarOrder reorder(NodeTable& table, std::span<const NodeRef> roots, const BitGroups& groups,
                 const VarOrder& order, const SiftConfig& cfg = {});

struct RebuiltTable {
  std::unique_ptr<NodeTable> table;
  std::vector<NodeRef> roots;
};

/// Copies `roots` into a fresh table laid out in `target`.
RebuiltTable rebuild_under(NodeTable& source, std::span<const NodeRef> roots,
                           const BitGroups& groups, const VarOrder& target,
                           std::size_t node_limit = kUnlimitedNodes);

}  // namespace ivr
