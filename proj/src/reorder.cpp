#include "ivr/reorder.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace ivr {

VarOrder::VarOrder(std::vector<std::size_t> vars) : vars_(std::move(vars)) {
  std::vector<bool> seen(vars_.size(), false);
  for (std::size_t v : vars_) {
    if (v >= vars_.size() || seen[v]) throw std::invalid_argument("variable order is not a permutation");
    seen[v] = true;
  }
}

VarOrder VarOrder::identity(std::size_t n) {
  std::vector<std::size_t> vars(n);
  std::iota(vars.begin(), vars.end(), std::size_t{0});
  return VarOrder(std::move(vars));
}

std::size_t VarOrder::position(std::size_t v) const {
  const auto it = std::find(vars_.begin(), vars_.end(), v);
  if (it == vars_.end()) throw std::out_of_range("variable not in order");
  return static_cast<std::size_t>(it - vars_.begin());
}

VarOrder VarOrder::reversed() const {
  return VarOrder(std::vector<std::size_t>(vars_.rbegin(), vars_.rend()));
}

std::size_t BitGroups::num_bits() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  return n;
}

std::vector<BitVar> BitGroups::expand(const VarOrder& order) const {
  if (order.size() != groups.size()) throw std::invalid_argument("order does not match groups");
  std::vector<BitVar> bits;
  bits.reserve(num_bits());
  for (std::size_t v : order.vars()) bits.insert(bits.end(), groups[v].begin(), groups[v].end());
  return bits;
}

VarOrder current_order(const NodeTable& table, const BitGroups& groups) {
  std::vector<std::pair<Level, std::size_t>> tops;
  for (std::size_t v = 0; v < groups.size(); ++v) {
    const auto& bits = groups.groups[v];
    if (bits.empty()) throw std::invalid_argument("empty bit group");
    const Level top = table.level_of(bits[0]);
    for (std::size_t j = 1; j < bits.size(); ++j) {
      if (table.level_of(bits[j]) != top + j)
        throw std::logic_error("bit group " + std::to_string(v) + " is not contiguous");
    }
    tops.emplace_back(top, v);
  }
  std::sort(tops.begin(), tops.end());
  std::vector<std::size_t> vars;
  for (const auto& [level, v] : tops) vars.push_back(v);
  return VarOrder(std::move(vars));
}

namespace {

class GroupMover {
 public:
  GroupMover(NodeTable& table, const BitGroups& groups)
      : table_(table), groups_(groups), order_(current_order(table, groups).vars()) {
    if (groups.num_bits() != table.num_vars())
      throw std::invalid_argument("bit groups must cover every table variable");
  }

  std::size_t count() const { return order_.size(); }
  std::size_t group_at(std::size_t pos) const { return order_[pos]; }
  std::size_t position_of(std::size_t g) const {
    return static_cast<std::size_t>(std::find(order_.begin(), order_.end(), g) - order_.begin());
  }

  // Exchanges the groups at positions pos and pos+1.
  void exchange(std::size_t pos) {
    Level base = 0;
    for (std::size_t i = 0; i < pos; ++i) base += static_cast<Level>(groups_.groups[order_[i]].size());
    const auto upper = static_cast<Level>(groups_.groups[order_[pos]].size());
    const auto lower = static_cast<Level>(groups_.groups[order_[pos + 1]].size());
    for (Level k = 0; k < upper; ++k) {
      const Level start = base + upper - 1 - k;
      for (Level j = 0; j < lower; ++j) table_.swap_adjacent(start + j);
    }
    std::swap(order_[pos], order_[pos + 1]);
  }

  void move(std::size_t from, std::size_t to) {
    while (from < to) exchange(from++);
    while (from > to) exchange(--from);
  }

  std::size_t weight(std::size_t g) const {
    std::size_t n = 0;
    for (BitVar b : groups_.groups[g]) n += table_.nodes_at(b);
    return n;
  }

 private:
  NodeTable& table_;
  const BitGroups& groups_;
  std::vector<std::size_t> order_;
};

void sift_group(NodeTable& table, GroupMover& mover, std::size_t group, double max_growth) {
  struct Sample {
    std::size_t pos;
    std::size_t size;
  };
  const std::size_t start = mover.position_of(group);
  const std::size_t start_size = table.node_count();
  const double ceiling = max_growth * static_cast<double>(start_size);
  std::vector<Sample> samples{{start, start_size}};

  std::size_t pos = start;
  while (pos + 1 < mover.count()) {
    mover.exchange(pos++);
    samples.push_back({pos, table.node_count()});
    if (static_cast<double>(table.node_count()) > ceiling) break;
  }
  while (pos > 0) {
    mover.exchange(--pos);
    samples.push_back({pos, table.node_count()});
    if (static_cast<double>(table.node_count()) > ceiling) break;
  }

  // Smallest size; ties go to the position nearest the start, then to the
  // earliest sample.
  const Sample* best = &samples.front();
  const auto distance = [start](std::size_t p) { return p > start ? p - start : start - p; };
  for (const auto& s : samples) {
    if (s.size < best->size || (s.size == best->size && distance(s.pos) < distance(best->pos)))
      best = &s;
  }
  mover.move(pos, best->pos);
}

}  // namespace

void move_to_order(NodeTable& table, const BitGroups& groups, const VarOrder& target) {
  if (target.size() != groups.size()) throw std::invalid_argument("order does not match groups");
  GroupMover mover(table, groups);
  for (std::size_t i = 0; i < target.size(); ++i) mover.move(mover.position_of(target[i]), i);
}

VarOrder reorder(NodeTable& table, std::span<const NodeRef> roots, const BitGroups& groups,
                 const VarOrder& order, const SiftConfig& cfg) {
  if (cfg.max_growth <= 1.0) throw std::invalid_argument("max_growth must exceed 1");
  if (current_order(table, groups) != order)
    throw std::invalid_argument("order does not match the table's level arrangement");

  table.collect_garbage();
  const std::size_t before = table.shared_size(roots);
  GroupMover mover(table, groups);
  for (int pass = 0; pass < cfg.passes; ++pass) {
    std::vector<std::size_t> queue(mover.count());
    for (std::size_t pos = 0; pos < queue.size(); ++pos) queue[pos] = mover.group_at(pos);
    std::stable_sort(queue.begin(), queue.end(), [&](std::size_t a, std::size_t b) {
      return mover.weight(a) > mover.weight(b);
    });
    for (std::size_t g : queue) sift_group(table, mover, g, cfg.max_growth);
  }

  if (table.shared_size(roots) > before) move_to_order(table, groups, order);
  return current_order(table, groups);
}

RebuiltTable rebuild_under(NodeTable& source, std::span<const NodeRef> roots,
                           const BitGroups& groups, const VarOrder& target,
                           std::size_t node_limit) {
  const std::vector<BitVar> levels = groups.expand(target);
  if (levels.size() != source.num_vars())
    throw std::invalid_argument("bit groups must cover every table variable");
  RebuiltTable out;
  out.table = std::make_unique<NodeTable>(std::span<const BitVar>(levels), node_limit);
  NodeTable& dest = *out.table;

  std::unordered_map<std::uint32_t, NodeRef> memo;
  auto copy = [&](auto&& self, const NodeRef& f) -> NodeRef {
    if (auto it = memo.find(f.index()); it != memo.end()) return it->second;
    NodeRef r;
    if (source.is_terminal(f)) {
      r = dest.constant(source.terminal_value(f));
    } else {
      const NodeRef lo = self(self, source.low(f));
      const NodeRef hi = self(self, source.high(f));
      r = dest.ite(dest.bit(source.var_of(f)), hi, lo);
    }
    memo.emplace(f.index(), r);
    return r;
  };
  for (const auto& root : roots) out.roots.push_back(copy(copy, root));
  return out;
}

}  // namespace ivr
