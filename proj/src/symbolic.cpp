#include "ivr/symbolic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ivr {

// ---------------------------------------------------------------------------
// Encoding

Encoding::Encoding(const Program& p, VarOrder order) : order_(std::move(order)) {
  if (order_.size() != p.vars.size()) throw std::invalid_argument("order does not cover the program");
  BitVar next = 0;
  for (const auto& decl : p.vars) {
    domains_.push_back(decl.domain);
    unsigned k = 1;
    while (k < 63 && (std::uint64_t{1} << k) < decl.domain.size()) ++k;
    std::vector<BitVar> rows, cols, group;
    for (unsigned i = 0; i < k; ++i) {
      rows.push_back(next);
      cols.push_back(next + 1);
      group.push_back(next);
      group.push_back(next + 1);
      next += 2;
    }
    rows_.push_back(std::move(rows));
    cols_.push_back(std::move(cols));
    groups_.groups.push_back(std::move(group));
  }
}

Encoding encode(const Program& p, const VarOrder& order) { return Encoding(p, order); }

Encoding Encoding::with_order(VarOrder order) const {
  if (order.size() != num_vars()) throw std::invalid_argument("order does not cover the program");
  Encoding e = *this;
  e.order_ = std::move(order);
  return e;
}

std::vector<BitVar> Encoding::all_row_bits() const {
  std::vector<BitVar> out;
  for (const auto& r : rows_) out.insert(out.end(), r.begin(), r.end());
  return out;
}

std::vector<BitVar> Encoding::all_col_bits() const {
  std::vector<BitVar> out;
  for (const auto& c : cols_) out.insert(out.end(), c.begin(), c.end());
  return out;
}

std::vector<std::pair<BitVar, BitVar>> Encoding::col_to_row() const {
  std::vector<std::pair<BitVar, BitVar>> out;
  for (std::size_t v = 0; v < num_vars(); ++v)
    for (std::size_t i = 0; i < rows_[v].size(); ++i) out.emplace_back(cols_[v][i], rows_[v][i]);
  return out;
}

std::uint64_t Encoding::code(std::size_t v, std::int64_t value) const {
  if (!domains_.at(v).contains(value)) throw std::out_of_range("value outside domain");
  return static_cast<std::uint64_t>(value - domains_[v].lower);
}

Assignment Encoding::assign(const Evaluation& eta, Side side) const {
  Assignment a;
  for (std::size_t v = 0; v < num_vars(); ++v) {
    const std::uint64_t c = code(v, eta[v]);
    const auto& b = bits(v, side);
    for (std::size_t i = 0; i < b.size(); ++i) a[b[i]] = ((c >> (b.size() - 1 - i)) & 1u) != 0;
  }
  return a;
}

Assignment Encoding::assign(const Evaluation& from, const Evaluation& to) const {
  Assignment a = assign(from, Side::Row);
  a.merge(assign(to, Side::Column));
  return a;
}

std::unique_ptr<NodeTable> make_table(const Encoding& enc, const Budget& budget) {
  const std::vector<BitVar> levels = enc.level_order();
  auto table = std::make_unique<NodeTable>(std::span<const BitVar>(levels), budget.node_limit);
  std::optional<Clock::time_point> deadline = budget.deadline;
  if (budget.time_limit_s) {
    const auto limit = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                          std::chrono::duration<double>(*budget.time_limit_s));
    deadline = deadline ? std::min(*deadline, limit) : limit;
  }
  table->set_deadline(deadline);
  return table;
}

// ---------------------------------------------------------------------------
// Expression translation

namespace {

using Partition = std::vector<std::pair<std::int64_t, NodeRef>>;

class Translator {
 public:
  Translator(NodeTable& t, const Program& p, const Encoding& e) : t_(t), p_(p), e_(e) {}

  NodeTable& table() { return t_; }

  NodeRef value(std::size_t v, std::int64_t x, Side side) {
    const auto key = std::make_tuple(v, x, side);
    if (auto it = values_.find(key); it != values_.end()) return it->second;
    const std::uint64_t c = e_.code(v, x);
    const auto& bits = e_.bits(v, side);
    NodeRef r = t_.boolean(true);
    for (std::size_t i = 0; i < bits.size(); ++i) {
      NodeRef lit = t_.bit(bits[i]);
      if (((c >> (bits.size() - 1 - i)) & 1u) == 0) lit = t_.negate(lit);
      r = t_.apply(Op::And, r, lit);
    }
    values_.emplace(key, r);
    return r;
  }

  NodeRef range(std::size_t v, Side side) {
    const auto key = std::make_pair(v, side);
    if (auto it = ranges_.find(key); it != ranges_.end()) return it->second;
    NodeRef r = t_.boolean(false);
    const Domain& d = e_.domain(v);
    for (std::int64_t x = d.lower; x <= d.upper; ++x) r = t_.apply(Op::Or, r, value(v, x, side));
    ranges_.emplace(key, r);
    return r;
  }

  NodeRef all_ranges(Side side) {
    NodeRef r = t_.boolean(true);
    for (std::size_t v = 0; v < e_.num_vars(); ++v) r = t_.apply(Op::And, r, range(v, side));
    return r;
  }

  NodeRef identity(std::size_t v) {
    NodeRef r = t_.boolean(true);
    const auto& rows = e_.row_bits(v);
    const auto& cols = e_.col_bits(v);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      NodeRef same = t_.negate(t_.apply(Op::Xor, t_.bit(rows[i]), t_.bit(cols[i])));
      r = t_.apply(Op::And, r, same);
    }
    return r;
  }

  Partition partition(const ExprPtr& e, Side side) {
    switch (e->kind) {
      case ExprKind::IntLit:
        return {{e->value, t_.boolean(true)}};
      case ExprKind::Var: {
        Partition out;
        const Domain& d = e_.domain(e->var);
        for (std::int64_t x = d.lower; x <= d.upper; ++x) out.emplace_back(x, value(e->var, x, side));
        return out;
      }
      case ExprKind::Neg: {
        Partition out = partition(e->lhs, side);
        for (auto& cell : out) cell.first = -cell.first;
        return out;
      }
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Mul:
      case ExprKind::Div:
        break;
      default:
        throw std::logic_error("partition of a Boolean expression");
    }
    const Partition lhs = partition(e->lhs, side);
    const Partition rhs = partition(e->rhs, side);
    std::map<std::int64_t, NodeRef> cells;
    for (const auto& [a, ca] : lhs) {
      for (const auto& [b, cb] : rhs) {
        // x / 0 is undefined: the combination yields no value.
        if (e->kind == ExprKind::Div && b == 0) continue;
        NodeRef c = t_.apply(Op::And, ca, cb);
        if (c == t_.boolean(false)) continue;
        std::int64_t v = 0;
        switch (e->kind) {
          case ExprKind::Add: v = a + b; break;
          case ExprKind::Sub: v = a - b; break;
          case ExprKind::Mul: v = a * b; break;
          default: v = a / b; break;
        }
        auto [it, fresh] = cells.try_emplace(v, c);
        if (!fresh) it->second = t_.apply(Op::Or, it->second, c);
      }
    }
    return Partition(cells.begin(), cells.end());
  }

  NodeRef condition(const ExprPtr& e, Side side) {
    switch (e->kind) {
      case ExprKind::BoolLit:
        return t_.boolean(e->value != 0);
      case ExprKind::Not:
        return t_.negate(condition(e->lhs, side));
      case ExprKind::And:
        return t_.apply(Op::And, condition(e->lhs, side), condition(e->rhs, side));
      case ExprKind::Or:
        return t_.apply(Op::Or, condition(e->lhs, side), condition(e->rhs, side));
      default:
        break;
    }
    const Partition lhs = partition(e->lhs, side);
    const Partition rhs = partition(e->rhs, side);
    NodeRef out = t_.boolean(false);
    for (const auto& [a, ca] : lhs) {
      for (const auto& [b, cb] : rhs) {
        bool holds = false;
        switch (e->kind) {
          case ExprKind::Eq: holds = a == b; break;
          case ExprKind::Ne: holds = a != b; break;
          case ExprKind::Lt: holds = a < b; break;
          case ExprKind::Le: holds = a <= b; break;
          case ExprKind::Gt: holds = a > b; break;
          case ExprKind::Ge: holds = a >= b; break;
          default: throw std::logic_error("condition of an integer expression");
        }
        if (holds) out = t_.apply(Op::Or, out, t_.apply(Op::And, ca, cb));
      }
    }
    return out;
  }

  NodeRef boolean_expr(const ExprPtr& e, Side side) {
    return t_.apply(Op::And, condition(e, side), all_ranges(side));
  }

  struct BranchParts {
    std::vector<std::size_t> assigned;
    NodeRef update;  // over row bits and the column bits of `assigned`
  };

  struct CommandParts {
    NodeRef guard;
    std::vector<BranchParts> branches;
    NodeRef out_of_domain;  // guard states where an update leaves its domain
  };

  CommandParts command(const Command& c) {
    CommandParts parts;
    parts.guard = boolean_expr(c.guard, Side::Row);
    parts.out_of_domain = t_.boolean(false);
    for (const auto& b : c.branches) {
      BranchParts bp;
      bp.update = t_.boolean(true);
      for (const auto& a : b.updates) {
        bp.assigned.push_back(a.var);
        NodeRef target = t_.boolean(false);
        const Domain& d = e_.domain(a.var);
        for (const auto& [x, cond] : partition(a.value, Side::Row)) {
          if (d.contains(x)) {
            target = t_.apply(Op::Or, target, t_.apply(Op::And, cond, value(a.var, x, Side::Column)));
          } else {
            parts.out_of_domain = t_.apply(Op::Or, parts.out_of_domain, cond);
          }
        }
        bp.update = t_.apply(Op::And, bp.update, target);
      }
      std::sort(bp.assigned.begin(), bp.assigned.end());
      parts.branches.push_back(std::move(bp));
    }
    parts.out_of_domain = t_.apply(Op::And, parts.out_of_domain, parts.guard);
    return parts;
  }

 private:
  NodeTable& t_;
  const Program& p_;
  const Encoding& e_;
  std::map<std::tuple<std::size_t, std::int64_t, Side>, NodeRef> values_;
  std::map<std::pair<std::size_t, Side>, NodeRef> ranges_;
};

std::string describe_state(NodeTable& t, const Program& p, const Encoding& enc,
                           const NodeRef& states) {
  // Walk one satisfying path, fixing unmentioned bits to 0.
  Assignment a;
  NodeRef cur = states;
  while (!t.is_terminal(cur)) {
    NodeRef hi = t.high(cur);
    const bool take_high = !(hi == t.boolean(false));
    a[t.var_of(cur)] = take_high;
    cur = take_high ? hi : t.low(cur);
  }
  std::string out = "(";
  for (std::size_t v = 0; v < enc.num_vars(); ++v) {
    std::uint64_t code = 0;
    for (BitVar b : enc.row_bits(v)) code = (code << 1) | (a.count(b) && a[b] ? 1u : 0u);
    if (v > 0) out += ", ";
    out += p.vars[v].name + "=" + std::to_string(enc.domain(v).lower + static_cast<std::int64_t>(code));
  }
  return out + ")";
}

}  // namespace

NodeRef expr_to_bdd(NodeTable& table, const Program& p, const Encoding& enc, const ExprPtr& e,
                    Side side) {
  Translator tr(table, p, enc);
  return tr.boolean_expr(e, side);
}

Reachability reachable(NodeTable& table, const Program& p, const Encoding& enc,
                       const NodeRef& init) {
  Translator tr(table, p, enc);
  // Per branch: the row bits it overwrites and the renaming back from columns.
  struct Step {
    std::size_t command;
    NodeRef update;
    std::vector<BitVar> rows;
    std::vector<std::pair<BitVar, BitVar>> rename;
  };
  std::vector<NodeRef> guards;
  std::vector<Step> steps;
  for (std::size_t c = 0; c < p.commands.size(); ++c) {
    auto parts = tr.command(p.commands[c]);
    guards.push_back(parts.guard);
    for (auto& b : parts.branches) {
      Step s{c, b.update, {}, {}};
      for (std::size_t v : b.assigned) {
        const auto& r = enc.row_bits(v);
        const auto& col = enc.col_bits(v);
        s.rows.insert(s.rows.end(), r.begin(), r.end());
        for (std::size_t i = 0; i < r.size(); ++i) s.rename.emplace_back(col[i], r[i]);
      }
      steps.push_back(std::move(s));
    }
  }
  const std::vector<BitVar> row_bits = enc.all_row_bits();

  Reachability out;
  out.states = init;
  NodeRef frontier = init;
  const NodeRef none = table.boolean(false);
  while (!(frontier == none)) {
    ++out.iterations;
    std::vector<NodeRef> sources;
    for (const auto& g : guards) sources.push_back(table.apply(Op::And, frontier, g));
    NodeRef image = none;
    for (const auto& s : steps) {
      if (sources[s.command] == none) continue;
      // Unassigned variables keep their row bits, so only assigned ones are swapped out.
      const NodeRef moved = table.and_exists(sources[s.command], s.update, s.rows);
      image = table.apply(Op::Or, image, table.rename(moved, s.rename));
    }
    frontier = table.apply(Op::Diff, image, out.states);
    out.states = table.apply(Op::Or, out.states, frontier);
  }
  out.count = table.sat_count(out.states, row_bits);
  return out;
}

NodeRef build_transition(NodeTable& table, const Program& p, const Encoding& enc,
                         const NodeRef& rows) {
  Translator tr(table, p, enc);
  const NodeRef none = table.boolean(false);
  NodeRef trans = table.real(0.0);
  NodeRef enabled = none;
  for (std::size_t c = 0; c < p.commands.size(); ++c) {
    const auto parts = tr.command(p.commands[c]);
    const NodeRef source = table.apply(Op::And, rows, parts.guard);
    if (source == none) continue;
    const NodeRef bad = table.apply(Op::And, rows, parts.out_of_domain);
    if (!(bad == none)) {
      throw OutOfDomainUpdate("command " + std::to_string(c + 1) +
                              " leaves a variable domain in state " +
                              describe_state(table, p, enc, bad));
    }
    const NodeRef overlap = table.apply(Op::And, enabled, source);
    if (!(overlap == none)) {
      throw OverlappingGuards("command " + std::to_string(c + 1) +
                              " overlaps an earlier command in state " +
                              describe_state(table, p, enc, overlap));
    }
    enabled = table.apply(Op::Or, enabled, source);

    for (std::size_t b = 0; b < parts.branches.size(); ++b) {
      const auto& branch = parts.branches[b];
      // Restricting to the source states first keeps the frame conjunctions small.
      NodeRef rel = table.apply(Op::And, source, branch.update);
      for (std::size_t v = 0; v < enc.num_vars(); ++v) {
        if (!std::binary_search(branch.assigned.begin(), branch.assigned.end(), v))
          rel = table.apply(Op::And, rel, tr.identity(v));
      }
      const NodeRef weighted = table.apply(
          Op::Times, table.real(p.commands[c].branches[b].probability), table.to_real(rel));
      trans = table.apply(Op::Plus, trans, weighted);
    }
  }
  const NodeRef deadlocked = table.apply(Op::Diff, rows, enabled);
  if (!(deadlocked == none)) {
    NodeRef loops = deadlocked;
    for (std::size_t v = 0; v < enc.num_vars(); ++v) loops = table.apply(Op::And, loops, tr.identity(v));
    trans = table.apply(Op::Plus, trans, table.to_real(loops));
  }
  return trans;
}

// ---------------------------------------------------------------------------
// SymbolicModel

SymbolicModel::SymbolicModel(std::unique_ptr<NodeTable> t, Encoding enc)
    : table(std::move(t)), encoding(std::move(enc)) {}

SymbolicModel& SymbolicModel::operator=(SymbolicModel&& other) noexcept {
  if (this != &other) {
    // Handles must go before the table they point into.
    init = NodeRef();
    reach = NodeRef();
    trans = NodeRef();
    table = std::move(other.table);
    encoding = std::move(other.encoding);
    init = std::move(other.init);
    reach = std::move(other.reach);
    trans = std::move(other.trans);
    stats = std::move(other.stats);
  }
  return *this;
}

SymbolicModel::~SymbolicModel() {
  init = NodeRef();
  reach = NodeRef();
  trans = NodeRef();
}

void SymbolicModel::keep_only_transitions() {
  init = NodeRef();
  reach = NodeRef();
}

double SymbolicModel::entry(const Evaluation& from, const Evaluation& to) const {
  return table->eval(trans, encoding.assign(from, to)).value;
}

SymbolicModel construct(const Program& p, const VarOrder& order, const Budget& budget) {
  const auto start = Clock::now();
  Encoding enc(p, order);
  SymbolicModel model(make_table(enc, budget), enc);
  NodeTable& t = *model.table;
  std::string phase = "init";
  try {
    model.init = expr_to_bdd(t, p, model.encoding, p.init, Side::Row);
    phase = "reachability";
    Reachability r = reachable(t, p, model.encoding, model.init);
    model.reach = r.states;
    model.stats.states = r.count;
    model.stats.reach_iterations = r.iterations;
    phase = "transitions";
    model.trans = build_transition(t, p, model.encoding, model.reach);
  } catch (const NodeLimitExceeded& e) {
    throw NodeLimitExceeded(e.limit(), phase);
  } catch (const TimeBudgetExceeded&) {
    throw TimeBudgetExceeded(phase);
  }
  model.stats.init_nodes = t.size(model.init);
  model.stats.reach_nodes = t.size(model.reach);
  model.stats.trans_nodes = t.size(model.trans);
  model.stats.peak_nodes = t.peak_node_count();
  model.stats.build_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return model;
}

bool rows_stochastic(SymbolicModel& model, double tolerance) {
  NodeTable& t = *model.table;
  const std::vector<BitVar> cols = model.encoding.all_col_bits();
  const NodeRef sums = t.sum_abstract(model.trans, cols);
  const NodeRef restricted = t.ite(model.reach, sums, t.real(1.0));
  for (const auto& leaf : t.leaves(restricted)) {
    if (std::abs(leaf.value - 1.0) > tolerance) return false;
  }
  return true;
}

std::string stats_json(const ModelStats& stats) {
  nlohmann::ordered_json j;
  j["states"] = stats.states.str();
  j["trans_nodes"] = stats.trans_nodes;
  j["init_nodes"] = stats.init_nodes;
  j["reach_nodes"] = stats.reach_nodes;
  j["peak_nodes"] = stats.peak_nodes;
  j["build_seconds"] = stats.build_seconds;
  return j.dump();
}

}  // namespace ivr
