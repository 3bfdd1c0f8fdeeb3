#include "ivr/bdd.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace ivr {

namespace {

constexpr std::uint32_t kFalse = 0;
constexpr std::uint32_t kTrue = 1;

// Cache op tags beyond the binary Op values.
enum : std::uint32_t {
  kIte = 64,
  kNot,
  kToReal,
  kExists,
  kAndExists,
  kSum,
};

constexpr std::size_t kCacheMax = std::size_t{1} << 22;
constexpr std::size_t kMinGcThreshold = std::size_t{1} << 16;

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

bool is_commutative(Op op) {
  switch (op) {
    case Op::And:
    case Op::Or:
    case Op::Xor:
    case Op::Plus:
    case Op::Times:
    case Op::Max:
    case Op::Min:
      return true;
    default:
      return false;
  }
}

bool is_boolean_op(Op op) {
  return op == Op::And || op == Op::Or || op == Op::Xor || op == Op::Diff;
}

}  // namespace

bool operator==(const Terminal& a, const Terminal& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Terminal::Kind::Boolean) return a.flag == b.flag;
  return std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value);
}

// ---------------------------------------------------------------------------
// NodeRef

NodeRef::NodeRef(NodeTable* table, std::uint32_t index) : table_(table), index_(index) {
  table_->incref_ext(index_);
}

NodeRef::NodeRef(const NodeRef& other) : table_(other.table_), index_(other.index_) {
  if (table_) table_->incref_ext(index_);
}

NodeRef::NodeRef(NodeRef&& other) noexcept : table_(other.table_), index_(other.index_) {
  other.table_ = nullptr;
}

NodeRef& NodeRef::operator=(const NodeRef& other) {
  if (this != &other) {
    if (other.table_) other.table_->incref_ext(other.index_);
    if (table_) table_->decref_ext(index_);
    table_ = other.table_;
    index_ = other.index_;
  }
  return *this;
}

NodeRef& NodeRef::operator=(NodeRef&& other) noexcept {
  if (this != &other) {
    if (table_) table_->decref_ext(index_);
    table_ = other.table_;
    index_ = other.index_;
    other.table_ = nullptr;
  }
  return *this;
}

NodeRef::~NodeRef() {
  if (table_) table_->decref_ext(index_);
}

// ---------------------------------------------------------------------------
// NodeTable: setup, allocation, garbage collection

std::size_t NodeTable::CacheHash::operator()(const CacheKey& k) const noexcept {
  const std::uint64_t lo = (static_cast<std::uint64_t>(k.a) << 32) | k.b;
  const std::uint64_t hi = (static_cast<std::uint64_t>(k.c) << 8) | k.op;
  return mix(lo ^ mix(hi));
}

std::size_t NodeTable::PairHash::operator()(std::uint64_t k) const noexcept {
  return mix(k);
}

NodeTable::NodeTable(std::size_t num_vars, std::size_t node_limit)
    : node_limit_(node_limit) {
  perm_.resize(num_vars);
  invperm_.resize(num_vars);
  for (std::size_t i = 0; i < num_vars; ++i) {
    perm_[i] = static_cast<Level>(i);
    invperm_[i] = static_cast<BitVar>(i);
  }
  unique_.resize(num_vars);
  // Boolean terminals live at fixed slots and are never collected.
  nodes_.push_back({kTerminalVar, 0, 0, 0, 1, Terminal::Kind::Boolean, false, 0.0});
  nodes_.push_back({kTerminalVar, 0, 0, 0, 1, Terminal::Kind::Boolean, false, 1.0});
  node_count_ = peak_node_count_ = 2;
  set_node_limit(node_limit);
}

NodeTable::NodeTable(std::span<const BitVar> level_order, std::size_t node_limit)
    : NodeTable(level_order.size(), node_limit) {
  std::vector<bool> seen(level_order.size(), false);
  for (std::size_t l = 0; l < level_order.size(); ++l) {
    const BitVar v = level_order[l];
    if (v >= level_order.size() || seen[v])
      throw std::invalid_argument("level order is not a permutation");
    seen[v] = true;
    perm_[v] = static_cast<Level>(l);
    invperm_[l] = v;
  }
}

NodeTable::~NodeTable() = default;

BitVar NodeTable::new_var() {
  const auto v = static_cast<BitVar>(perm_.size());
  perm_.push_back(static_cast<Level>(invperm_.size()));
  invperm_.push_back(v);
  unique_.emplace_back();
  return v;
}

void NodeTable::set_node_limit(std::size_t limit) {
  node_limit_ = limit;
  const std::size_t live = node_count_;
  gc_threshold_ = std::max(2 * live, kMinGcThreshold);
  if (limit != kUnlimitedNodes) {
    std::size_t bound = limit / 4 * 3;
    if (live >= bound) bound = live + (limit - std::min(limit, live)) / 2;
    gc_threshold_ = std::min(gc_threshold_, bound);
  }
}

void NodeTable::check_deadline() {
  if (deadline_ && Clock::now() >= *deadline_) throw TimeBudgetExceeded();
}

std::uint32_t NodeTable::allocate() {
  if (node_count_ >= node_limit_) throw NodeLimitExceeded(node_limit_);
  if ((++ticks_ & 1023u) == 0) check_deadline();
  std::uint32_t idx;
  if (!free_list_.empty()) {
    idx = free_list_.back();
    free_list_.pop_back();
  } else {
    idx = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
  }
  ++node_count_;
  peak_node_count_ = std::max(peak_node_count_, node_count_);
  return idx;
}

std::uint32_t NodeTable::mk(BitVar v, std::uint32_t low, std::uint32_t high) {
  if (low == high) return low;
  const std::uint64_t key = key_of(low, high);
  auto& table = unique_[v];
  if (auto it = table.find(key); it != table.end()) return it->second;
  const std::uint32_t idx = allocate();
  nodes_[idx] = {v, low, high, 0, 0, nodes_[low].kind, false, 0.0};
  ++nodes_[low].ref;
  ++nodes_[high].ref;
  table.emplace(key, idx);
  dirty_ = true;
  return idx;
}

std::uint32_t NodeTable::mk_terminal(const Terminal& t) {
  if (t.is_boolean()) return t.flag ? kTrue : kFalse;
  // -0.0 and 0.0 share one terminal so that x * 0 and 0 + x stay canonical.
  const double value = t.value == 0.0 ? 0.0 : t.value;
  const auto bits = std::bit_cast<std::uint64_t>(value);
  if (auto it = reals_.find(bits); it != reals_.end()) return it->second;
  const std::uint32_t idx = allocate();
  nodes_[idx] = {kTerminalVar, 0, 0, 0, 0, Terminal::Kind::Real, false, value};
  reals_.emplace(bits, idx);
  dirty_ = true;
  return idx;
}

void NodeTable::maybe_collect() {
  if (node_count_ > gc_threshold_) collect_garbage();
  if (cache_.size() > kCacheMax) cache_.clear();
}

void NodeTable::release(std::uint32_t i) {
  Node& n = nodes_[i];
  if (n.var == kTerminalVar) {
    reals_.erase(std::bit_cast<std::uint64_t>(n.value));
  } else {
    unique_[n.var].erase(key_of(n.low, n.high));
  }
  n.free = true;
  n.var = kTerminalVar;
  n.ref = n.ext = 0;
  free_list_.push_back(i);
  --node_count_;
}

void NodeTable::deref(std::uint32_t i) {
  std::vector<std::uint32_t> stack{i};
  while (!stack.empty()) {
    const std::uint32_t j = stack.back();
    stack.pop_back();
    Node& n = nodes_[j];
    if (--n.ref != 0 || n.ext != 0 || j <= kTrue) continue;
    const bool internal = n.var != kTerminalVar;
    const std::uint32_t lo = n.low, hi = n.high;
    release(j);
    if (internal) {
      stack.push_back(lo);
      stack.push_back(hi);
    }
  }
}

void NodeTable::recount_refs() {
  for (auto& n : nodes_) n.ref = 0;
  for (const auto& n : nodes_) {
    if (n.free || n.var == kTerminalVar) continue;
    ++nodes_[n.low].ref;
    ++nodes_[n.high].ref;
  }
}

void NodeTable::collect_garbage() {
  std::vector<char> marked(nodes_.size(), 0);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].free && nodes_[i].ext > 0) stack.push_back(i);
  }
  while (!stack.empty()) {
    const std::uint32_t i = stack.back();
    stack.pop_back();
    if (marked[i]) continue;
    marked[i] = 1;
    if (!terminal(i)) {
      stack.push_back(nodes_[i].low);
      stack.push_back(nodes_[i].high);
    }
  }
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].free && !marked[i]) release(i);
  }
  recount_refs();
  cache_.clear();
  dirty_ = false;
  set_node_limit(node_limit_);
}

void NodeTable::check(const NodeRef& f) const {
  if (f.table() != this) throw std::invalid_argument("node belongs to a different table");
}

// ---------------------------------------------------------------------------
// Construction

NodeRef NodeTable::constant(const Terminal& t) {
  maybe_collect();
  return wrap(mk_terminal(t));
}

NodeRef NodeTable::bit(BitVar v) {
  if (v >= num_vars()) throw std::out_of_range("unknown bit variable");
  maybe_collect();
  return wrap(mk(v, kFalse, kTrue));
}

NodeRef NodeTable::make_node(BitVar v, const NodeRef& low, const NodeRef& high) {
  check(low);
  check(high);
  if (v >= num_vars()) throw std::out_of_range("unknown bit variable");
  if (nodes_[low.index()].kind != nodes_[high.index()].kind)
    throw KindMismatch("make_node children of different kinds");
  if (perm_[v] >= level(low.index()) || perm_[v] >= level(high.index()))
    throw std::invalid_argument("make_node level must be above both children");
  maybe_collect();
  return wrap(mk(v, low.index(), high.index()));
}

std::optional<std::uint32_t> NodeTable::terminal_case(Op op, std::uint32_t f,
                                                      std::uint32_t g) {
  const bool tf = terminal(f), tg = terminal(g);
  switch (op) {
    case Op::And:
      if (f == kFalse || g == kFalse) return kFalse;
      if (f == kTrue) return g;
      if (g == kTrue || f == g) return f;
      return std::nullopt;
    case Op::Or:
      if (f == kTrue || g == kTrue) return kTrue;
      if (f == kFalse) return g;
      if (g == kFalse || f == g) return f;
      return std::nullopt;
    case Op::Xor:
      if (f == g) return kFalse;
      if (f == kFalse) return g;
      if (g == kFalse) return f;
      if (tf && tg) return f == g ? kFalse : kTrue;
      return std::nullopt;
    case Op::Diff:
      if (f == kFalse || g == kTrue || f == g) return kFalse;
      if (g == kFalse) return f;
      return std::nullopt;
    default:
      break;
  }
  const auto value = [this](std::uint32_t i) { return nodes_[i].value; };
  if (tf && tg) {
    const double a = value(f), b = value(g);
    switch (op) {
      case Op::Plus: return mk_terminal(Terminal::real(a + b));
      case Op::Times: return mk_terminal(Terminal::real(a * b));
      case Op::Max: return mk_terminal(Terminal::real(std::max(a, b)));
      case Op::Min: return mk_terminal(Terminal::real(std::min(a, b)));
      case Op::Greater: return a > b ? kTrue : kFalse;
      default: break;
    }
  }
  switch (op) {
    case Op::Plus:
      if (tf && value(f) == 0.0) return g;
      if (tg && value(g) == 0.0) return f;
      break;
    case Op::Times:
      if (tf && value(f) == 0.0) return f;
      if (tg && value(g) == 0.0) return g;
      if (tf && value(f) == 1.0) return g;
      if (tg && value(g) == 1.0) return f;
      break;
    case Op::Max:
    case Op::Min:
      if (f == g) return f;
      break;
    case Op::Greater:
      if (f == g) return kFalse;
      break;
    default:
      break;
  }
  return std::nullopt;
}

std::uint32_t NodeTable::apply_rec(Op op, std::uint32_t f, std::uint32_t g) {
  if (auto r = terminal_case(op, f, g)) return *r;
  if (is_commutative(op) && f > g) std::swap(f, g);
  const CacheKey key{static_cast<std::uint32_t>(op), f, g, 0};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  const Level lf = level(f), lg = level(g);
  const Level top = std::min(lf, lg);
  const BitVar v = invperm_[top];
  const std::uint32_t f0 = lf == top ? nodes_[f].low : f;
  const std::uint32_t f1 = lf == top ? nodes_[f].high : f;
  const std::uint32_t g0 = lg == top ? nodes_[g].low : g;
  const std::uint32_t g1 = lg == top ? nodes_[g].high : g;
  const std::uint32_t r0 = apply_rec(op, f0, g0);
  const std::uint32_t r1 = apply_rec(op, f1, g1);
  const std::uint32_t r = mk(v, r0, r1);
  cache_.emplace(key, r);
  return r;
}

std::uint32_t NodeTable::not_rec(std::uint32_t f) {
  if (f == kFalse) return kTrue;
  if (f == kTrue) return kFalse;
  const CacheKey key{kNot, f, 0, 0};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const BitVar v = nodes_[f].var;
  const std::uint32_t lo = nodes_[f].low, hi = nodes_[f].high;
  const std::uint32_t r0 = not_rec(lo);
  const std::uint32_t r1 = not_rec(hi);
  const std::uint32_t r = mk(v, r0, r1);
  cache_.emplace(key, r);
  return r;
}

std::uint32_t NodeTable::ite_rec(std::uint32_t f, std::uint32_t g, std::uint32_t h) {
  if (f == kTrue) return g;
  if (f == kFalse) return h;
  if (g == h) return g;
  if (g == kTrue && h == kFalse) return f;
  if (g == kFalse && h == kTrue) return not_rec(f);
  const CacheKey key{kIte, f, g, h};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  const Level lf = level(f), lg = level(g), lh = level(h);
  const Level top = std::min({lf, lg, lh});
  const BitVar v = invperm_[top];
  auto cof = [&](std::uint32_t x, Level lx, bool hi) {
    if (lx != top) return x;
    return hi ? nodes_[x].high : nodes_[x].low;
  };
  const std::uint32_t r0 = ite_rec(cof(f, lf, false), cof(g, lg, false), cof(h, lh, false));
  const std::uint32_t r1 = ite_rec(cof(f, lf, true), cof(g, lg, true), cof(h, lh, true));
  const std::uint32_t r = mk(v, r0, r1);
  cache_.emplace(key, r);
  return r;
}

std::uint32_t NodeTable::to_real_rec(std::uint32_t f) {
  if (f == kFalse) return mk_terminal(Terminal::real(0.0));
  if (f == kTrue) return mk_terminal(Terminal::real(1.0));
  const CacheKey key{kToReal, f, 0, 0};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  const BitVar v = nodes_[f].var;
  const std::uint32_t lo = nodes_[f].low, hi = nodes_[f].high;
  const std::uint32_t r0 = to_real_rec(lo);
  const std::uint32_t r1 = to_real_rec(hi);
  const std::uint32_t r = mk(v, r0, r1);
  cache_.emplace(key, r);
  return r;
}

NodeRef NodeTable::apply(Op op, const NodeRef& f, const NodeRef& g) {
  check(f);
  check(g);
  const bool want_boolean = is_boolean_op(op);
  if (is_boolean(f) != want_boolean || is_boolean(g) != want_boolean)
    throw KindMismatch("operand kind does not match operator");
  maybe_collect();
  return wrap(apply_rec(op, f.index(), g.index()));
}

NodeRef NodeTable::ite(const NodeRef& f, const NodeRef& g, const NodeRef& h) {
  check(f);
  check(g);
  check(h);
  if (!is_boolean(f)) throw KindMismatch("ite condition must be Boolean");
  if (is_boolean(g) != is_boolean(h)) throw KindMismatch("ite branches differ in kind");
  maybe_collect();
  return wrap(ite_rec(f.index(), g.index(), h.index()));
}

NodeRef NodeTable::negate(const NodeRef& f) {
  check(f);
  if (!is_boolean(f)) throw KindMismatch("negate needs a Boolean diagram");
  maybe_collect();
  return wrap(not_rec(f.index()));
}

NodeRef NodeTable::to_real(const NodeRef& f) {
  check(f);
  if (!is_boolean(f)) throw KindMismatch("to_real needs a Boolean diagram");
  maybe_collect();
  return wrap(to_real_rec(f.index()));
}

NodeRef NodeTable::greater_than_zero(const NodeRef& f) {
  check(f);
  if (is_boolean(f)) throw KindMismatch("greater_than_zero needs a real diagram");
  maybe_collect();
  const std::uint32_t zero = mk_terminal(Terminal::real(0.0));
  return wrap(apply_rec(Op::Greater, f.index(), zero));
}

// ---------------------------------------------------------------------------
// Abstraction

std::uint32_t NodeTable::make_cube(std::span<const BitVar> bits) {
  std::vector<BitVar> sorted(bits.begin(), bits.end());
  for (BitVar b : sorted)
    if (b >= num_vars()) throw std::out_of_range("unknown bit variable");
  std::sort(sorted.begin(), sorted.end(),
            [this](BitVar a, BitVar b) { return perm_[a] > perm_[b]; });
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::uint32_t cube = kTrue;
  for (BitVar b : sorted) cube = mk(b, kFalse, cube);
  return cube;
}

std::uint32_t NodeTable::exists_rec(std::uint32_t f, std::uint32_t cube) {
  if (terminal(f)) return f;
  const Level lf = level(f);
  while (cube != kTrue && level(cube) < lf) cube = nodes_[cube].high;
  if (cube == kTrue) return f;
  const CacheKey key{kExists, f, cube, 0};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  const BitVar v = nodes_[f].var;
  const std::uint32_t lo = nodes_[f].low, hi = nodes_[f].high;
  std::uint32_t r;
  if (nodes_[cube].var == v) {
    const std::uint32_t rest = nodes_[cube].high;
    const std::uint32_t r0 = exists_rec(lo, rest);
    r = r0 == kTrue ? kTrue : apply_rec(Op::Or, r0, exists_rec(hi, rest));
  } else {
    const std::uint32_t r0 = exists_rec(lo, cube);
    const std::uint32_t r1 = exists_rec(hi, cube);
    r = mk(v, r0, r1);
  }
  cache_.emplace(key, r);
  return r;
}

std::uint32_t NodeTable::and_exists_rec(std::uint32_t f, std::uint32_t g,
                                        std::uint32_t cube) {
  if (f == kFalse || g == kFalse) return kFalse;
  if (f == kTrue && g == kTrue) return kTrue;
  if (f == kTrue) return exists_rec(g, cube);
  if (g == kTrue || f == g) return exists_rec(f, cube);
  if (f > g) std::swap(f, g);

  const Level lf = level(f), lg = level(g);
  const Level top = std::min(lf, lg);
  while (cube != kTrue && level(cube) < top) cube = nodes_[cube].high;
  if (cube == kTrue) return apply_rec(Op::And, f, g);
  const CacheKey key{kAndExists, f, g, cube};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  const BitVar v = invperm_[top];
  const std::uint32_t f0 = lf == top ? nodes_[f].low : f;
  const std::uint32_t f1 = lf == top ? nodes_[f].high : f;
  const std::uint32_t g0 = lg == top ? nodes_[g].low : g;
  const std::uint32_t g1 = lg == top ? nodes_[g].high : g;
  std::uint32_t r;
  if (nodes_[cube].var == v) {
    const std::uint32_t rest = nodes_[cube].high;
    const std::uint32_t r0 = and_exists_rec(f0, g0, rest);
    r = r0 == kTrue ? kTrue : apply_rec(Op::Or, r0, and_exists_rec(f1, g1, rest));
  } else {
    const std::uint32_t r0 = and_exists_rec(f0, g0, cube);
    const std::uint32_t r1 = and_exists_rec(f1, g1, cube);
    r = mk(v, r0, r1);
  }
  cache_.emplace(key, r);
  return r;
}

std::uint32_t NodeTable::sum_rec(std::uint32_t f, std::uint32_t cube) {
  if (cube == kTrue) return f;
  if (terminal(f)) {
    double scale = 1.0;
    for (std::uint32_t c = cube; c != kTrue; c = nodes_[c].high) scale *= 2.0;
    return mk_terminal(Terminal::real(nodes_[f].value * scale));
  }
  const CacheKey key{kSum, f, cube, 0};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  std::uint32_t r;
  const Level lf = level(f), lc = level(cube);
  if (lc < lf) {
    const std::uint32_t half = sum_rec(f, nodes_[cube].high);
    r = apply_rec(Op::Plus, half, half);
  } else if (lc == lf) {
    const std::uint32_t rest = nodes_[cube].high;
    const std::uint32_t lo = nodes_[f].low, hi = nodes_[f].high;
    const std::uint32_t r0 = sum_rec(lo, rest);
    const std::uint32_t r1 = sum_rec(hi, rest);
    r = apply_rec(Op::Plus, r0, r1);
  } else {
    const BitVar v = nodes_[f].var;
    const std::uint32_t lo = nodes_[f].low, hi = nodes_[f].high;
    const std::uint32_t r0 = sum_rec(lo, cube);
    const std::uint32_t r1 = sum_rec(hi, cube);
    r = mk(v, r0, r1);
  }
  cache_.emplace(key, r);
  return r;
}

NodeRef NodeTable::exists(const NodeRef& f, std::span<const BitVar> bits) {
  check(f);
  if (!is_boolean(f)) throw KindMismatch("exists needs a Boolean diagram");
  maybe_collect();
  const std::uint32_t cube = make_cube(bits);
  return wrap(exists_rec(f.index(), cube));
}

NodeRef NodeTable::and_exists(const NodeRef& f, const NodeRef& g,
                              std::span<const BitVar> bits) {
  check(f);
  check(g);
  if (!is_boolean(f) || !is_boolean(g)) throw KindMismatch("and_exists needs Boolean diagrams");
  maybe_collect();
  const std::uint32_t cube = make_cube(bits);
  return wrap(and_exists_rec(f.index(), g.index(), cube));
}

NodeRef NodeTable::sum_abstract(const NodeRef& f, std::span<const BitVar> bits) {
  check(f);
  if (is_boolean(f)) throw KindMismatch("sum_abstract needs a real diagram");
  maybe_collect();
  const std::uint32_t cube = make_cube(bits);
  return wrap(sum_rec(f.index(), cube));
}

NodeRef NodeTable::rename(const NodeRef& f,
                          std::span<const std::pair<BitVar, BitVar>> mapping) {
  check(f);
  maybe_collect();
  std::vector<BitVar> target(num_vars());
  for (BitVar v = 0; v < target.size(); ++v) target[v] = v;
  for (const auto& [from, to] : mapping) {
    if (from >= num_vars() || to >= num_vars()) throw std::out_of_range("unknown bit variable");
    target[from] = to;
  }
  std::unordered_map<std::uint32_t, std::uint32_t> memo;
  auto rec = [&](auto&& self, std::uint32_t n) -> std::uint32_t {
    if (terminal(n)) return n;
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const BitVar v = nodes_[n].var;
    const std::uint32_t lo = nodes_[n].low, hi = nodes_[n].high;
    const std::uint32_t r0 = self(self, lo);
    const std::uint32_t r1 = self(self, hi);
    const std::uint32_t var = mk(target[v], kFalse, kTrue);
    const std::uint32_t r = ite_rec(var, r1, r0);
    memo.emplace(n, r);
    return r;
  };
  return wrap(rec(rec, f.index()));
}

// ---------------------------------------------------------------------------
// Queries

bool NodeTable::is_terminal(const NodeRef& f) const {
  check(f);
  return terminal(f.index());
}

bool NodeTable::is_boolean(const NodeRef& f) const {
  check(f);
  return nodes_[f.index()].kind == Terminal::Kind::Boolean;
}

Terminal NodeTable::terminal_value(const NodeRef& f) const {
  check(f);
  const Node& n = nodes_[f.index()];
  if (n.var != kTerminalVar) throw std::invalid_argument("not a terminal");
  if (n.kind == Terminal::Kind::Boolean) return Terminal::boolean(f.index() == kTrue);
  return Terminal::real(n.value);
}

BitVar NodeTable::var_of(const NodeRef& f) const {
  check(f);
  return nodes_[f.index()].var;
}

NodeRef NodeTable::low(const NodeRef& f) {
  check(f);
  if (terminal(f.index())) throw std::invalid_argument("terminal has no successors");
  return wrap(nodes_[f.index()].low);
}

NodeRef NodeTable::high(const NodeRef& f) {
  check(f);
  if (terminal(f.index())) throw std::invalid_argument("terminal has no successors");
  return wrap(nodes_[f.index()].high);
}

std::size_t NodeTable::shared_size(std::span<const NodeRef> roots) const {
  std::unordered_set<std::uint32_t> seen;
  std::vector<std::uint32_t> stack;
  for (const auto& r : roots) {
    check(r);
    stack.push_back(r.index());
  }
  while (!stack.empty()) {
    const std::uint32_t i = stack.back();
    stack.pop_back();
    if (!seen.insert(i).second) continue;
    if (!terminal(i)) {
      stack.push_back(nodes_[i].low);
      stack.push_back(nodes_[i].high);
    }
  }
  return seen.size();
}

std::size_t NodeTable::size(const NodeRef& f) const {
  return shared_size(std::span<const NodeRef>(&f, 1));
}

std::vector<BitVar> NodeTable::support(const NodeRef& f) const {
  check(f);
  std::unordered_set<std::uint32_t> seen;
  std::vector<char> vars(num_vars(), 0);
  std::vector<std::uint32_t> stack{f.index()};
  while (!stack.empty()) {
    const std::uint32_t i = stack.back();
    stack.pop_back();
    if (terminal(i) || !seen.insert(i).second) continue;
    vars[nodes_[i].var] = 1;
    stack.push_back(nodes_[i].low);
    stack.push_back(nodes_[i].high);
  }
  std::vector<BitVar> out;
  for (Level l = 0; l < num_vars(); ++l)
    if (vars[invperm_[l]]) out.push_back(invperm_[l]);
  return out;
}

std::vector<Terminal> NodeTable::leaves(const NodeRef& f) const {
  check(f);
  std::unordered_set<std::uint32_t> seen;
  std::vector<std::uint32_t> stack{f.index()};
  std::vector<std::uint32_t> terms;
  while (!stack.empty()) {
    const std::uint32_t i = stack.back();
    stack.pop_back();
    if (!seen.insert(i).second) continue;
    if (terminal(i)) {
      terms.push_back(i);
    } else {
      stack.push_back(nodes_[i].low);
      stack.push_back(nodes_[i].high);
    }
  }
  std::sort(terms.begin(), terms.end());
  std::vector<Terminal> out;
  for (std::uint32_t i : terms) {
    if (nodes_[i].kind == Terminal::Kind::Boolean)
      out.push_back(Terminal::boolean(i == kTrue));
    else
      out.push_back(Terminal::real(nodes_[i].value));
  }
  return out;
}

BigCount NodeTable::sat_count(const NodeRef& f, std::span<const BitVar> support_bits) const {
  check(f);
  if (!is_boolean(f)) throw KindMismatch("sat_count needs a Boolean diagram");
  std::vector<Level> levels;
  std::vector<char> in_support(num_vars(), 0);
  for (BitVar b : support_bits) {
    if (b >= num_vars()) throw std::out_of_range("unknown bit variable");
    if (!in_support[b]) levels.push_back(perm_[b]);
    in_support[b] = 1;
  }
  for (BitVar v : support(f)) {
    if (!in_support[v])
      throw SupportViolation("bit " + std::to_string(v) + " is outside the counting support");
  }
  std::sort(levels.begin(), levels.end());
  const auto rank = [&](Level l) {
    return static_cast<unsigned>(std::lower_bound(levels.begin(), levels.end(), l) - levels.begin());
  };

  std::unordered_map<std::uint32_t, BigCount> memo;
  auto rec = [&](auto&& self, std::uint32_t n) -> BigCount {
    if (n == kFalse) return 0;
    if (n == kTrue) return 1;
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const unsigned here = rank(level(n));
    const std::uint32_t lo = nodes_[n].low, hi = nodes_[n].high;
    BigCount c0 = self(self, lo);
    BigCount c1 = self(self, hi);
    c0 <<= rank(level(lo)) - here - 1;
    c1 <<= rank(level(hi)) - here - 1;
    BigCount total = c0 + c1;
    memo.emplace(n, total);
    return total;
  };
  BigCount result = rec(rec, f.index());
  result <<= rank(level(f.index()));
  return result;
}

Terminal NodeTable::eval(const NodeRef& f, const Assignment& a) const {
  check(f);
  std::uint32_t i = f.index();
  while (!terminal(i)) {
    const auto it = a.find(nodes_[i].var);
    if (it == a.end())
      throw IncompleteAssignment("assignment misses bit " + std::to_string(nodes_[i].var));
    i = it->second ? nodes_[i].high : nodes_[i].low;
  }
  if (nodes_[i].kind == Terminal::Kind::Boolean) return Terminal::boolean(i == kTrue);
  return Terminal::real(nodes_[i].value);
}

// ---------------------------------------------------------------------------
// Reordering primitive

void NodeTable::swap_adjacent(Level l) {
  if (static_cast<std::size_t>(l) + 1 >= num_vars()) throw std::out_of_range("no level below");
  check_deadline();
  if (dirty_) collect_garbage();
  cache_.clear();

  const BitVar x = invperm_[l];
  const BitVar y = invperm_[l + 1];
  std::vector<std::uint32_t> moving;
  for (const auto& [key, idx] : unique_[x]) {
    const Node& n = nodes_[idx];
    if (nodes_[n.low].var == y || nodes_[n.high].var == y) moving.push_back(idx);
  }
  // Each rewritten node may create at most two new x-nodes.
  if (node_limit_ != kUnlimitedNodes && node_count_ + 2 * moving.size() > node_limit_)
    throw NodeLimitExceeded(node_limit_, "reordering");
  std::sort(moving.begin(), moving.end());
  for (std::uint32_t idx : moving) unique_[x].erase(key_of(nodes_[idx].low, nodes_[idx].high));

  // The rewrite below must not be interrupted half way.
  const auto deadline = std::exchange(deadline_, std::nullopt);
  std::swap(invperm_[l], invperm_[l + 1]);
  perm_[x] = l + 1;
  perm_[y] = l;

  for (std::uint32_t idx : moving) {
    const std::uint32_t f0 = nodes_[idx].low, f1 = nodes_[idx].high;
    const bool y0 = nodes_[f0].var == y, y1 = nodes_[f1].var == y;
    const std::uint32_t f00 = y0 ? nodes_[f0].low : f0;
    const std::uint32_t f01 = y0 ? nodes_[f0].high : f0;
    const std::uint32_t f10 = y1 ? nodes_[f1].low : f1;
    const std::uint32_t f11 = y1 ? nodes_[f1].high : f1;
    const std::uint32_t new_low = mk(x, f00, f10);
    const std::uint32_t new_high = mk(x, f01, f11);
    ++nodes_[new_low].ref;
    ++nodes_[new_high].ref;
    Node& n = nodes_[idx];
    n.var = y;
    n.low = new_low;
    n.high = new_high;
    unique_[y].emplace(key_of(new_low, new_high), idx);
    deref(f0);
    deref(f1);
  }
  // Every node created above is referenced, and dead ones were freed.
  dirty_ = false;
  deadline_ = deadline;
}

AuditReport NodeTable::audit() const {
  AuditReport report;
  std::unordered_set<CacheKey, CacheHash> triples;
  std::size_t internal = 0;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.free || n.var == kTerminalVar) continue;
    ++internal;
    const Level l = perm_[n.var];
    if (l >= level(n.low) || l >= level(n.high)) ++report.misordered;
    if (n.low == n.high) ++report.redundant;
    if (nodes_[n.low].kind != n.kind || nodes_[n.high].kind != n.kind) ++report.kind_mismatches;
    if (!triples.insert(CacheKey{n.var, n.low, n.high, 0}).second) ++report.duplicates;
    const auto& table = unique_[n.var];
    const auto it = table.find(key_of(n.low, n.high));
    if (it == table.end() || it->second != i) ++report.table_mismatches;
  }
  std::size_t entries = 0;
  for (const auto& t : unique_) entries += t.size();
  if (entries != internal) ++report.table_mismatches;
  return report;
}

std::string NodeTable::to_dot(const NodeRef& f,
                              const std::function<std::string(BitVar)>& name) const {
  check(f);
  std::ostringstream os;
  os << "digraph dd {\n";
  std::unordered_set<std::uint32_t> seen;
  std::vector<std::uint32_t> stack{f.index()};
  while (!stack.empty()) {
    const std::uint32_t i = stack.back();
    stack.pop_back();
    if (!seen.insert(i).second) continue;
    const Node& n = nodes_[i];
    if (n.var == kTerminalVar) {
      os << "  n" << i << " [shape=box,label=\"";
      if (n.kind == Terminal::Kind::Boolean)
        os << (i == kTrue ? "true" : "false");
      else
        os << n.value;
      os << "\"];\n";
      continue;
    }
    os << "  n" << i << " [label=\"" << (name ? name(n.var) : "x" + std::to_string(n.var))
       << "\"];\n";
    os << "  n" << i << " -> n" << n.high << ";\n";
    os << "  n" << i << " -> n" << n.low << " [style=dashed];\n";
    stack.push_back(n.low);
    stack.push_back(n.high);
  }
  os << "}\n";
  return os.str();
}

}  // namespace ivr
