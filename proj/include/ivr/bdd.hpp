#pragma once

// Reduced ordered decision diagrams with Boolean (BDD) and real (MTBDD)
// terminals. One NodeTable owns all nodes; NodeRef is a counted handle that
// keeps its node alive across garbage collection.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ivr/errors.hpp"

namespace ivr {

using BitVar = std::uint32_t;
using Level = std::uint32_t;
using BigCount = boost::multiprecision::cpp_int;
using Clock = std::chrono::steady_clock;

inline constexpr std::size_t kUnlimitedNodes = static_cast<std::size_t>(-1);

struct Terminal {
  enum class Kind : std::uint8_t { Boolean, Real };

  Kind kind = Kind::Boolean;
  bool flag = false;
  double value = 0.0;

  static Terminal boolean(bool b) { return {Kind::Boolean, b, 0.0}; }
  static Terminal real(double v) { return {Kind::Real, false, v}; }

  bool is_boolean() const { return kind == Kind::Boolean; }
  // Real comparison is bit-exact.
  friend bool operator==(const Terminal& a, const Terminal& b);
};

enum class Op : std::uint8_t {
  And,
  Or,
  Xor,
  Diff,  // f and not g
  Plus,
  Times,
  Max,
  Min,
  Greater,  // real x real -> Boolean
};

using Assignment = std::unordered_map<BitVar, bool>;

class NodeTable;

class NodeRef {
 public:
  NodeRef() = default;
  NodeRef(const NodeRef& other);
  NodeRef(NodeRef&& other) noexcept;
  NodeRef& operator=(const NodeRef& other);
  NodeRef& operator=(NodeRef&& other) noexcept;
  ~NodeRef();

  bool valid() const { return table_ != nullptr; }
  std::uint32_t index() const { return index_; }
  NodeTable* table() const { return table_; }

  friend bool operator==(const NodeRef& a, const NodeRef& b) {
    return a.table_ == b.table_ && a.index_ == b.index_;
  }

 private:
  friend class NodeTable;
  NodeRef(NodeTable* table, std::uint32_t index);

  NodeTable* table_ = nullptr;
  std::uint32_t index_ = 0;
};

struct AuditReport {
  std::size_t misordered = 0;
  std::size_t redundant = 0;
  std::size_t duplicates = 0;
  std::size_t table_mismatches = 0;
  std::size_t kind_mismatches = 0;

  bool ok() const {
    return misordered == 0 && redundant == 0 && duplicates == 0 &&
           table_mismatches == 0 && kind_mismatches == 0;
  }
};

class NodeTable {
 public:
  static constexpr BitVar kTerminalVar = 0xffffffffu;
  static constexpr Level kTerminalLevel = 0xffffffffu;

  /// Table with `num_vars` bit variables placed in identity order.
  explicit NodeTable(std::size_t num_vars, std::size_t node_limit = kUnlimitedNodes);
  /// Table whose level i holds `level_order[i]`; must be a permutation of 0..n-1.
  explicit NodeTable(std::span<const BitVar> level_order,
                     std::size_t node_limit = kUnlimitedNodes);

  NodeTable(const NodeTable&) = delete;
  NodeTable& operator=(const NodeTable&) = delete;
  ~NodeTable();

  // -- order -------------------------------------------------------------
  std::size_t num_vars() const { return perm_.size(); }
  BitVar new_var();
  Level level_of(BitVar v) const { return perm_.at(v); }
  BitVar var_at(Level l) const { return invperm_.at(l); }
  std::vector<BitVar> level_order() const { return invperm_; }

  // -- budgets -----------------------------------------------------------
  void set_node_limit(std::size_t limit);
  std::size_t node_limit() const { return node_limit_; }
  void set_deadline(std::optional<Clock::time_point> deadline) { deadline_ = deadline; }
  std::size_t node_count() const { return node_count_; }
  std::size_t peak_node_count() const { return peak_node_count_; }

  // -- construction ------------------------------------------------------
  NodeRef constant(const Terminal& t);
  NodeRef boolean(bool b) { return constant(Terminal::boolean(b)); }
  NodeRef real(double v) { return constant(Terminal::real(v)); }
  NodeRef bit(BitVar v);
  NodeRef make_node(BitVar v, const NodeRef& low, const NodeRef& high);

  NodeRef apply(Op op, const NodeRef& f, const NodeRef& g);
  NodeRef ite(const NodeRef& f, const NodeRef& g, const NodeRef& h);
  NodeRef negate(const NodeRef& f);
  /// 0/1-valued real diagram of a Boolean one.
  NodeRef to_real(const NodeRef& f);
  NodeRef greater_than_zero(const NodeRef& f);

  NodeRef exists(const NodeRef& f, std::span<const BitVar> bits);
  /// exists bits. (f and g), without building the conjunction.
  NodeRef and_exists(const NodeRef& f, const NodeRef& g, std::span<const BitVar> bits);
  /// Sum of a real diagram over all assignments to `bits`.
  NodeRef sum_abstract(const NodeRef& f, std::span<const BitVar> bits);
  /// Simultaneous substitution of variables, pairwise (from -> to).
  NodeRef rename(const NodeRef& f, std::span<const std::pair<BitVar, BitVar>> mapping);

  // -- queries -----------------------------------------------------------
  bool is_terminal(const NodeRef& f) const;
  bool is_boolean(const NodeRef& f) const;
  Terminal terminal_value(const NodeRef& f) const;
  BitVar var_of(const NodeRef& f) const;
  NodeRef low(const NodeRef& f);
  NodeRef high(const NodeRef& f);

  std::size_t size(const NodeRef& f) const;
  std::size_t shared_size(std::span<const NodeRef> roots) const;
  BigCount sat_count(const NodeRef& f, std::span<const BitVar> support) const;
  Terminal eval(const NodeRef& f, const Assignment& a) const;
  std::vector<BitVar> support(const NodeRef& f) const;
  /// Distinct terminal values reachable from f.
  std::vector<Terminal> leaves(const NodeRef& f) const;
  std::size_t nodes_at(BitVar v) const { return unique_.at(v).size(); }

  // -- maintenance -------------------------------------------------------
  /// Exchange the variables at levels l and l+1 in place. Every live handle
  /// keeps denoting the same function.
  void swap_adjacent(Level l);
  void collect_garbage();
  AuditReport audit() const;
  std::string to_dot(const NodeRef& f,
                     const std::function<std::string(BitVar)>& name = {}) const;

 private:
  friend class NodeRef;

  struct Node {
    BitVar var;
    std::uint32_t low;
    std::uint32_t high;
    std::uint32_t ref;  // parent edges
    std::uint32_t ext;  // handles
    Terminal::Kind kind;
    bool free;
    double value;
  };

  struct CacheKey {
    std::uint32_t op, a, b, c;
    bool operator==(const CacheKey&) const = default;
  };
  struct CacheHash {
    std::size_t operator()(const CacheKey& k) const noexcept;
  };
  struct PairHash {
    std::size_t operator()(std::uint64_t k) const noexcept;
  };
  using UniqueTable = std::unordered_map<std::uint64_t, std::uint32_t, PairHash>;

  static std::uint64_t key_of(std::uint32_t low, std::uint32_t high) {
    return (static_cast<std::uint64_t>(low) << 32) | high;
  }

  NodeRef wrap(std::uint32_t i) { return NodeRef(this, i); }
  void check(const NodeRef& f) const;
  void incref_ext(std::uint32_t i) { ++nodes_[i].ext; }
  void decref_ext(std::uint32_t i) { --nodes_[i].ext; }

  Level level(std::uint32_t i) const {
    const BitVar v = nodes_[i].var;
    return v == kTerminalVar ? kTerminalLevel : perm_[v];
  }
  bool terminal(std::uint32_t i) const { return nodes_[i].var == kTerminalVar; }

  std::uint32_t allocate();
  std::uint32_t mk(BitVar v, std::uint32_t low, std::uint32_t high);
  std::uint32_t mk_terminal(const Terminal& t);
  void maybe_collect();
  void check_deadline();
  void release(std::uint32_t i);
  void deref(std::uint32_t i);
  void recount_refs();

  std::uint32_t apply_rec(Op op, std::uint32_t f, std::uint32_t g);
  std::uint32_t ite_rec(std::uint32_t f, std::uint32_t g, std::uint32_t h);
  std::uint32_t not_rec(std::uint32_t f);
  std::uint32_t to_real_rec(std::uint32_t f);
  std::uint32_t exists_rec(std::uint32_t f, std::uint32_t cube);
  std::uint32_t and_exists_rec(std::uint32_t f, std::uint32_t g, std::uint32_t cube);
  std::uint32_t sum_rec(std::uint32_t f, std::uint32_t cube);
  std::uint32_t make_cube(std::span<const BitVar> bits);
  std::optional<std::uint32_t> terminal_case(Op op, std::uint32_t f, std::uint32_t g);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> free_list_;
  std::vector<UniqueTable> unique_;
  std::unordered_map<std::uint64_t, std::uint32_t> reals_;
  std::unordered_map<CacheKey, std::uint32_t, CacheHash> cache_;
  std::vector<Level> perm_;
  std::vector<BitVar> invperm_;

  std::size_t node_count_ = 0;
  std::size_t peak_node_count_ = 0;
  std::size_t node_limit_ = kUnlimitedNodes;
  std::size_t gc_threshold_ = 0;
  std::optional<Clock::time_point> deadline_;
  std::uint32_t ticks_ = 0;
  bool dirty_ = false;  // unreferenced nodes may exist
};

}  // namespace ivr

template <>
struct std::hash<ivr::NodeRef> {
  std::size_t operator()(const ivr::NodeRef& r) const noexcept {
    return std::hash<std::uint64_t>{}(
        (reinterpret_cast<std::uintptr_t>(r.table()) << 20) ^ r.index());
  }
};
