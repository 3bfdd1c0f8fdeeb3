#include "ivr/explicit.hpp"

#include <deque>
#include <map>
#include <sstream>

namespace ivr {

std::size_t ExplicitModel::edge_count() const {
  std::size_t n = 0;
  for (const auto& s : successors) n += s.size();
  return n;
}

std::optional<std::size_t> ExplicitModel::find(const Evaluation& eta) const {
  const auto it = index_.find(eta);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string describe(const Program& p, const Evaluation& eta) {
  std::ostringstream os;
  os << '(';
  for (std::size_t v = 0; v < p.vars.size(); ++v) {
    if (v > 0) os << ", ";
    os << p.vars[v].name << '=' << eta[v];
  }
  os << ')';
  return os.str();
}

}  // namespace

std::vector<Evaluation> initial_evaluations(const Program& p, std::size_t bound) {
  // Enumerate the full product of domains; only viable on small programs.
  std::uint64_t total = 1;
  for (const auto& v : p.vars) {
    total *= v.domain.size();
    if (total > bound) throw ExplicitBoundExceeded(bound);
  }
  std::vector<Evaluation> out;
  Evaluation eta;
  for (const auto& v : p.vars) eta.values.push_back(v.domain.lower);
  for (std::uint64_t k = 0; k < total; ++k) {
    if (eval_bool(p.init, eta)) out.push_back(eta);
    // Odometer increment, last variable fastest.
    for (std::size_t v = p.vars.size(); v-- > 0;) {
      if (eta.values[v] < p.vars[v].domain.upper) {
        ++eta.values[v];
        break;
      }
      eta.values[v] = p.vars[v].domain.lower;
    }
  }
  return out;
}

ExplicitModel explicit_semantics(const Program& p, std::size_t state_bound) {
  ExplicitModel m;
  std::deque<std::size_t> queue;
  const auto intern = [&](const Evaluation& eta) {
    if (auto it = m.index_.find(eta); it != m.index_.end()) return it->second;
    if (m.states.size() >= state_bound) throw ExplicitBoundExceeded(state_bound);
    const std::size_t id = m.states.size();
    m.states.push_back(eta);
    m.successors.emplace_back();
    m.index_.emplace(eta, id);
    queue.push_back(id);
    return id;
  };

  // The init enumeration may look at more evaluations than are reachable.
  const std::size_t init_bound = std::max<std::size_t>(state_bound, 1) << 12;
  for (const auto& eta : initial_evaluations(p, init_bound)) m.initial.push_back(intern(eta));

  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    const Evaluation eta = m.states[s];
    const Command* enabled = nullptr;
    for (const auto& c : p.commands) {
      if (!eval_bool(c.guard, eta)) continue;
      if (enabled)
        throw OverlappingGuards("several commands enabled in state " + describe(p, eta));
      enabled = &c;
    }
    std::map<std::size_t, double> out;
    if (!enabled) {
      out[s] = 1.0;
    } else {
      for (const auto& b : enabled->branches) {
        Evaluation next = eta;
        for (const auto& a : b.updates) {
          const std::int64_t value = eval_int(a.value, eta);
          if (!p.vars[a.var].domain.contains(value)) {
            throw OutOfDomainUpdate("update drives " + p.vars[a.var].name + " to " +
                                    std::to_string(value) + " in state " + describe(p, eta) +
                                    (enabled->action.empty() ? "" : " via [" + enabled->action + "]"));
          }
          next.values[a.var] = value;
        }
        out[intern(next)] += b.probability;
      }
    }
    m.successors[s].assign(out.begin(), out.end());
  }
  return m;
}

}  // namespace ivr
