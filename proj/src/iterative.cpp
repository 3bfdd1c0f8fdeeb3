#include "ivr/iterative.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace ivr {

std::size_t EvaluationDomain::total() const {
  std::size_t n = 0;
  for (const auto& s : sets) n += s.size();
  return n;
}

bool EvaluationDomain::contains(std::size_t v, std::int64_t x) const {
  return std::binary_search(sets.at(v).begin(), sets.at(v).end(), x);
}

std::string to_string(Selection s) {
  switch (s) {
    case Selection::PiMinimal: return "pi-min";
    case Selection::RhoMinimal: return "rho-min";
    case Selection::RhoMaximal: return "rho-max";
  }
  return "?";
}

std::optional<Selection> parse_selection(std::string_view name) {
  if (name == "pi-min") return Selection::PiMinimal;
  if (name == "rho-min") return Selection::RhoMinimal;
  if (name == "rho-max") return Selection::RhoMaximal;
  return std::nullopt;
}

ConstructionFailed::ConstructionFailed(std::size_t iteration, Cause cause,
                                       const std::string& detail,
                                       std::vector<IterationStats> rows, VarOrder order)
    : Error("construction failed in iteration " + std::to_string(iteration) + ": " + detail),
      iteration_(iteration),
      cause_(cause),
      detail_(detail),
      rows_(std::move(rows)),
      order_(std::move(order)) {}

namespace {

NodeRef value_cube(NodeTable& t, const Program& p, const Encoding& enc, std::size_t v,
                   std::int64_t x) {
  return expr_to_bdd(t, p, enc, expr::eq(v, x));
}

}  // namespace

EvaluationDomain goal_domain(const Program& p, const Encoding& enc) {
  auto table = make_table(enc, {});
  NodeTable& t = *table;
  const NodeRef init = expr_to_bdd(t, p, enc, p.init);
  const NodeRef none = t.boolean(false);
  if (init == none) throw EmptyInit();

  EvaluationDomain g;
  for (std::size_t v = 0; v < enc.num_vars(); ++v) {
    std::vector<BitVar> others;
    for (std::size_t w = 0; w < enc.num_vars(); ++w)
      if (w != v) others.insert(others.end(), enc.row_bits(w).begin(), enc.row_bits(w).end());
    const NodeRef projected = t.exists(init, others);
    std::vector<std::int64_t> values;
    const Domain& d = enc.domain(v);
    for (std::int64_t x = d.lower; x <= d.upper; ++x)
      if (!(t.apply(Op::And, projected, value_cube(t, p, enc, v, x)) == none)) values.push_back(x);
    g.sets.push_back(std::move(values));
  }
  return g;
}

ExprPtr cnf(const EvaluationDomain& e, const VarOrder& order) {
  std::vector<ExprPtr> clauses;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t v = order[i];
    std::vector<ExprPtr> literals;
    for (std::int64_t x : e[v]) literals.push_back(expr::eq(v, x));
    clauses.push_back(expr::any_of(literals));
  }
  return expr::all_of(clauses);
}

std::size_t pick_variable(Selection sel, const EvaluationDomain& e, const EvaluationDomain& g,
                          const VarOrder& pi, const VarOrder& rho) {
  const VarOrder& order = sel == Selection::PiMinimal ? pi : rho;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t v = order[i];
    if (e[v] == g[v]) continue;
    best = v;
    if (sel != Selection::RhoMaximal) break;
  }
  if (!best) throw std::logic_error("pick_variable called with E = G");
  return *best;
}

EvaluationDomain grow(const EvaluationDomain& e, const EvaluationDomain& g, std::size_t v) {
  EvaluationDomain out = e;
  for (std::int64_t x : g[v]) {
    if (!e.contains(v, x)) {
      auto& s = out.sets[v];
      s.insert(std::lower_bound(s.begin(), s.end(), x), x);
      return out;
    }
  }
  throw std::logic_error("grow: E(v) already equals G(v)");
}

Evaluation default_evaluation(const Program& p, const VarOrder& pi) {
  const Encoding enc(p, pi);
  auto table = make_table(enc, {});
  NodeTable& t = *table;
  const NodeRef none = t.boolean(false);
  NodeRef cur = expr_to_bdd(t, p, enc, p.init);
  if (cur == none) throw EmptyInit();
  Evaluation eta;
  eta.values.assign(p.vars.size(), 0);
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const std::size_t v = pi[i];
    const Domain& d = enc.domain(v);
    for (std::int64_t x = d.lower; x <= d.upper; ++x) {
      const NodeRef next = t.apply(Op::And, cur, value_cube(t, p, enc, v, x));
      if (!(next == none)) {
        cur = next;
        eta.values[v] = x;
        break;
      }
    }
  }
  return eta;
}

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Row {
  IterationStats stats;
  VarOrder order;
};

Row build_and_reorder(std::size_t iteration, const Program& p, const VarOrder& order,
                      const Budget& budget, const SiftConfig& sift) {
  Row row;
  row.stats.iteration = iteration;
  const auto t0 = Clock::now();
  SymbolicModel model = construct(p, order, budget);
  NodeTable& t = *model.table;
  const std::vector<BitVar> rows = model.encoding.all_row_bits();
  row.stats.combinations = t.sat_count(model.init, rows);
  row.stats.states = model.stats.states;
  model.keep_only_transitions();
  row.stats.model_time_s = seconds_since(t0);
  row.stats.nodes_before = t.size(model.trans);

  // Budgets bound construction only; sifting is bounded by its growth factor.
  t.set_node_limit(kUnlimitedNodes);
  t.set_deadline(std::nullopt);
  const auto t1 = Clock::now();
  const NodeRef roots[] = {model.trans};
  row.order = reorder(t, roots, model.encoding.groups(), order, sift);
  row.stats.nodes_after = t.size(model.trans);
  row.stats.reorder_time_s = seconds_since(t1);
  return row;
}

}  // namespace

IterateResult iterate(const Program& p, const VarOrder& pi, std::optional<Evaluation> eta,
                      const Heuristic& h, const Budget& budget, const IterateOptions& opts) {
  if (h.step < 1) throw std::invalid_argument("step size must be at least 1");
  if (pi.size() != p.vars.size()) throw std::invalid_argument("order does not cover the program");

  const Encoding enc(p, pi);
  const EvaluationDomain goal = goal_domain(p, enc);
  const Evaluation start = eta ? *eta : default_evaluation(p, pi);
  if (start.values.size() != p.vars.size())
    throw std::invalid_argument("evaluation does not cover the program");
  for (std::size_t v = 0; v < p.vars.size(); ++v)
    if (!p.vars[v].domain.contains(start[v]))
      throw std::invalid_argument("evaluation leaves the domain of " + p.vars[v].name);
  if (!eval_bool(p.init, start)) throw std::invalid_argument("evaluation does not satisfy init");

  IterateResult out;
  out.order = pi;
  EvaluationDomain e;
  for (std::size_t v = 0; v < p.vars.size(); ++v) e.sets.push_back({start[v]});

  const auto failed = [&](std::size_t iteration, ConstructionFailed::Cause cause,
                          const std::string& what) {
    return ConstructionFailed(iteration, cause, what, out.rows, out.order);
  };

  std::vector<ExprPtr> pins;
  for (std::size_t v = 0; v < p.vars.size(); ++v) pins.push_back(expr::eq(v, start[v]));
  Budget first = budget;
  first.deadline.reset();
  try {
    Row r = build_and_reorder(0, p.with_init(expr::all_of(pins)), pi, first, opts.sift);
    out.rows.push_back(std::move(r.stats));
    out.order = std::move(r.order);
  } catch (const NodeLimitExceeded& ex) {
    throw failed(0, ConstructionFailed::Cause::NodeLimit, ex.what());
  } catch (const TimeBudgetExceeded& ex) {
    throw failed(0, ConstructionFailed::Cause::TimeBudget, ex.what());
  }

  Budget later = budget;
  later.deadline = opts.deadline;
  const auto past_deadline = [&] { return opts.deadline && Clock::now() >= *opts.deadline; };

  for (std::size_t i = 1; e != goal; ++i) {
    if (past_deadline()) {
      out.truncated = true;
      break;
    }
    EvaluationDomain next = e;
    for (std::size_t k = 0; k < h.step && next != goal; ++k)
      next = grow(next, goal, pick_variable(h.selection, next, goal, pi, out.order));

    const Program member = p.with_init(expr::binary(ExprKind::And, p.init, cnf(next, pi)));
    try {
      Row r = build_and_reorder(i, member, out.order, later, opts.sift);
      out.rows.push_back(std::move(r.stats));
      out.order = std::move(r.order);
      e = std::move(next);
    } catch (const NodeLimitExceeded& ex) {
      throw failed(i, ConstructionFailed::Cause::NodeLimit, ex.what());
    } catch (const TimeBudgetExceeded& ex) {
      if (past_deadline()) {
        out.truncated = true;
        break;
      }
      throw failed(i, ConstructionFailed::Cause::TimeBudget, ex.what());
    }
  }
  out.domain = std::move(e);
  return out;
}

}  // namespace ivr
