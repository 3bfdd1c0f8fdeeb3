#include "ivr/compare.hpp"

#include <chrono>
#include <stdexcept>

namespace ivr {

std::string to_string(CellStatus s) {
  switch (s) {
    case CellStatus::Completed: return "completed";
    case CellStatus::Truncated: return "truncated";
    case CellStatus::Failed: return "failed";
  }
  return "?";
}

namespace {

struct Cell {
  Selection selection;
  std::size_t step;
};

std::vector<Cell> cells_of(const CompareConfig& cfg) {
  std::vector<Cell> cells;
  for (Selection s : cfg.selections)
    for (std::size_t n : cfg.steps) cells.push_back({s, n});
  return cells;
}

void fill_from(CompareRow& row, const std::vector<IterationStats>& rows) {
  if (rows.empty()) return;
  const IterationStats& last = rows.back();
  row.iterations = last.iteration;
  row.combinations = last.combinations;
  row.states = last.states;
  row.nodes = last.nodes_after;
}

CompareRow run_cell(const Program& p, const VarOrder& pi, const CompareConfig& cfg,
                    const Cell& cell) {
  CompareRow row;
  row.selection = cell.selection;
  row.step = cell.step;
  IterateOptions opts;
  opts.sift = cfg.sift;
  if (cfg.deadline_s) {
    opts.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(*cfg.deadline_s));
  }
  try {
    const IterateResult r = iterate(p, pi, std::nullopt, {cell.selection, cell.step}, cfg.budget, opts);
    fill_from(row, r.rows);
    row.status = r.truncated ? CellStatus::Truncated : CellStatus::Completed;
  } catch (const ConstructionFailed& e) {
    fill_from(row, e.rows());
    row.status = CellStatus::Failed;
    row.message = e.what();
  } catch (const std::exception& e) {
    row.status = CellStatus::Failed;
    row.message = e.what();
  }
  return row;
}

}  // namespace

std::vector<CompareRow> compare_serial(const Program& p, const VarOrder& pi,
                                       const CompareConfig& cfg) {
  std::vector<CompareRow> out;
  for (const Cell& c : cells_of(cfg)) out.push_back(run_cell(p, pi, cfg, c));
  return out;
}

std::vector<CompareRow> compare_parallel(const Program& p, const VarOrder& pi,
                                         const CompareConfig& cfg) {
  if (cfg.workers < 1) throw std::invalid_argument("worker count must be at least 1");
  const std::vector<Cell> cells = cells_of(cfg);
  std::vector<CompareRow> out(cells.size());
  const int n = static_cast<int>(cells.size());
  // Each cell owns its table; run_cell never lets an exception escape.
#pragma omp parallel for schedule(dynamic) num_threads(static_cast<int>(cfg.workers))
  for (int i = 0; i < n; ++i) out[i] = run_cell(p, pi, cfg, cells[i]);
  return out;
}

}  // namespace ivr
