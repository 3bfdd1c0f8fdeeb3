#pragma once

// Heuristic comparison: one iterate run per (selection, step size) cell,
// each with its own table and budget.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ivr/iterative.hpp"

namespace ivr {

struct CompareConfig {
  std::vector<Selection> selections{Selection::PiMinimal, Selection::RhoMinimal,
                                    Selection::RhoMaximal};
  std::vector<std::size_t> steps{1, 2, 3, 4};
  Budget budget;
  SiftConfig sift;
  /// Wall-clock allowance per cell, counted from the cell's start.
  std::optional<double> deadline_s;
  std::size_t workers = 1;
};

enum class CellStatus { Completed, Truncated, Failed };

std::string to_string(CellStatus s);

struct CompareRow {
  Selection selection = Selection::PiMinimal;
  std::size_t step = 1;
  /// Index of the last completed row.
  std::size_t iterations = 0;
  BigCount combinations;
  BigCount states;
  std::size_t nodes = 0;
  CellStatus status = CellStatus::Completed;
  std::string message;

  friend bool operator==(const CompareRow&, const CompareRow&) = default;
};

/// Cells in selection-major order, computed one after another.
std::vector<CompareRow> compare_serial(const Program& p, const VarOrder& pi,
                                       const CompareConfig& cfg);

/// Same cells spread over cfg.workers OpenMP threads.
std::vector<CompareRow> compare_parallel(const Program& p, const VarOrder& pi,
                                         const CompareConfig& cfg);

}  // namespace ivr
