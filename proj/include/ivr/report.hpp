#pragma once

// CSV and JSON renderings of statistics rows.

#include <optional>
#include <string>
#include <vector>

#include "ivr/compare.hpp"
#include "ivr/iterative.hpp"

namespace ivr {

/// Header: iteration,combinations,states,nodes_before,nodes_after,model_time_s,reorder_time_s
std::string iteration_csv(const std::vector<IterationStats>& rows);

/// Rows, final order (as variable names) and, when the run stopped early,
/// the failing iteration and reason.
std::string iteration_json(const Program& p, const std::vector<IterationStats>& rows,
                           const VarOrder& order, bool truncated,
                           const std::optional<std::size_t>& failed_iteration = std::nullopt,
                           const std::string& error = {});

/// Header: selection,step,iterations,combinations,states,nodes
std::string compare_csv(const std::vector<CompareRow>& rows);
std::string compare_json(const std::vector<CompareRow>& rows);

/// JSON array of variable names in `order`.
std::string order_json(const Program& p, const VarOrder& order);

/// Fixed two-decimal rendering used for the time columns.
std::string seconds(double s);

}  // namespace ivr
