#include "ivr/report.hpp"

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ivr {

using nlohmann::ordered_json;

std::string seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", s);
  return buf;
}

namespace {

ordered_json order_array(const Program& p, const VarOrder& order) {
  ordered_json a = ordered_json::array();
  for (std::size_t v : order.vars()) a.push_back(p.vars.at(v).name);
  return a;
}

}  // namespace

std::string iteration_csv(const std::vector<IterationStats>& rows) {
  std::ostringstream os;
  os << "iteration,combinations,states,nodes_before,nodes_after,model_time_s,reorder_time_s\n";
  for (const auto& r : rows) {
    os << r.iteration << ',' << r.combinations.str() << ',' << r.states.str() << ','
       << r.nodes_before << ',' << r.nodes_after << ',' << seconds(r.model_time_s) << ','
       << seconds(r.reorder_time_s) << '\n';
  }
  return os.str();
}

std::string iteration_json(const Program& p, const std::vector<IterationStats>& rows,
                           const VarOrder& order, bool truncated,
                           const std::optional<std::size_t>& failed_iteration,
                           const std::string& error) {
  ordered_json j;
  ordered_json list = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row;
    row["iteration"] = r.iteration;
    row["combinations"] = r.combinations.str();
    row["states"] = r.states.str();
    row["nodes_before"] = r.nodes_before;
    row["nodes_after"] = r.nodes_after;
    row["model_time_s"] = seconds(r.model_time_s);
    row["reorder_time_s"] = seconds(r.reorder_time_s);
    list.push_back(std::move(row));
  }
  j["rows"] = std::move(list);
  j["order"] = order_array(p, order);
  j["truncated"] = truncated;
  if (failed_iteration) {
    j["failed_iteration"] = *failed_iteration;
    j["error"] = error;
  }
  return j.dump(2) + "\n";
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream os;
  os << "selection,step,iterations,combinations,states,nodes\n";
  for (const auto& r : rows) {
    os << to_string(r.selection) << ',' << r.step << ',' << r.iterations << ','
       << r.combinations.str() << ',' << r.states.str() << ',' << r.nodes << '\n';
  }
  return os.str();
}

std::string compare_json(const std::vector<CompareRow>& rows) {
  ordered_json list = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json row;
    row["selection"] = to_string(r.selection);
    row["step"] = r.step;
    row["iterations"] = r.iterations;
    row["combinations"] = r.combinations.str();
    row["states"] = r.states.str();
    row["nodes"] = r.nodes;
    row["status"] = to_string(r.status);
    if (!r.message.empty()) row["error"] = r.message;
    list.push_back(std::move(row));
  }
  return list.dump(2) + "\n";
}

std::string order_json(const Program& p, const VarOrder& order) {
  return order_array(p, order).dump() + "\n";
}

}  // namespace ivr
