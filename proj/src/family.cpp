#include "ivr/family.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ivr {

std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::None: return "none";
    case Mechanism::Comparison: return "comparison";
    case Mechanism::Voting: return "voting";
  }
  return "?";
}

std::optional<Mechanism> parse_mechanism(std::string_view name) {
  if (name == "none") return Mechanism::None;
  if (name == "comparison") return Mechanism::Comparison;
  if (name == "voting") return Mechanism::Voting;
  return std::nullopt;
}

BlockOutcome block_outcome(Mechanism m, double p) {
  const double q = 1.0 - p;
  switch (m) {
    case Mechanism::None: return {p, 0.0};
    // Both replicas wrong goes unnoticed; exactly one wrong is a mismatch.
    case Mechanism::Comparison: return {p * p, 2.0 * p * q};
    // Majority of three is wrong.
    case Mechanism::Voting: return {3.0 * p * p * q + p * p * p, 0.0};
  }
  return {};
}

namespace {

std::string number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

struct Out {
  double probability;
  std::string update;
};

void emit(std::ostringstream& os, const std::string& guard, const std::vector<Out>& outs) {
  os << "[] " << guard << " ->";
  bool first = true;
  for (const auto& o : outs) {
    if (o.probability <= 0.0) continue;
    os << (first ? " " : " + ") << number(o.probability) << ":" << o.update;
    first = false;
  }
  os << ";\n";
}

}  // namespace

GeneratedFamily generate(const GenConfig& cfg) {
  if (cfg.blocks < 1) throw std::invalid_argument("at least one block is required");
  if (!(cfg.p >= 0.0 && cfg.p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (cfg.mechanisms.empty()) throw std::invalid_argument("at least one mechanism is required");
  if (cfg.jitter < 0.0) throw std::invalid_argument("jitter must be non-negative");
  std::vector<Mechanism> mechs = cfg.mechanisms;
  std::sort(mechs.begin(), mechs.end());
  if (std::adjacent_find(mechs.begin(), mechs.end()) != mechs.end())
    throw std::invalid_argument("duplicate mechanism");

  GeneratedFamily out;
  const std::size_t m = cfg.blocks;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> spread(-1.0, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    double p = cfg.p;
    if (cfg.jitter > 0.0) p = std::clamp(p * (1.0 + cfg.jitter * spread(rng)), 0.0, 1.0);
    out.block_p.push_back(p);
  }

  std::ostringstream os;
  os << "// redundancy family, " << m << " blocks, p = " << number(cfg.p) << "\n\n";
  for (std::size_t i = 0; i < m; ++i) os << "var s" << i << " : [0..2];\n";
  os << "var pc : [0.." << m << "];\n";
  os << "var err : [0..1];\n";
  os << "var fail : [0..1];\n\n";

  os << "init\n";
  for (std::size_t i = 0; i < m; ++i) {
    os << "  (";
    for (std::size_t k = 0; k < mechs.size(); ++k)
      os << (k ? " | " : "") << "s" << i << "=" << static_cast<int>(mechs[k]);
    os << ") &\n";
  }
  os << "  pc=0 & err=0 & fail=0\nendinit\n";

  for (std::size_t i = 0; i < m; ++i) {
    const std::string s = "s" + std::to_string(i);
    const std::string at = "pc=" + std::to_string(i);
    const std::string advance = "(pc'=" + std::to_string(i + 1) + ")";
    const std::string wrong = "(err'=1)&" + advance;
    const double p = out.block_p[i];
    const double q = 1.0 - p;
    os << "\n// block " << i << "\n";
    for (Mechanism mech : mechs) {
      const std::string guard =
          at + " & fail=0 & err=0 & " + s + "=" + std::to_string(static_cast<int>(mech));
      const BlockOutcome o = block_outcome(mech, p);
      switch (mech) {
        case Mechanism::None:
          emit(os, guard, {{o.error, wrong}, {q, advance}});
          break;
        case Mechanism::Comparison:
          emit(os, guard, {{o.error, wrong}, {o.fail_stop, "(fail'=1)"}, {q * q, advance}});
          break;
        case Mechanism::Voting:
          emit(os, guard, {{o.error, wrong}, {1.0 - o.error, advance}});
          break;
      }
    }
    // An erroneous token passes through whatever protection is selected.
    emit(os, at + " & fail=0 & err=1", {{1.0, advance}});
  }
  out.source = os.str();

  out.family_size = 1;
  for (std::size_t i = 0; i < m; ++i) out.family_size *= mechs.size();

  nlohmann::ordered_json meta;
  meta["m"] = m;
  meta["p"] = cfg.p;
  meta["mechanisms"] = nlohmann::json::array();
  for (Mechanism mech : mechs) meta["mechanisms"].push_back(to_string(mech));
  meta["family_size"] = out.family_size.str();
  out.metadata_json = meta.dump(2) + "\n";
  return out;
}

}  // namespace ivr
