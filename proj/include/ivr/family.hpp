#pragma once

// Synthetic redundancy families: a pipeline of m blocks, each protected by
// one of {none, comparison, voting} chosen through a frozen switch variable.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ivr/bdd.hpp"

namespace ivr {

enum class Mechanism { None = 0, Comparison = 1, Voting = 2 };

std::string to_string(Mechanism m);
std::optional<Mechanism> parse_mechanism(std::string_view name);

struct GenConfig {
  std::size_t blocks = 1;
  double p = 0.01;
  /// Allowed switch values for every block, any order, no duplicates.
  std::vector<Mechanism> mechanisms{Mechanism::None, Mechanism::Comparison, Mechanism::Voting};
  std::uint64_t seed = 0;
  /// Relative per-block spread of p; 0 keeps every block at p.
  double jitter = 0.0;
};

/// One block execution on a correct input token.
struct BlockOutcome {
  double error = 0.0;      // silent erroneous output
  double fail_stop = 0.0;  // detected, moves to the fail-stop state
};

BlockOutcome block_outcome(Mechanism m, double p);

struct GeneratedFamily {
  std::string source;
  std::string metadata_json;
  BigCount family_size;
  /// Fault probability used for each block after jitter.
  std::vector<double> block_p;
};

/// Throws std::invalid_argument on an invalid config.
GeneratedFamily generate(const GenConfig& cfg);

}  // namespace ivr
