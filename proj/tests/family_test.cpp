#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "ivr/explicit.hpp"
#include "ivr/family.hpp"
#include "ivr/symbolic.hpp"

using namespace ivr;

namespace {

// Replica outcomes enumerated one by one: bit r set means replica r erred.
BlockOutcome enumerate(Mechanism m, double p) {
  const unsigned replicas = m == Mechanism::None ? 1 : (m == Mechanism::Comparison ? 2 : 3);
  BlockOutcome out;
  for (unsigned mask = 0; mask < (1u << replicas); ++mask) {
    double w = 1.0;
    unsigned wrong = 0;
    for (unsigned r = 0; r < replicas; ++r) {
      const bool bad = (mask >> r) & 1u;
      w *= bad ? p : 1.0 - p;
      wrong += bad;
    }
    if (m == Mechanism::Comparison) {
      if (wrong == 2) out.error += w;
      if (wrong == 1) out.fail_stop += w;
    } else if (2 * wrong > replicas) {
      out.error += w;
    }
  }
  return out;
}

TEST(Family, ClosedFormsMatchEnumeration) {
  for (double p : {0.0, 0.1, 0.5, 0.37, 1.0}) {
    for (auto m : {Mechanism::None, Mechanism::Comparison, Mechanism::Voting}) {
      const BlockOutcome a = block_outcome(m, p);
      const BlockOutcome b = enumerate(m, p);
      EXPECT_NEAR(a.error, b.error, 1e-12);
      EXPECT_NEAR(a.fail_stop, b.fail_stop, 1e-12);
    }
  }
  EXPECT_NEAR(block_outcome(Mechanism::Voting, 0.1).error, 0.028, 1e-15);
  EXPECT_NEAR(block_outcome(Mechanism::Comparison, 0.1).error, 0.01, 1e-15);
  EXPECT_NEAR(block_outcome(Mechanism::Comparison, 0.1).fail_stop, 0.18, 1e-15);
}

TEST(Family, SizeAndMetadata) {
  GenConfig cfg;
  cfg.blocks = 5;
  const GeneratedFamily f = generate(cfg);
  EXPECT_EQ(f.family_size, 243);
  const auto meta = nlohmann::json::parse(f.metadata_json);
  EXPECT_EQ(meta["m"], 5);
  EXPECT_EQ(meta["family_size"], "243");
  EXPECT_EQ(meta["mechanisms"].size(), 3u);

  cfg.blocks = 13;
  EXPECT_EQ(generate(cfg).family_size.str(), "1594323");

  cfg.blocks = 4;
  cfg.mechanisms = {Mechanism::Voting, Mechanism::None};
  EXPECT_EQ(generate(cfg).family_size, 16);
}

TEST(Family, InitCountsMembers) {
  GenConfig cfg;
  cfg.blocks = 4;
  cfg.mechanisms = {Mechanism::Comparison, Mechanism::Voting};
  const GeneratedFamily f = generate(cfg);
  const Program p = parse(f.source);
  const Encoding enc(p, VarOrder::identity(p.vars.size()));
  auto t = make_table(enc, {});
  EXPECT_EQ(t->sat_count(expr_to_bdd(*t, p, enc, p.init), enc.all_row_bits()), f.family_size);
}

TEST(Family, Deterministic) {
  GenConfig cfg;
  cfg.blocks = 3;
  cfg.jitter = 0.5;
  cfg.seed = 42;
  EXPECT_EQ(generate(cfg).source, generate(cfg).source);
  const GeneratedFamily f = generate(cfg);
  EXPECT_NE(f.block_p[0], cfg.p);
  cfg.seed = 43;
  EXPECT_NE(generate(cfg).source, f.source);
  parse(f.source);
}

TEST(Family, InvalidConfigs) {
  GenConfig cfg;
  cfg.blocks = 0;
  EXPECT_THROW(generate(cfg), std::invalid_argument);
  cfg.blocks = 1;
  cfg.p = 1.5;
  EXPECT_THROW(generate(cfg), std::invalid_argument);
  cfg.p = 0.1;
  cfg.mechanisms.clear();
  EXPECT_THROW(generate(cfg), std::invalid_argument);
  cfg.mechanisms = {Mechanism::None, Mechanism::None};
  EXPECT_THROW(generate(cfg), std::invalid_argument);
}

TEST(Family, MemberProbabilitiesMatchExplicitSemantics) {
  for (double p : {0.0, 0.1, 0.5}) {
    GenConfig cfg;
    cfg.blocks = 2;
    cfg.p = p;
    const Program prog = parse(generate(cfg).source);
    const ExplicitModel m = explicit_semantics(prog, 10000);
    // Variables: s0 s1 pc err fail.
    for (std::size_t s = 0; s < m.states.size(); ++s) {
      const Evaluation& eta = m.states[s];
      const std::int64_t pc = eta[2];
      if (pc >= 2 || eta[3] != 0 || eta[4] != 0) continue;
      const auto mech = static_cast<Mechanism>(eta[pc]);
      const BlockOutcome want = block_outcome(mech, p);
      double err = 0.0, fail = 0.0, total = 0.0;
      for (const auto& [t, pr] : m.successors[s]) {
        total += pr;
        if (m.states[t][3] == 1) err += pr;
        if (m.states[t][4] == 1) fail += pr;
      }
      EXPECT_NEAR(err, want.error, 1e-12);
      EXPECT_NEAR(fail, want.fail_stop, 1e-12);
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(Family, ErroneousTokenPropagates) {
  GenConfig cfg;
  cfg.blocks = 2;
  cfg.p = 0.3;
  const Program prog = parse(generate(cfg).source);
  const ExplicitModel m = explicit_semantics(prog, 10000);
  for (std::int64_t s1 = 0; s1 <= 2; ++s1) {
    const auto s = m.find(Evaluation{{0, s1, 1, 1, 0}});
    ASSERT_TRUE(s.has_value());
    ASSERT_EQ(m.successors[*s].size(), 1u);
    EXPECT_EQ(m.states[m.successors[*s][0].first], (Evaluation{{0, s1, 2, 1, 0}}));
  }
}

TEST(Family, MechanismNames) {
  for (auto m : {Mechanism::None, Mechanism::Comparison, Mechanism::Voting})
    EXPECT_EQ(parse_mechanism(to_string(m)), m);
  EXPECT_FALSE(parse_mechanism("tmr").has_value());
}

}  // namespace
