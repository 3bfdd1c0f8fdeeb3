#include <gtest/gtest.h>

#include "ivr/explicit.hpp"

using namespace ivr;

namespace {

double prob(const ExplicitModel& m, std::size_t from, std::size_t to) {
  for (const auto& [t, p] : m.successors[from])
    if (t == to) return p;
  return 0.0;
}

TEST(Explicit, NoCommandsGivesSelfLoop) {
  const ExplicitModel m = explicit_semantics(parse("var x : [0..3] init 1;\n"), 100);
  ASSERT_EQ(m.states.size(), 1u);
  EXPECT_EQ(m.edge_count(), 1u);
  EXPECT_EQ(prob(m, 0, 0), 1.0);
}

TEST(Explicit, CounterChain) {
  const ExplicitModel m = explicit_semantics(parse("var x : [0..2] init 0;\n[] x<2 -> 1:(x'=x+1);\n"), 100);
  ASSERT_EQ(m.states.size(), 3u);
  const auto s0 = *m.find(Evaluation{{0}});
  const auto s1 = *m.find(Evaluation{{1}});
  const auto s2 = *m.find(Evaluation{{2}});
  EXPECT_EQ(prob(m, s0, s1), 1.0);
  EXPECT_EQ(prob(m, s1, s2), 1.0);
  EXPECT_EQ(prob(m, s2, s2), 1.0);
}

TEST(Explicit, UnionOverFamilyMembers) {
  const Program p = parse(
      "var x : [0..1];\nvar y : [4..6];\ninit (x=1) & ((y=4) | (y=5)) endinit\n"
      "[] x=1 -> 0.5:(x'=0) + 0.5:true;\n");
  const ExplicitModel m = explicit_semantics(p, 100);
  EXPECT_EQ(m.initial.size(), 2u);
  EXPECT_EQ(m.states.size(), 4u);
  EXPECT_FALSE(m.find(Evaluation{{1, 6}}).has_value());
  for (const auto& succ : m.successors) {
    double total = 0.0;
    for (const auto& [t, pr] : succ) total += pr;
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(Explicit, MergesBranchesWithTheSameTarget) {
  const ExplicitModel m = explicit_semantics(
      parse("var x : [0..1];\n[] x=0 -> 0.25:(x'=1) + 0.75:(x'=1);\n"), 10);
  EXPECT_EQ(m.successors[0].size(), 1u);
  EXPECT_EQ(m.successors[0][0].second, 1.0);
}

TEST(Explicit, Errors) {
  EXPECT_THROW(explicit_semantics(parse("var x : [0..2];\n[] true -> (x'=x+1);\n"), 100),
               OutOfDomainUpdate);
  EXPECT_THROW(explicit_semantics(parse("var x : [0..2];\n[] x<2 -> (x'=x+1);\n[] x>=1 -> true;\n"), 100),
               OverlappingGuards);
  EXPECT_THROW(explicit_semantics(parse("var x : [0..9];\n[] x<9 -> (x'=x+1);\n"), 5),
               ExplicitBoundExceeded);
}

TEST(Explicit, InitialEvaluationsInLexicographicOrder) {
  const Program p = parse("var a : [0..1];\nvar b : [0..2];\ninit a=1 | b=2 endinit\n");
  const auto init = initial_evaluations(p, 100);
  const std::vector<Evaluation> expected{{{0, 2}}, {{1, 0}}, {{1, 1}}, {{1, 2}}};
  EXPECT_EQ(init, expected);
}

}  // namespace
