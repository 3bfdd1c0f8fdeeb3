#include <gtest/gtest.h>

#include "ivr/compare.hpp"
#include "ivr/family.hpp"

using namespace ivr;

namespace {

Program family(std::size_t blocks) {
  GenConfig cfg;
  cfg.blocks = blocks;
  return parse(generate(cfg).source);
}

TEST(Compare, SerialAndParallelAgree) {
  const Program p = family(3);
  const VarOrder pi = VarOrder::identity(p.vars.size());
  CompareConfig cfg;
  cfg.workers = 3;
  const auto serial = compare_serial(p, pi, cfg);
  const auto parallel = compare_parallel(p, pi, cfg);
  ASSERT_EQ(serial.size(), 12u);
  EXPECT_EQ(serial, parallel);
  for (const auto& r : serial) {
    EXPECT_EQ(r.status, CellStatus::Completed);
    EXPECT_EQ(r.combinations, 27);
  }
  EXPECT_EQ(serial[0].selection, Selection::PiMinimal);
  EXPECT_EQ(serial[4].selection, Selection::RhoMinimal);
  EXPECT_EQ(serial[7].step, 4u);
}

TEST(Compare, ZeroDeadlineStopsAtRowZero) {
  const Program p = family(3);
  CompareConfig cfg;
  cfg.deadline_s = 0.0;
  for (const auto& r : compare_parallel(p, VarOrder::identity(p.vars.size()), cfg)) {
    EXPECT_EQ(r.iterations, 0u);
    EXPECT_EQ(r.combinations, 1);
    EXPECT_EQ(r.status, CellStatus::Truncated);
  }
}

TEST(Compare, FailuresStayInTheirCell) {
  const Program p = family(3);
  CompareConfig cfg;
  cfg.budget.node_limit = 8;
  cfg.steps = {1, 2};
  cfg.workers = 2;
  const auto rows = compare_parallel(p, VarOrder::identity(p.vars.size()), cfg);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, CellStatus::Failed);
    EXPECT_FALSE(r.message.empty());
  }
  EXPECT_THROW(compare_parallel(p, VarOrder::identity(p.vars.size()), CompareConfig{.workers = 0}),
               std::invalid_argument);
}

}  // namespace
