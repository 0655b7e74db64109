#include <gtest/gtest.h>

#include "oracle.hpp"
#include "semcells/evolution.hpp"
#include "semcells/metrics.hpp"
#include "semcells/random.hpp"

using namespace semcells;

namespace {

Cell random_cell(random::Rng& rng, std::size_t g, std::size_t d) {
  std::vector<Chromosome> chromosomes;
  for (std::size_t j = 0; j < g; ++j) {
    std::vector<double> genes(d);
    for (auto& x : genes) x = rng.uniform(-2, 2);
    chromosomes.emplace_back(std::move(genes));
  }
  return Cell("w", std::move(chromosomes));
}

Trajectory trajectory_of(std::initializer_list<double> values) {
  Trajectory t("w");
  std::size_t step = 0;
  for (double v : values) t.add(step++, v);
  return t;
}

}  // namespace

TEST(Polysemy, IdenticalChromosomesGiveZero) {
  const Cell cell("w", {Chromosome({1, 2, 3}), Chromosome({1, 2, 3}),
                        Chromosome({1, 2, 3})});
  EXPECT_EQ(polysemy(cell), 0.0);
  EXPECT_EQ(polysemy(cell, VarianceMode::sample), 0.0);
}

TEST(Polysemy, HandComputedVariance) {
  const Cell cell("w", {Chromosome({0}), Chromosome({2})});
  EXPECT_DOUBLE_EQ(polysemy(cell), 1.0);
  EXPECT_DOUBLE_EQ(polysemy(cell, VarianceMode::sample), 2.0);
}

TEST(Polysemy, FreshCellMatchesClosedForm) {
  auto c = default_config();
  random::Rng rng(2);
  std::vector<double> base(50);
  for (auto& x : base) x = rng.uniform(-3, 3);

  const Cell positive = initial_cell("w", base, c);
  EXPECT_NEAR(oracle::initial_polysemy(50, 5, 0.01, false), 4.5e-4, 1e-18);
  EXPECT_NEAR(polysemy(positive), 4.5e-4, 1e-12);

  c.off_segment_sign = OffSegmentSign::negative;
  const Cell negative = initial_cell("w", base, c);
  EXPECT_NEAR(oracle::initial_polysemy(50, 5, 0.01, true), 1.25e-3, 1e-18);
  EXPECT_NEAR(polysemy(negative), 1.25e-3, 1e-12);
}

TEST(Polysemy, SampleModeNeedsTwoChromosomes) {
  const Cell cell("w", {Chromosome({1, 2})});
  EXPECT_EQ(polysemy(cell), 0.0);
  try {
    polysemy(cell, VarianceMode::sample);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SampleVarianceUndefined);
  }
}

TEST(Polysemy, MatchesOracleOnRandomCells) {
  random::Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t g = 1 + rng.below(6);
    const std::size_t d = 1 + rng.below(10);
    const Cell cell = random_cell(rng, g, d);
    oracle::NaiveCell rows;
    for (const auto& ch : cell.chromosomes()) {
      rows.emplace_back(ch.genes().begin(), ch.genes().end());
    }
    EXPECT_NEAR(polysemy(cell), oracle::polysemy(rows), 1e-12);
  }
}

TEST(Polysemy, TranslationInvariantAndQuadraticInScale) {
  random::Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Cell cell = random_cell(rng, 4, 6);
    std::vector<double> shift(6);
    for (auto& x : shift) x = rng.uniform(-5, 5);
    const double scale = rng.uniform(-3, 3);
    std::vector<Chromosome> shifted, scaled;
    for (const auto& ch : cell.chromosomes()) {
      std::vector<double> a(6), b(6);
      for (std::size_t k = 0; k < 6; ++k) {
        a[k] = ch[k] + shift[k];
        b[k] = ch[k] * scale;
      }
      shifted.emplace_back(a);
      scaled.emplace_back(b);
    }
    const double p = polysemy(cell);
    EXPECT_NEAR(polysemy(Cell("w", shifted)), p, 1e-12 * (1 + p));
    EXPECT_NEAR(polysemy(Cell("w", scaled)), scale * scale * p, 1e-12 * (1 + p));
  }
}

TEST(Summarize, MonotoneSequence) {
  const auto s = summarize(trajectory_of({1, 2, 3}));
  EXPECT_EQ(s.decrease_count, 0u);
  EXPECT_DOUBLE_EQ(s.monotonicity_ratio, 1.0);
  EXPECT_DOUBLE_EQ(s.max_drawdown, 0.0);
  EXPECT_DOUBLE_EQ(s.initial, 1.0);
  EXPECT_DOUBLE_EQ(s.final, 3.0);
}

TEST(Summarize, SingleDip) {
  const auto s = summarize(trajectory_of({1, 3, 2, 4}));
  EXPECT_EQ(s.decrease_count, 1u);
  EXPECT_DOUBLE_EQ(s.max_drawdown, 1.0);
  EXPECT_DOUBLE_EQ(s.monotonicity_ratio, 2.0 / 3.0);
}

TEST(Summarize, SingleDrop) {
  const auto s = summarize(trajectory_of({5, 1}));
  EXPECT_DOUBLE_EQ(s.monotonicity_ratio, 0.0);
  EXPECT_DOUBLE_EQ(s.max_drawdown, 4.0);
}

TEST(Summarize, DrawdownIsPeakToLaterTrough) {
  const auto s = summarize(trajectory_of({2, 6, 5, 7, 1, 3}));
  EXPECT_EQ(s.decrease_count, 2u);
  EXPECT_DOUBLE_EQ(s.max_drawdown, 6.0);
}

TEST(Summarize, IgnoresFloatNoise) {
  const auto s = summarize(trajectory_of({1.0, 1.0 - 1e-14, 1.0}));
  EXPECT_EQ(s.decrease_count, 0u);
}

TEST(Summarize, NeedsTwoSamples) {
  try {
    summarize(trajectory_of({1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSamples);
  }
}

TEST(Summarize, CountsPartitionPairs) {
  random::Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    Trajectory t("w");
    const std::size_t n = 2 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) t.add(i, rng.uniform(0, 1));
    const auto s = summarize(t);
    std::size_t non_decreasing = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (t.samples()[i].polysemy >= t.samples()[i - 1].polysemy - 1e-12) {
        ++non_decreasing;
      }
    }
    EXPECT_EQ(s.decrease_count + non_decreasing, n - 1);
    EXPECT_GE(s.max_drawdown, 0.0);
    EXPECT_GE(s.monotonicity_ratio, 0.0);
    EXPECT_LE(s.monotonicity_ratio, 1.0);
  }
}

TEST(Trajectory, EnforcesIncreasingStepsAndNonNegativeValues) {
  Trajectory t("w");
  t.add(0, 0.5);
  EXPECT_THROW(t.add(0, 0.6), Error);
  EXPECT_THROW(t.add(1, -0.1), Error);
  EXPECT_NO_THROW(t.add(5, 0.0));
}
