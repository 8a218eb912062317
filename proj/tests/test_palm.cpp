#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hslopes/error.hpp"
#include "hslopes/formulas.hpp"
#include "hslopes/palm.hpp"

using namespace hslopes;

namespace {

const ModelSpec kUnit{1.0, 1.0};

}  // namespace

TEST(Palm, SequencesStartAtZeroAndAlternate) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto s = spawn_stream(1, i);
    const auto seq = sample_palm(s, kUnit, 1e-3, 6);
    ASSERT_EQ(seq.x0(), 0.0);
    ASSERT_EQ(seq.origin, 0u);
    ASSERT_EQ(seq.marks.size(), 6u);
    ASSERT_NO_THROW(seq.validate());
    for (const auto& m : seq.marks) {
      ASSERT_GE(m.height, kUnit.h);
      ASSERT_NEAR(m.height - m.excess, kUnit.h, 1e-12);
    }
  }
}

TEST(Palm, FirstDirectionIsAFairCoin) {
  std::size_t up = 0;
  const std::size_t n = 4000;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto s = spawn_stream(2, i);
    up += sample_palm(s, kUnit, 1e-2, 2).origin_kind() == Direction::Up;
  }
  EXPECT_LT(std::abs(static_cast<double>(up) / n - 0.5), 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST(Palm, SlopeMeansMatchClosedForms) {
  const double dt = 1e-3;
  const auto pool = build_pool(kUnit, dt, 20'000, 3);
  const auto m = slope_moments(kUnit);
  const auto bias = default_bias_coefficients(kUnit);
  for (auto d : {Direction::Up, Direction::Down}) {
    std::vector<double> len, exc;
    for (const auto& s : pool.slopes(d)) {
      len.push_back(s.length);
      exc.push_back(s.excess);
    }
    const std::string tag = d == Direction::Up ? "up" : "down";
    const auto rl = judge(estimate_mean(len), m.mean_len(d), 4.0, bias.allowance("mean_len_" + tag, dt));
    const auto re = judge(estimate_mean(exc), m.mean_excess(d), 4.0, bias.allowance("mean_excess_" + tag, dt));
    EXPECT_TRUE(rl.pass) << tag << " " << rl.estimate << " vs " << m.mean_len(d);
    EXPECT_TRUE(re.pass) << tag << " " << re.estimate << " vs " << m.mean_excess(d);
  }
}

TEST(Palm, SingleSlopeSampler) {
  auto s = spawn_stream(4, 0);
  const auto up = sample_slope(s, kUnit, 1e-3, Direction::Up);
  EXPECT_EQ(up.direction, Direction::Up);
  EXPECT_GT(up.length, 0.0);
  EXPECT_THROW(sample_slope(s, {0.0, 1.0}, 1e-3, Direction::Up), Unsupported);
  EXPECT_THROW(sample_palm(s, kUnit, 1e-3, 1), InvalidArgument);
  EXPECT_THROW(simulate_rise(s, 1.0, 1.0, 0.0), InvalidArgument);
}

TEST(Palm, RiseBlockOrdering) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto s = spawn_stream(5, i);
    const auto b = simulate_rise(s, -1.0, 1.0, 1e-3);
    ASSERT_LE(b.extreme, 0.0);
    ASSERT_LE(b.sigma, b.tau);
    ASSERT_GT(b.tau, 0.0);
  }
}

TEST(Pool, SharedRunsAndDeterminism) {
  const auto a = build_pool(kUnit, 1e-3, 500, 9, 1);
  const auto b = build_pool(kUnit, 1e-3, 500, 9, 3);
  for (auto d : {Direction::Up, Direction::Down})
    for (std::size_t i = 0; i < 500; ++i) ASSERT_EQ(a.slopes(d)[i].length, b.slopes(d)[i].length);
  EXPECT_THROW(build_pool(kUnit, 1e-3, 1, 9), InvalidArgument);
}

TEST(Pool, CoveringLawHelpers) {
  std::vector<SlopeRecord> up{{Direction::Up, 1.0, 1.0, 0.0}, {Direction::Up, 3.0, 1.0, 0.0}};
  std::vector<SlopeRecord> down{{Direction::Down, 4.0, 1.0, 0.0}, {Direction::Down, 4.0, 1.0, 0.0}};
  const SlopePool p(up, down);
  EXPECT_DOUBLE_EQ(p.mean_length(Direction::Up), 2.0);
  EXPECT_DOUBLE_EQ(p.mean_square_length(Direction::Up), 5.0);
  EXPECT_DOUBLE_EQ(p.cover_probability(Direction::Up), 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(p.cover_probability(Direction::Up) + p.cover_probability(Direction::Down), 1.0);
  // Weights 1 and 3: u below 1/4 picks the first slope.
  EXPECT_EQ(p.length_biased_index(Direction::Up, 0.2), 0u);
  EXPECT_EQ(p.length_biased_index(Direction::Up, 0.3), 1u);
  EXPECT_EQ(p.length_biased_index(Direction::Up, 1.0), 1u);
  // E min(l, x) / E l at x = 2: (1 + 2) / 4.
  EXPECT_DOUBLE_EQ(p.x1_cdf(Direction::Up, 2.0), 0.75);
  EXPECT_DOUBLE_EQ(p.x1_cdf(Direction::Up, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(p.x1_cdf(Direction::Up, 10.0), 1.0);
  EXPECT_THROW(SlopePool(up, {}), InvalidArgument);
}

TEST(Stationary, SequencesCoverTheOrigin) {
  const auto pool = build_pool(kUnit, 1e-3, 2000, 11);
  for (std::uint64_t i = 0; i < 500; ++i) {
    auto s = spawn_stream(12, i);
    const auto seq = sample_stationary(s, pool, 2);
    ASSERT_NO_THROW(seq.validate());
    ASSERT_EQ(seq.marks.size(), 5u);
    ASSERT_EQ(seq.origin, 2u);
    ASSERT_LE(seq.x0(), 0.0);
    ASSERT_GT(seq.x1(), 0.0);
  }
}

TEST(Stationary, LengthBiasingIdentity) {
  const auto pool = build_pool(kUnit, 1e-3, 20'000, 13);
  std::vector<MarkedSequence> seqs;
  for (std::uint64_t i = 0; i < 20'000; ++i) {
    auto s = spawn_stream(14, i);
    seqs.push_back(sample_stationary(s, pool, 1));
  }
  const auto st = covering_statistics(seqs);
  EXPECT_DOUBLE_EQ(st.freq_up + st.freq_down, 1.0);
  const double target = pool.mean_square_length(Direction::Up) / pool.mean_length(Direction::Up);
  const auto& up = st.len_gamma0_up;
  EXPECT_LT(std::abs(up.estimate - target), 4.0 * up.std_error);
  EXPECT_GT(up.estimate - pool.mean_length(Direction::Up), 4.0 * up.std_error);
  const double p = pool.cover_probability(Direction::Up);
  EXPECT_LT(std::abs(st.freq_up - p), 4.0 * std::sqrt(p * (1 - p) / st.n));
}

TEST(Stationary, EndPointLawGivenDirection) {
  const auto pool = build_pool(kUnit, 1e-3, 20'000, 15);
  std::vector<double> x1;
  for (std::uint64_t i = 0; x1.size() < 3000; ++i) {
    auto s = spawn_stream(16, i);
    const auto seq = sample_stationary(s, pool, 1);
    if (seq.origin_kind() == Direction::Up) x1.push_back(seq.x1());
  }
  EXPECT_GT(ks_one_sample(x1, [&](double x) { return pool.x1_cdf(Direction::Up, x); }), 0.01);
}

TEST(Direct, SequencesAreValid) {
  const auto seqs = sample_direct(kUnit, 1e-3, 100, 17);
  ASSERT_EQ(seqs.size(), 100u);
  for (const auto& s : seqs) {
    ASSERT_NO_THROW(s.validate());
    // Two extrema at or before 0 (indices 0..origin), two after.
    ASSERT_GE(s.origin, 1u);
    ASSERT_EQ(s.points.size(), s.marks.size() + 1);
    ASSERT_GE(s.points.size() - s.origin - 1, 2u);
  }
}

TEST(Direct, AgreesWithStationaryAtSmallScale) {
  const double dt = 1e-3;
  const auto direct = sample_direct(kUnit, dt, 1500, 18);
  const auto pool = build_pool(kUnit, dt, 10'000, 19);
  std::vector<MarkedSequence> stat;
  for (std::uint64_t i = 0; i < 1500; ++i) {
    auto s = spawn_stream(20, i);
    stat.push_back(sample_stationary(s, pool));
  }
  const auto c = compare_constructions(direct, stat, pool, kUnit);
  EXPECT_LT(std::abs(c.freq_z), 4.0);
  EXPECT_GT(c.x1_ks_p, 0.01);
  EXPECT_GT(c.length_bias_z_direct, 4.0);
  EXPECT_GT(c.length_bias_z_stationary, 4.0);
  EXPECT_NEAR(c.oracle_cover_up, 0.20551, 1e-5);
}

TEST(Covering, StatisticsAndErrors) {
  EXPECT_THROW(covering_statistics(std::span<const MarkedSequence>{}), InvalidArgument);
  MarkedSequence s;
  s.points = {-1.0, 0.5};
  s.marks = {{Direction::Up, 1.5, 1.0, 0.0}};
  const std::vector<MarkedSequence> v{s, s};
  const auto st = covering_statistics(v, 0.25);
  EXPECT_EQ(st.n_up, 2u);
  EXPECT_EQ(st.x1_histogram.counts.size(), 3u);
  EXPECT_EQ(st.x1_histogram.counts[2], 2u);
  EXPECT_DOUBLE_EQ(st.len_gamma0_up.estimate, 1.5);
  EXPECT_EQ(st.len_gamma0_down.n, 0u);
}

TEST(MarkedSequenceCheck, RejectsInconsistentSequences) {
  MarkedSequence s;
  s.points = {-1.0, 0.5, 2.0};
  s.marks = {{Direction::Up, 1.5, 1.0, 0.0}, {Direction::Down, 1.5, 1.0, 0.0}};
  EXPECT_NO_THROW(s.validate());
  auto bad = s;
  bad.marks[1].direction = Direction::Up;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = s;
  bad.points[2] = 3.0;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = s;
  bad.origin = 1;
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = s;
  bad.points.pop_back();
  EXPECT_THROW(bad.validate(), InvalidArgument);
}
