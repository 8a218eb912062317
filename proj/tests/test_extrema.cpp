#include <gtest/gtest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "hslopes/error.hpp"
#include "hslopes/extrema.hpp"
#include "hslopes/formulas.hpp"
#include "hslopes/paths.hpp"

using namespace hslopes;

namespace {

// 0 -> 2 -> 0.5 -> 3 in steps of 0.1, built from integer tenths so the
// threshold comparisons are exact.
std::vector<double> four_knot_path() {
  std::vector<double> v;
  for (int n = 0; n <= 20; ++n) v.push_back(n / 10.0);
  for (int n = 19; n >= 5; --n) v.push_back(n / 10.0);
  for (int n = 6; n <= 30; ++n) v.push_back(n / 10.0);
  return v;
}

std::vector<HExtremum> stream_all(const std::vector<double>& v, double dt, double h,
                                  SweepMode mode) {
  StreamingDetector det(h, mode);
  std::vector<HExtremum> out;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (auto e = det.push(static_cast<double>(k) * dt, v[k])) out.push_back(*e);
  return out;
}

SlopeSequence centred(std::uint64_t seed, const ModelSpec& spec, double dt, double horizon) {
  TwoSidedGenerator gen(spawn_stream(seed, 0), spec, dt);
  auto path = gen.generate(horizon);
  for (;;) {
    try {
      return center(path, spec.h, 2);
    } catch (const HorizonTooShort&) {
      gen.extend_negative(path, path.positive_half.size());
      gen.extend_positive(path, path.positive_half.size());
    }
  }
}

}  // namespace

TEST(Sweep, FourKnotHandTrace) {
  const auto v = four_knot_path();
  for (auto mode : {SweepMode::SeekMax, SweepMode::Auto}) {
    const auto r = sweep(v, 1.0, mode);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[0], (SweepRecord{10, 0.0, 0, ExtremumKind::Min}));
    EXPECT_EQ(r[1], (SweepRecord{30, 2.0, 20, ExtremumKind::Max}));
    EXPECT_EQ(r[2], (SweepRecord{45, 0.5, 35, ExtremumKind::Min}));
  }
}

TEST(Sweep, SigmaIsLastIndexOfTheExtremum) {
  const std::vector<double> v{0.0, -1.0, -0.5, -1.0, 0.5, 0.0};
  const auto r = sweep(v, 1.0, SweepMode::SeekMax);
  ASSERT_FALSE(r.empty());
  EXPECT_EQ(r[0].sigma, 3u);
  EXPECT_EQ(r[0].tau, 4u);
}

TEST(Sweep, ShallowMonotoneDropIsEmpty) {
  std::vector<double> v;
  for (int k = 0; k <= 900; ++k) v.push_back(-k * 1e-3);
  EXPECT_TRUE(sweep(v, 1.0, SweepMode::SeekMax).empty());
  EXPECT_TRUE(sweep(v, 1.0, SweepMode::Auto).empty());
}

TEST(Sweep, NegationSwapsModeAndKinds) {
  const ModelSpec spec{1.0, 1.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = spawn_stream(seed, 0);
    const auto p = generate_one_sided(s, spec, 1e-3, 20'000);
    auto neg = p.values;
    for (double& x : neg) x = -x;
    const auto a = sweep(p.values, 1.0, SweepMode::SeekMax);
    const auto b = sweep(neg, 1.0, SweepMode::SeekMin);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].tau, b[i].tau);
      EXPECT_EQ(a[i].sigma, b[i].sigma);
      EXPECT_EQ(a[i].beta, -b[i].beta);
      EXPECT_NE(a[i].kind, b[i].kind);
    }
  }
}

TEST(Sweep, RejectsNonPositiveThreshold) {
  const std::vector<double> v{0.0, 1.0};
  EXPECT_THROW(sweep(v, 0.0, SweepMode::Auto), InvalidArgument);
  EXPECT_THROW(StreamingDetector(-1.0), InvalidArgument);
}

TEST(Stream, ConstantSeriesIsEmpty) {
  std::vector<std::pair<double, double>> s;
  for (int k = 0; k < 1000; ++k) s.emplace_back(k, 3.0);
  EXPECT_TRUE(detect_stream(s, 1.0).empty());
}

TEST(Stream, ZigZagAlternatesAtTheKnots) {
  const std::vector<std::pair<double, double>> s{{0, 0}, {1, 2}, {2, 0}, {3, 2}, {4, 0}};
  const auto e = detect_stream(s, 1.0);
  ASSERT_EQ(e.size(), 4u);
  for (std::size_t i = 0; i < e.size(); ++i) {
    EXPECT_EQ(e[i].time, static_cast<double>(i));
    EXPECT_EQ(e[i].grid_index, i);
    EXPECT_EQ(e[i].kind, i % 2 == 0 ? ExtremumKind::Min : ExtremumKind::Max);
  }
}

TEST(Stream, RejectsNonIncreasingTime) {
  const std::vector<std::pair<double, double>> s{{0, 0}, {1, 2}, {1, 0}};
  EXPECT_THROW(detect_stream(s, 1.0), InvalidArgument);
}

TEST(Stream, MatchesBatchSweepOnRandomPaths) {
  const double dt = 1e-3;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const ModelSpec spec{seed % 3 == 0 ? 0.0 : (seed % 2 ? 1.0 : -2.0), 1.0};
    auto s = spawn_stream(100, seed);
    const auto p = generate_one_sided(s, spec, dt, 5000);
    for (auto mode : {SweepMode::Auto, SweepMode::SeekMax, SweepMode::SeekMin}) {
      const auto batch = sweep(p.values, spec.h, mode);
      const auto streamed = stream_all(p.values, dt, spec.h, mode);
      ASSERT_EQ(batch.size(), streamed.size()) << "seed " << seed;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        ASSERT_EQ(batch[i].sigma, streamed[i].grid_index);
        ASSERT_EQ(batch[i].beta, streamed[i].level);
        ASSERT_EQ(batch[i].kind, streamed[i].kind);
        ASSERT_EQ(static_cast<double>(batch[i].sigma) * dt, streamed[i].time);
      }
    }
  }
}

TEST(Center, StructuralPropertiesOnRandomPaths) {
  const ModelSpec spec{1.0, 1.0};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto seq = centred(seed, spec, 1e-3, 6.0);
    ASSERT_GE(seq.extrema.size(), 4u);
    ASSERT_GE(seq.origin, 1u);
    ASSERT_LE(seq.extrema[seq.origin].time, 0.0);
    ASSERT_GT(seq.extrema[seq.origin + 1].time, 0.0);
    int covering = 0;
    const auto sl = seq.slopes();
    ASSERT_EQ(sl.size(), seq.extrema.size() - 1);
    for (std::size_t i = 0; i < sl.size(); ++i) {
      if (i > 0) ASSERT_NE(sl[i].direction, sl[i - 1].direction);
      ASSERT_GE(sl[i].height, spec.h);
      ASSERT_GE(sl[i].excess, 0.0);
      ASSERT_GT(sl[i].length, 0.0);
      ASSERT_EQ(sl[i].direction == Direction::Up, sl[i].start.kind == ExtremumKind::Min);
      covering += sl[i].start.time <= 0.0 && sl[i].end.time > 0.0;
    }
    ASSERT_EQ(covering, 1);
    for (std::size_t i = 1; i + 1 < seq.extrema.size(); ++i) {
      const auto& e = seq.extrema[i];
      ASSERT_TRUE(is_h_extremum(seq.path.values, e.grid_index, e.kind, spec.h))
          << "seed " << seed << " extremum " << i;
    }
  }
}

TEST(Center, InteriorExtremaAreArgExtremaOfAdjacentSlopes) {
  const ModelSpec spec{1.0, 1.0};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto seq = centred(1000 + seed, spec, 1e-3, 10.0);
    for (std::size_t i = 1; i + 1 < seq.extrema.size(); ++i) {
      const auto& e = seq.extrema[i];
      const auto lo = seq.extrema[i - 1].grid_index, hi = seq.extrema[i + 1].grid_index;
      for (std::size_t k = lo; k <= hi; ++k) {
        if (e.kind == ExtremumKind::Min) ASSERT_GE(seq.path.values[k], e.level);
        else ASSERT_LE(seq.path.values[k], e.level);
      }
    }
  }
}

TEST(Center, ExtremumCountOverLongHorizon) {
  const ModelSpec spec{1.0, 1.0};
  const double T = 200.0;
  const auto path = generate_two_sided(spawn_stream(42, 0), spec, 1e-4, T);
  const auto seq = center(path, spec.h);
  // Two extrema per cycle over a window of length 2T.
  const double expected = 2.0 * (2.0 * T) / slope_moments(spec).mean_cycle;
  EXPECT_NEAR(expected, 289.6, 0.1);
  EXPECT_LT(std::abs(static_cast<double>(seq.extrema.size()) - expected), 4.0 * std::sqrt(expected));
}

TEST(Center, NegatedPathSwapsKinds) {
  const ModelSpec spec{1.0, 1.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto path = generate_two_sided(spawn_stream(7, seed), spec, 1e-3, 20.0);
    const auto a = center(path, spec.h);
    for (double& x : path.positive_half.values) x = -x;
    for (double& x : path.negative_half.values) x = -x;
    const auto b = center(path, spec.h);
    ASSERT_EQ(a.extrema.size(), b.extrema.size());
    EXPECT_EQ(a.origin, b.origin);
    for (std::size_t i = 0; i < a.extrema.size(); ++i) {
      EXPECT_EQ(a.extrema[i].grid_index, b.extrema[i].grid_index);
      EXPECT_NE(a.extrema[i].kind, b.extrema[i].kind);
      EXPECT_EQ(a.extrema[i].level, -b.extrema[i].level);
    }
  }
}

TEST(Center, ShortHorizonThrows) {
  const auto path = generate_two_sided(spawn_stream(1, 0), {1.0, 1.0}, 1e-3, 0.01);
  EXPECT_THROW(center(path, 1.0), HorizonTooShort);
}

TEST(Slope, MakeSlopeMarks) {
  const HExtremum a{0, -1.0, 0.0, ExtremumKind::Min};
  const HExtremum b{10, 0.5, 1.75, ExtremumKind::Max};
  const auto s = make_slope(a, b, 1.0);
  EXPECT_EQ(s.direction, Direction::Up);
  EXPECT_DOUBLE_EQ(s.length, 1.5);
  EXPECT_DOUBLE_EQ(s.height, 1.75);
  EXPECT_DOUBLE_EQ(s.excess, 0.75);
  const HExtremum c{20, 1.0, 0.5, ExtremumKind::Min};
  const auto d = make_slope(b, c, 1.0);
  EXPECT_EQ(d.direction, Direction::Down);
  EXPECT_DOUBLE_EQ(d.height, 1.25);
}
