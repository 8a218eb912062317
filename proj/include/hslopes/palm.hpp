#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hslopes/extrema.hpp"
#include "hslopes/montecarlo.hpp"
#include "hslopes/paths.hpp"
#include "hslopes/rng.hpp"
#include "hslopes/stats.hpp"

namespace hslopes {

/// Points x_i with x_{i+1} - x_i the length of mark i. Mark `origin` is the
/// slope that covers 0: points[origin] <= 0 < points[origin + 1], except in
/// the Palm version where points[origin] = 0 exactly.
struct MarkedSequence {
  std::vector<double> points;
  std::vector<SlopeRecord> marks;
  std::size_t origin = 0;

  Direction origin_kind() const { return marks.at(origin).direction; }
  double x0() const { return points.at(origin); }
  double x1() const { return points.at(origin + 1); }
  /// Throws InvalidArgument if lengths, alternation or the origin are off.
  void validate() const;
};

/// The pieces of one grid run of a drifted motion up to its first rise of h
/// above the running minimum. `extreme` is that minimum.
struct RiseBlock {
  double sigma = 0.0;
  double tau = 0.0;
  double extreme = 0.0;
};

/// Run a motion with the given drift from 0 on the dt grid until it first
/// sits h above its running minimum. sigma is the last time of the minimum.
RiseBlock simulate_rise(RngStream& stream, double drift, double h, double dt);

/// One slope built from two independent runs: the climb from the minimum of
/// the first run, then the second run up to its own h-extremum.
SlopeRecord sample_slope(RngStream& stream, const ModelSpec& spec, double dt, Direction d);

/// Slopes glued one after another from x_0 = 0, with a fair coin for the
/// first direction.
MarkedSequence sample_palm(RngStream& stream, const ModelSpec& spec, double dt,
                           std::size_t n_slopes);

/// i.i.d. slopes of each direction, with the sorted lengths kept for
/// length-biased draws and for the covering distribution.
class SlopePool {
 public:
  SlopePool(std::vector<SlopeRecord> up, std::vector<SlopeRecord> down);

  const std::vector<SlopeRecord>& slopes(Direction d) const { return d == Direction::Up ? up_ : down_; }
  double mean_length(Direction d) const;
  double mean_square_length(Direction d) const;
  /// Probability that the covering slope has direction d, from pool means.
  double cover_probability(Direction d) const;
  /// Index drawn with weight proportional to slope length.
  std::size_t length_biased_index(Direction d, double u) const;
  /// E min(l, x) / E l over the pool: the law of x_1 given the direction.
  double x1_cdf(Direction d, double x) const;

 private:
  struct Side {
    std::vector<double> cum_length;     // prefix sums in pool order
    std::vector<double> sorted_length;  // ascending
    std::vector<double> sorted_prefix;  // prefix sums of sorted_length
    double sum = 0.0;
    double sum_sq = 0.0;
  };
  static Side index(const std::vector<SlopeRecord>& v);
  const Side& side(Direction d) const { return d == Direction::Up ? up_side_ : down_side_; }

  std::vector<SlopeRecord> up_;
  std::vector<SlopeRecord> down_;
  Side up_side_;
  Side down_side_;
};

/// Pool of `size` slopes per direction. Entry i of both directions comes
/// from the same pair of runs under spawn_stream(seed, i).
SlopePool build_pool(const ModelSpec& spec, double dt, std::size_t size, std::uint64_t seed,
                     unsigned threads = 0);

/// Stationary sequence: direction of the covering slope from the pool
/// means, the slope itself length-biased, the origin uniform inside it and
/// `per_side` further slopes on each side drawn uniformly from the pool.
MarkedSequence sample_stationary(RngStream& stream, const SlopePool& pool, std::size_t per_side = 2);

/// Extrema of a two-sided path as a marked sequence around the origin.
MarkedSequence from_slope_sequence(const SlopeSequence& seq);

/// Covering slopes of independent two-sided paths, each long enough to pin
/// two h-extrema on either side of 0.
std::vector<MarkedSequence> sample_direct(const ModelSpec& spec, double dt, std::size_t replicas,
                                          std::uint64_t seed, unsigned threads = 0);

struct Histogram {
  double width = 0.0;
  std::vector<std::size_t> counts;  // bin k is [k width, (k+1) width)
};

struct CoveringStats {
  std::size_t n = 0;
  std::size_t n_up = 0;
  double freq_up = 0.0;
  double freq_down = 0.0;
  std::vector<double> x1;
  Histogram x1_histogram;
  EstimatorReport len_gamma0_up;
  EstimatorReport len_gamma0_down;
  EstimatorReport x1_up;
  EstimatorReport x1_down;
};

CoveringStats covering_statistics(std::span<const MarkedSequence> sequences,
                                  double histogram_width = 0.25);

struct PalmComparison {
  CoveringStats direct;
  CoveringStats stationary;
  double oracle_cover_up = 0.0;
  double freq_z = 0.0;   // two-proportion z, direct vs stationary
  double x1_ks_p = 1.0;  // two-sample KS on x_1
  /// (E l(gamma_0 | Up) - E l_+) over its stderr: direct covering slopes
  /// against the exact mean, stationary ones against the pool mean.
  double length_bias_z_direct = 0.0;
  double length_bias_z_stationary = 0.0;
};

PalmComparison compare_constructions(const std::vector<MarkedSequence>& direct,
                                     const std::vector<MarkedSequence>& stationary,
                                     const SlopePool& pool, const ModelSpec& spec);

}  // namespace hslopes
