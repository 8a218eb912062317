#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hslopes/rng.hpp"

namespace hslopes {

/// Drift magnitude and slope threshold. The process is B_t = B*_t - mu t.
struct ModelSpec {
  double mu = 1.0;
  double h = 1.0;

  /// h > 0 and mu finite. Path generation accepts mu == 0.
  void validate() const;
  /// validate() plus mu != 0, required by every closed-form law.
  void require_nonzero_drift() const;

  ModelSpec reflected() const { return {-mu, h}; }
};

/// Levels of a trajectory on the uniform grid t0, t0 + dt, ...
struct SampledPath {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * dt; }
  double end_time() const noexcept { return time(values.empty() ? 0 : values.size() - 1); }
  std::span<const double> window(std::size_t first, std::size_t last) const {
    return std::span<const double>(values).subspan(first, last - first + 1);
  }
};

/// Two independent halves glued at time 0 with B_0 = 0.
///
/// `positive_half.values[k]` is B at time k*dt; `negative_half.values[k]` is B
/// at time -k*dt. Both halves start at level 0 with t0 = 0.
struct TwoSidedPath {
  SampledPath negative_half;
  SampledPath positive_half;

  double dt() const noexcept { return positive_half.dt; }

  /// Single left-to-right path on [-T_neg, T_pos]; index of time 0 is
  /// negative_half.size() - 1.
  SampledPath concatenated() const;
  std::size_t origin_index() const noexcept { return negative_half.size() - 1; }
};

/// Append `n_steps` exact Gaussian increments N(drift*dt, dt) to `path`.
void extend_path(SampledPath& path, RngStream& stream, double drift, std::size_t n_steps);

/// Drifted Brownian motion started at `start_level`, `n_steps` increments.
SampledPath generate_one_sided(RngStream& stream, const ModelSpec& spec, double dt,
                               std::size_t n_steps, double start_level = 0.0);

/// Two-sided drifted Brownian motion on [-T, T].
///
/// The halves are driven by children 0 (positive) and 1 (negative) of
/// `stream`, so either half can later be extended on its own without changing
/// the other. Read in reversed time, the negative half has drift +mu.
TwoSidedPath generate_two_sided(const RngStream& stream, const ModelSpec& spec, double dt,
                                double horizon);

/// Stateful form of generate_two_sided that can keep extending either half.
/// generate(T) followed by extend_positive(n) yields the same positive half as
/// generating the longer horizon directly.
class TwoSidedGenerator {
 public:
  TwoSidedGenerator(const RngStream& stream, const ModelSpec& spec, double dt);

  TwoSidedPath generate(double horizon);
  void extend_positive(TwoSidedPath& path, std::size_t n_steps);
  void extend_negative(TwoSidedPath& path, std::size_t n_steps);

 private:
  ModelSpec spec_;
  double dt_;
  RngStream positive_;
  RngStream negative_;
};

/// One level of Brownian-bridge midpoint refinement: inserts a conditioned
/// midpoint between every pair of grid points, halving dt. Off the default
/// pipeline; used for threshold-crossing studies.
SampledPath refine_midpoints(const SampledPath& path, RngStream& stream);

}  // namespace hslopes
