#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hslopes/extrema.hpp"
#include "hslopes/paths.hpp"
#include "hslopes/rng.hpp"
#include "hslopes/stats.hpp"

namespace hslopes {

/// Functionals of one positive path that the comparisons work with. The
/// probe time t is fixed per run; a path killed before t contributes its
/// killed value.
struct PathSummary {
  double duration = 0.0;    // hitting time of h, or the stop time
  double value_at_t = 0.0;  // X at min(t, duration)
  double max_level = 0.0;   // max of X on [0, min(t, duration)]
  bool censored = false;
};

struct ConditionedPath {
  double dt = 0.0;
  double eps0 = 0.0;
  /// Levels at multiples of dt, values[0] = eps0. Empty unless recorded.
  std::vector<double> values;
  double hit_time = 0.0;
  bool censored = false;
  PathSummary summary;
};

struct SdeOptions {
  double dt = 1e-4;
  double eps0 = 1e-3;
  /// Kill at the first step with X >= h. Off means run until stop_time.
  bool absorb = true;
  /// Without absorption, the time to stop; with it, the censoring time.
  double stop_time = 100.0;
  double probe_time = 0.1;
  bool record_path = false;
};

/// Euler scheme for dX = dB + mu coth(mu X) dt started at eps0.
///
/// Steps shrink to (X/4)^2 near the origin. A step that lands at or below 0
/// is redrawn once, then the step is halved until it stays positive.
ConditionedPath integrate_coth_sde(RngStream& stream, const ModelSpec& spec,
                                   const SdeOptions& options);

/// mu coth(mu x) with its small-argument and mu = 0 limits.
double coth_drift(double mu, double x);

struct RejectionResult {
  ConditionedPath path;
  std::size_t attempts = 0;
};

/// Drifted motion from eps, restarted until it reaches h before 0 on the
/// grid. `attempts` counts every trajectory tried, the accepted one included.
RejectionResult doob_rejection(RngStream& stream, const ModelSpec& spec, double dt, double eps,
                               double probe_time = 0.1, bool record_path = false,
                               std::size_t max_attempts = 100'000'000);

/// Grid budget for the rejection acceptance rate W(eps)/W(h): twice the
/// first-order change when 0 and h are each crossed about one overshoot
/// late, 0.5826 sqrt(dt).
double rejection_rate_allowance(const ModelSpec& spec, double dt, double eps);

enum class SectionKind {
  mela1,  // forward from an h-minimum
  mela2,  // backward from an h-maximum
  pera1,  // forward from an h-maximum, reflected
  pera2,  // backward from an h-minimum, reflected
};

const char* to_string(SectionKind kind) noexcept;

/// Windows of a real path next to its h-extrema, recentred and oriented so
/// that each starts at 0 and is cut when it first reaches h.
struct SectionSample {
  SectionKind kind = SectionKind::mela1;
  double dt = 0.0;
  std::vector<PathSummary> sections;
  /// Only filled when requested.
  std::vector<std::vector<double>> windows;

  std::vector<double> durations() const;
};

struct SectionOptions {
  /// Both extrema of a used slope lie at least this many mean cycles from 0.
  double margin_cycles = 5.0;
  double probe_time = 0.1;
  bool keep_windows = false;
};

/// Cut near-extremum sections from every eligible slope of `seq`.
SectionSample near_extremum_sections(const SlopeSequence& seq, const ModelSpec& spec,
                                     SectionKind kind, const SectionOptions& options = {});

struct FunctionalComparison {
  std::string functional;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double ks_statistic = 0.0;
  double p_value = 1.0;
};

struct LawComparison {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::vector<FunctionalComparison> functionals;
};

/// Two-sample KS and means for duration, value at the probe time and running
/// maximum. Censored paths are dropped from both samples.
LawComparison compare_laws(const std::vector<PathSummary>& a, const std::vector<PathSummary>& b);

struct EpsStudyRow {
  double eps0 = 0.0;
  EstimatorReport duration;
};

/// Mean SDE hitting time of h for each starting level, to expose the bias of
/// starting above 0.
std::vector<EpsStudyRow> sde_eps_study(const ModelSpec& spec, double dt,
                                       const std::vector<double>& eps_values, std::size_t n_paths,
                                       std::uint64_t seed);

/// P(X_t <= y) for the coth-drift diffusion started at x, by quadrature.
double qt_cdf(double t, double x, double y, const ModelSpec& spec);

/// Pearson test of a sample of X_t against the transition density, with
/// `bins` cells of equal probability under the density.
ChiSquareResult qt_chi_square(std::span<const double> sample, double t, double x,
                              const ModelSpec& spec, std::size_t bins = 30);

}  // namespace hslopes
