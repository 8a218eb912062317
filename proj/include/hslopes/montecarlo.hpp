#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hslopes/extrema.hpp"
#include "hslopes/formulas.hpp"
#include "hslopes/paths.hpp"
#include "hslopes/stats.hpp"

namespace hslopes {

/// Marks of one slope, without the path window.
struct SlopeRecord {
  Direction direction = Direction::Up;
  double length = 0.0;
  double height = 0.0;
  double excess = 0.0;
};

SlopeRecord record_of(const Slope& s);

/// The slope covering the origin in one replica.
struct CoveringRecord {
  SlopeRecord slope;
  double x0 = 0.0;  // start time, <= 0
  double x1 = 0.0;  // end time, > 0
};

struct HarvestConfig {
  ModelSpec spec;
  double dt = 1e-4;
  /// Simulated horizon per side in units of the mean cycle length.
  double horizon_cycles = 100.0;
  std::size_t replicas = 20;
  std::uint64_t seed = 7;
  /// 0 means one worker per hardware thread.
  unsigned threads = 0;

  void validate() const;
  /// Non-covering slopes kept on each side of the covering one.
  std::size_t slopes_per_side() const;
};

struct Harvest {
  HarvestConfig config;
  /// Non-covering slopes, replica by replica, left side then right side.
  std::vector<SlopeRecord> up;
  std::vector<SlopeRecord> down;
  std::vector<CoveringRecord> covering;
  /// Each up slope paired with the down slope that follows it.
  std::vector<double> cycles;
};

/// Run `replicas` independent two-sided paths and collect slope statistics.
///
/// From each path exactly slopes_per_side() slopes are taken on each side of
/// the covering slope, walking outward; a half that is too short is extended
/// until enough slopes are complete. A fixed count avoids the bias of keeping
/// whatever fits in a fixed window.
Harvest harvest_slopes(const HarvestConfig& config);

/// Per-check grid-bias coefficients c, used as the allowance |c| sqrt(dt).
struct BiasCoefficients {
  std::map<std::string, double> c;
  std::string source;

  double allowance(const std::string& check, double dt) const;
};

/// Coefficients measured by tools/calibrate_bias for |mu| = 1, h = 1, or a
/// first-order threshold-shift estimate for any other model.
BiasCoefficients default_bias_coefficients(const ModelSpec& spec);

/// Oracle values of every battery quantity.
std::map<std::string, double> battery_oracles(const ModelSpec& spec, double alpha);

/// Estimates of every battery quantity from one harvest.
std::map<std::string, EstimatorReport> battery_estimates(const Harvest& harvest, double alpha);

struct DtStudyPoint {
  double dt = 0.0;
  std::map<std::string, EstimatorReport> estimates;
};

struct BiasFit {
  std::map<std::string, double> c;
  std::map<std::string, double> c_std_error;
  std::vector<DtStudyPoint> points;
};

/// Weighted least-squares fit of estimate(dt) - oracle = c sqrt(dt).
BiasFit calibrate_bias(const HarvestConfig& base, const std::vector<double>& dts, double alpha);

struct KsCheck {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  double reference_mean = 0.0;
  bool pass = true;
};

struct BatteryConfig {
  HarvestConfig harvest;
  double alpha = 0.5;
  double z_max = 4.0;
  double ks_level = 0.01;
  std::optional<BiasCoefficients> bias;
};

struct VerificationReport {
  BatteryConfig config;
  std::vector<EstimatorReport> checks;
  std::vector<KsCheck> ks;
  std::size_t n_up = 0;
  std::size_t n_down = 0;
  std::size_t n_covering = 0;
  bool pass = true;
};

/// Means of excess and length by direction, cycle mean, covering probability,
/// cycle and up-slope Laplace transforms, and KS exponentiality of the
/// excesses, each judged at z_max standard errors plus the grid allowance.
VerificationReport verify_battery(const BatteryConfig& config);
VerificationReport verify_harvest(const Harvest& harvest, const BatteryConfig& config);

}  // namespace hslopes
