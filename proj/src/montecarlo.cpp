#include "hslopes/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "hslopes/error.hpp"
#include "parallel.hpp"

namespace hslopes {

namespace {

// Expected overshoot of a Gaussian random walk over a level, in units of
// sqrt(dt): -zeta(1/2) / sqrt(2 pi).
constexpr double kOvershoot = 0.5825971579390106;

constexpr double kMinHorizonCycles = 50.0;

struct ReplicaResult {
  std::vector<SlopeRecord> left;
  std::vector<SlopeRecord> right;
  CoveringRecord covering;
};

ReplicaResult run_replica(const HarvestConfig& cfg, std::size_t replica, double horizon) {
  const std::size_t k = cfg.slopes_per_side();
  TwoSidedGenerator gen(spawn_stream(cfg.seed, replica), cfg.spec, cfg.dt);
  TwoSidedPath path = gen.generate(horizon);
  const std::size_t grow = std::max<std::size_t>(path.positive_half.size() / 4, 16);

  for (int attempt = 0; attempt < 64; ++attempt) {
    std::optional<SlopeSequence> seq;
    try {
      seq = center(path, cfg.spec.h, 1);
    } catch (const HorizonTooShort&) {
      gen.extend_negative(path, grow);
      gen.extend_positive(path, grow);
      continue;
    }
    const std::size_t o = seq->origin;
    const std::size_t left_avail = o;
    const std::size_t right_avail = seq->extrema.size() - o - 2;
    if (left_avail < k || right_avail < k) {
      if (left_avail < k) gen.extend_negative(path, grow);
      if (right_avail < k) gen.extend_positive(path, grow);
      continue;
    }
    ReplicaResult out;
    const double h = cfg.spec.h;
    for (std::size_t j = 1; j <= k; ++j)
      out.left.push_back(record_of(make_slope(seq->extrema[o - j], seq->extrema[o - j + 1], h)));
    for (std::size_t j = 1; j <= k; ++j)
      out.right.push_back(record_of(make_slope(seq->extrema[o + j], seq->extrema[o + j + 1], h)));
    const Slope cover = seq->covering_slope();
    out.covering = {record_of(cover), cover.start.time, cover.end.time};
    return out;
  }
  throw HorizonTooShort("replica " + std::to_string(replica) + " never produced enough slopes");
}

void pair_cycles(const std::vector<SlopeRecord>& side, std::vector<double>& cycles) {
  std::vector<double> ups;
  std::vector<double> downs;
  for (const auto& s : side) (s.direction == Direction::Up ? ups : downs).push_back(s.length);
  for (std::size_t i = 0; i < std::min(ups.size(), downs.size()); ++i)
    cycles.push_back(ups[i] + downs[i]);
}

std::vector<double> lengths(const std::vector<SlopeRecord>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.length);
  return out;
}

std::vector<double> excesses(const std::vector<SlopeRecord>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(s.excess);
  return out;
}

}  // namespace

SlopeRecord record_of(const Slope& s) { return {s.direction, s.length, s.height, s.excess}; }

void HarvestConfig::validate() const {
  spec.require_nonzero_drift();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
  if (!std::isfinite(horizon_cycles) || horizon_cycles < kMinHorizonCycles)
    throw HorizonTooShort("horizon must cover at least 50 mean cycles per side");
  if (replicas == 0) throw InvalidArgument("replicas must be at least 1");
}

std::size_t HarvestConfig::slopes_per_side() const {
  return 2 * static_cast<std::size_t>(std::floor(0.75 * horizon_cycles));
}

Harvest harvest_slopes(const HarvestConfig& config) {
  config.validate();
  const double horizon = config.horizon_cycles * slope_moments(config.spec).mean_cycle;
  std::vector<ReplicaResult> results(config.replicas);
  detail::parallel_for(config.replicas, config.threads,
               [&](std::size_t r) { results[r] = run_replica(config, r, horizon); });

  Harvest h;
  h.config = config;
  for (const auto& r : results) {
    for (const auto* side : {&r.left, &r.right}) {
      for (const auto& s : *side) (s.direction == Direction::Up ? h.up : h.down).push_back(s);
      pair_cycles(*side, h.cycles);
    }
    h.covering.push_back(r.covering);
  }
  return h;
}

double BiasCoefficients::allowance(const std::string& check, double dt) const {
  const auto it = c.find(check);
  return it == c.end() ? 0.0 : std::abs(it->second) * std::sqrt(dt);
}

std::map<std::string, double> battery_oracles(const ModelSpec& spec, double alpha) {
  const auto m = slope_moments(spec);
  return {
      {"mean_excess_up", m.mean_excess_up},
      {"mean_excess_down", m.mean_excess_down},
      {"mean_len_up", m.mean_len_up},
      {"mean_len_down", m.mean_len_down},
      {"mean_cycle", m.mean_cycle},
      {"prob_cover_up", m.prob_cover_up},
      {"laplace_cycle", laplace_cycle(alpha, spec)},
      {"laplace_len_up", laplace_slope(alpha, 0.0, Direction::Up, spec)},
  };
}

std::map<std::string, EstimatorReport> battery_estimates(const Harvest& harvest, double alpha) {
  std::map<std::string, EstimatorReport> out;
  auto put = [&](const std::string& name, EstimatorReport r) {
    r.name = name;
    out[name] = r;
  };
  put("mean_excess_up", estimate_mean(excesses(harvest.up)));
  put("mean_excess_down", estimate_mean(excesses(harvest.down)));
  put("mean_len_up", estimate_mean(lengths(harvest.up)));
  put("mean_len_down", estimate_mean(lengths(harvest.down)));
  put("mean_cycle", estimate_mean(harvest.cycles));
  std::vector<double> cover_up;
  cover_up.reserve(harvest.covering.size());
  for (const auto& c : harvest.covering)
    cover_up.push_back(c.slope.direction == Direction::Up ? 1.0 : 0.0);
  if (cover_up.size() >= 2) put("prob_cover_up", estimate_mean(cover_up));
  put("laplace_cycle", estimate_laplace(harvest.cycles, alpha));
  put("laplace_len_up", estimate_laplace(lengths(harvest.up), alpha));
  return out;
}

BiasCoefficients default_bias_coefficients(const ModelSpec& spec) {
  BiasCoefficients b;
  // A grid path detects a rise of h only once the sampled rise exceeds it,
  // which acts like a threshold larger by about two overshoots. Use twice
  // that first-order shift as the budget.
  const double dh = 1e-4 * spec.h;
  ModelSpec lo = spec;
  ModelSpec hi = spec;
  lo.h -= dh;
  hi.h += dh;
  const auto a = battery_oracles(lo, 0.5);
  const auto z = battery_oracles(hi, 0.5);
  for (const auto& [name, v] : a)
    b.c[name] = 2.0 * 2.0 * kOvershoot * (z.at(name) - v) / (2.0 * dh);
  b.source = "threshold-shift estimate";
  if (spec.h != 1.0 || std::abs(spec.mu) != 1.0) return b;

  // Fitted by tools/calibrate_bias (seeds 1000-1002, dt in {1e-3, 4e-4,
  // 1e-4}); see calibration/bias_mu1_h1.json.
  static const std::map<std::string, double> kMeasured = {
      {"mean_excess_up", 0.171},  {"mean_excess_down", 8.850}, {"mean_len_up", 1.029},
      {"mean_len_down", 7.804},   {"mean_cycle", 8.833},       {"prob_cover_up", -0.119},
      {"laplace_cycle", -0.833},  {"laplace_len_up", -0.352},
  };
  if (spec.mu > 0.0) {
    b.c = kMeasured;
  } else {
    // Reflection swaps the roles of up and down slopes. The up-slope
    // transform maps to a down-slope one, which was not fitted.
    b.c["mean_excess_up"] = kMeasured.at("mean_excess_down");
    b.c["mean_excess_down"] = kMeasured.at("mean_excess_up");
    b.c["mean_len_up"] = kMeasured.at("mean_len_down");
    b.c["mean_len_down"] = kMeasured.at("mean_len_up");
    b.c["mean_cycle"] = kMeasured.at("mean_cycle");
    b.c["prob_cover_up"] = -kMeasured.at("prob_cover_up");
    b.c["laplace_cycle"] = kMeasured.at("laplace_cycle");
  }
  b.source = "calibrated";
  return b;
}

BiasFit calibrate_bias(const HarvestConfig& base, const std::vector<double>& dts, double alpha) {
  if (dts.empty()) throw InvalidArgument("no dt values to calibrate on");
  const auto oracles = battery_oracles(base.spec, alpha);
  BiasFit fit;
  std::map<std::string, double> sxy, sxx;
  for (double dt : dts) {
    HarvestConfig cfg = base;
    cfg.dt = dt;
    DtStudyPoint p{dt, battery_estimates(harvest_slopes(cfg), alpha)};
    for (const auto& [name, e] : p.estimates) {
      if (!(e.std_error > 0.0)) continue;
      const double w = 1.0 / (e.std_error * e.std_error);
      const double x = std::sqrt(dt);
      sxy[name] += w * x * (e.estimate - oracles.at(name));
      sxx[name] += w * x * x;
    }
    fit.points.push_back(std::move(p));
  }
  for (const auto& [name, s] : sxx) {
    fit.c[name] = sxy[name] / s;
    fit.c_std_error[name] = 1.0 / std::sqrt(s);
  }
  return fit;
}

VerificationReport verify_harvest(const Harvest& harvest, const BatteryConfig& config) {
  VerificationReport rep;
  rep.config = config;
  const ModelSpec& spec = config.harvest.spec;
  const double dt = config.harvest.dt;
  const BiasCoefficients bias = config.bias ? *config.bias : default_bias_coefficients(spec);
  rep.config.bias = bias;
  const auto oracles = battery_oracles(spec, config.alpha);
  const auto estimates = battery_estimates(harvest, config.alpha);
  for (const auto& name : {"mean_excess_up", "mean_excess_down", "mean_len_up", "mean_len_down",
                           "mean_cycle", "prob_cover_up", "laplace_cycle", "laplace_len_up"}) {
    const auto it = estimates.find(name);
    if (it == estimates.end()) continue;
    rep.checks.push_back(judge(it->second, oracles.at(name), config.z_max, bias.allowance(name, dt)));
    rep.checks.back().name = name;
  }
  const auto moments = slope_moments(spec);
  for (Direction d : {Direction::Up, Direction::Down}) {
    const auto& sample = d == Direction::Up ? harvest.up : harvest.down;
    const std::string name = std::string("ks_excess_") + to_string(d);
    KsCheck k;
    k.name = name;
    k.n = sample.size();
    k.reference_mean = moments.mean_excess(d);
    const auto xs = excesses(sample);
    k.statistic = ks_statistic(xs, [m = k.reference_mean](double x) {
      return x <= 0.0 ? 0.0 : -std::expm1(-x / m);
    });
    k.p_value = ks_exponential(xs, k.reference_mean);
    k.pass = k.p_value > config.ks_level;
    rep.ks.push_back(k);
  }
  rep.n_up = harvest.up.size();
  rep.n_down = harvest.down.size();
  rep.n_covering = harvest.covering.size();
  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  for (const auto& k : rep.ks) rep.pass = rep.pass && k.pass;
  return rep;
}

VerificationReport verify_battery(const BatteryConfig& config) {
  return verify_harvest(harvest_slopes(config.harvest), config);
}

}  // namespace hslopes
