#include "hslopes/sinai.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hslopes/error.hpp"
#include "hslopes/formulas.hpp"
#include "hslopes/rng.hpp"

namespace hslopes {

const char* to_string(OmegaLaw law) noexcept {
  return law == OmegaLaw::uniform_logodds ? "uniform_logodds" : "rademacher";
}

OmegaLaw parse_omega_law(const std::string& name) {
  if (name == "uniform_logodds") return OmegaLaw::uniform_logodds;
  if (name == "rademacher") return OmegaLaw::rademacher;
  throw InvalidArgument("unknown omega law '" + name + "'");
}

void SinaiConfig::validate() const {
  if (!std::isfinite(delta)) throw InvalidArgument("delta must be finite");
  if (delta == 0.0) throw Unsupported("delta = 0 gives zero drift, which the limit laws exclude");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("Gamma must be positive");
  if (static_cast<double>(n_sites) < 100.0 * gamma * gamma)
    throw InvalidArgument("n_sites must be at least 100 Gamma^2");
}

double SinaiConfig::mu() const { return -std::numbers::sqrt2 * delta * gamma; }
double SinaiConfig::h() { return 1.0 / std::numbers::sqrt2; }

double SinaiRecord::max_relative_error() const {
  double worst = 0.0;
  for (auto [e, o] : {std::pair{zeta_up.estimate, oracle_zeta_up},
                      std::pair{zeta_down.estimate, oracle_zeta_down},
                      std::pair{len_up.estimate, oracle_len_up},
                      std::pair{len_down.estimate, oracle_len_down}})
    worst = std::max(worst, std::abs(e / o - 1.0));
  return worst;
}

SinaiRecord sinai_experiment(const SinaiConfig& config) {
  config.validate();
  RngStream stream = spawn_stream(config.seed, 0);
  const double drift = 2.0 * config.delta;
  const double half_width = std::sqrt(6.0);

  StreamingDetector detector(config.gamma, SweepMode::Auto);
  std::vector<double> zeta[2];
  std::vector<double> len[2];
  std::optional<HExtremum> prev;
  bool first = true;
  double v = 0.0;
  for (std::uint64_t x = 0; x <= config.n_sites; ++x) {
    if (x > 0) {
      const double noise = config.omega_law == OmegaLaw::uniform_logodds
                               ? half_width * (2.0 * stream.uniform() - 1.0)
                               : ((stream() >> 63) ? std::numbers::sqrt2 : -std::numbers::sqrt2);
      v += drift + noise;
    }
    const auto e = detector.push(static_cast<double>(x), v);
    if (!e) continue;
    // The first confirmed point is anchored at site 0, not a Gamma-extremum.
    if (first) {
      first = false;
      continue;
    }
    if (prev) {
      const int up = prev->kind == ExtremumKind::Min ? 0 : 1;
      zeta[up].push_back((std::abs(e->level - prev->level) - config.gamma) / config.gamma);
      len[up].push_back((e->time - prev->time) / (config.gamma * config.gamma));
    }
    prev = e;
  }

  SinaiRecord rec;
  rec.config = config;
  rec.mu = config.mu();
  rec.h = SinaiConfig::h();
  const ModelSpec limit{rec.mu, rec.h};
  const auto m = slope_moments(limit);
  rec.zeta_up = estimate_mean(zeta[0]);
  rec.zeta_down = estimate_mean(zeta[1]);
  rec.len_up = estimate_mean(len[0]);
  rec.len_down = estimate_mean(len[1]);
  rec.oracle_zeta_up = std::numbers::sqrt2 * m.mean_excess_up;
  rec.oracle_zeta_down = std::numbers::sqrt2 * m.mean_excess_down;
  rec.oracle_len_up = m.mean_len_up;
  rec.oracle_len_down = m.mean_len_down;
  rec.zeta_up.name = "rescaled_zeta_up";
  rec.zeta_down.name = "rescaled_zeta_down";
  rec.len_up.name = "rescaled_len_up";
  rec.len_down.name = "rescaled_len_down";
  return rec;
}

std::vector<SinaiRecord> gamma_doubling_study(const SinaiConfig& base, int levels) {
  if (levels < 1) throw InvalidArgument("levels must be at least 1");
  std::vector<SinaiRecord> out;
  SinaiConfig cfg = base;
  for (int i = 0; i < levels; ++i) {
    out.push_back(sinai_experiment(cfg));
    cfg.gamma *= 2.0;
    cfg.delta /= 2.0;
    cfg.n_sites *= 4;
  }
  return out;
}

}  // namespace hslopes
