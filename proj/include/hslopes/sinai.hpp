#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hslopes/extrema.hpp"
#include "hslopes/stats.hpp"

namespace hslopes {

/// Law of the site log-odds X = log((1 - w) / w). Both have mean 2 delta and
/// variance 2, so only the shape differs.
enum class OmegaLaw {
  uniform_logodds,  // X = 2 delta + U(-sqrt 6, sqrt 6)
  rademacher,       // X = 2 delta +- sqrt 2
};

const char* to_string(OmegaLaw law) noexcept;
OmegaLaw parse_omega_law(const std::string& name);

struct SinaiConfig {
  double delta = 0.05;
  double gamma = 10.0;
  std::uint64_t n_sites = 10'000'000;
  std::uint64_t seed = 7;
  OmegaLaw omega_law = OmegaLaw::uniform_logodds;

  void validate() const;
  /// Drift of the limiting motion, -sqrt(2) delta Gamma.
  double mu() const;
  /// Threshold of the limiting motion, 1/sqrt(2).
  static double h();
};

/// Rescaled Gamma-slope statistics of one potential beside the drifted-BM
/// oracle. Excess is divided by Gamma and length by Gamma^2.
struct SinaiRecord {
  SinaiConfig config;
  double mu = 0.0;
  double h = 0.0;
  EstimatorReport zeta_up;
  EstimatorReport zeta_down;
  EstimatorReport len_up;
  EstimatorReport len_down;
  double oracle_zeta_up = 0.0;
  double oracle_zeta_down = 0.0;
  double oracle_len_up = 0.0;
  double oracle_len_down = 0.0;

  /// Largest |estimate / oracle - 1| over the four means.
  double max_relative_error() const;
};

SinaiRecord sinai_experiment(const SinaiConfig& config);

/// The same experiment at gamma, 2 gamma, 4 gamma, ... with delta Gamma held
/// fixed and n_sites scaled by Gamma^2, to show the finite-Gamma error shrink.
std::vector<SinaiRecord> gamma_doubling_study(const SinaiConfig& base, int levels);

}  // namespace hslopes
