#pragma once

#include <optional>
#include <string>

#include "hslopes/extrema.hpp"
#include "hslopes/paths.hpp"

namespace hslopes {

/// alpha together with hat_alpha = alpha + mu^2/2 and r = sqrt(2 hat_alpha).
struct AlphaHat {
  double alpha = 0.0;
  double hat_alpha = 0.0;
  double root = 0.0;
};

/// Throws DomainError unless hat_alpha > 0.
AlphaHat alpha_hat(double alpha, double mu);

struct SlopeMoments {
  double mean_minus_beta = 0.0;
  double mean_excess_up = 0.0;
  double mean_excess_down = 0.0;
  double mean_len_up = 0.0;
  double mean_len_down = 0.0;
  double mean_cycle = 0.0;
  double prob_cover_up = 0.0;
  double prob_cover_down = 0.0;

  double mean_excess(Direction d) const { return d == Direction::Up ? mean_excess_up : mean_excess_down; }
  double mean_len(Direction d) const { return d == Direction::Up ? mean_len_up : mean_len_down; }
  double prob_cover(Direction d) const { return d == Direction::Up ? prob_cover_up : prob_cover_down; }
};

struct DomainCondition {
  bool satisfied = false;
  std::optional<double> boundary_alpha;
  std::string condition;
};

SlopeMoments slope_moments(const ModelSpec& spec);

struct BuildingBlocks {
  /// Rate of the conditional exponential law of sigma given beta = -x.
  double exponent_sigma = 0.0;
  /// Laplace transform of sigma; empty when it diverges.
  std::optional<double> laplace_sigma;
  double laplace_tau_minus_sigma = 0.0;
  DomainCondition sigma_domain;
};

BuildingBlocks laplace_building_blocks(double alpha, const ModelSpec& spec);
/// E[exp(-alpha sigma) | beta = -x].
double laplace_sigma_given_beta(double alpha, double x, const ModelSpec& spec);
/// E exp(-alpha sigma); throws DomainError where it diverges.
double laplace_sigma(double alpha, const ModelSpec& spec);
double laplace_tau_minus_sigma(double alpha, const ModelSpec& spec);

/// Joint transform E exp(-alpha l - lambda zeta) of one slope.
double laplace_slope(double alpha, double lambda, Direction dir, const ModelSpec& spec);
DomainCondition slope_domain(double alpha, double lambda, Direction dir, const ModelSpec& spec);

/// E exp(-alpha (l_+ + l_-)) for independent up and down lengths.
double laplace_cycle(double alpha, const ModelSpec& spec);
DomainCondition cycle_domain(double alpha, const ModelSpec& spec);
/// Infimum of the alphas for which laplace_cycle is finite.
double cycle_boundary_alpha(const ModelSpec& spec);

enum class HittingKind {
  exit_below,            // E_0 e^{-a T_x}; T_x < T_y, x < 0 < y
  exit_above,            // E_0 e^{-a T_y}; T_y < T_x, x < 0 < y
  from_y_to_0_before_h,  // E_y e^{-a T_0}; T_0 < T_h
  from_y_to_h_before_0,  // E_y e^{-a T_h}; T_h < T_0
  prob_0_first,          // P_y(T_0 < T_h)
  prob_h_first,          // P_y(T_h < T_0)
  ruin_transform,        // E_y e^{-a T_0}; T_0 < infinity
  ruin_mean,             // E_y T_0; T_0 < infinity
};

struct HittingParams {
  double alpha = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// Hitting-time laws of the drifted motion. h is taken from `spec`.
double hitting_laplace(HittingKind kind, const HittingParams& p, const ModelSpec& spec);
const char* to_string(HittingKind kind) noexcept;
std::optional<HittingKind> parse_hitting_kind(const std::string& name);

/// Scale function W and the alpha-scale functions W_alpha, Z_alpha.
struct ScaleValues {
  double w = 0.0;
  double w_alpha = 0.0;
  double z_alpha = 0.0;
};

ScaleValues scale_functions(double alpha, const ModelSpec& spec, double x);
double scale_w(const ModelSpec& spec, double x);
double scale_w_alpha(double alpha, const ModelSpec& spec, double x);
double scale_z_alpha(double alpha, const ModelSpec& spec, double x);

/// Excursion-measure quantities of the reflected process.
struct ItoRates {
  double n_up = 0.0;                     // mass of excursions reaching h
  double excursion_exponent = 0.0;       // equals exponent_sigma
  double conditional_hit_laplace = 0.0;  // equals laplace_tau_minus_sigma
};

ItoRates ito_rates(double alpha, const ModelSpec& spec);

/// Transition density of the coth-drift diffusion started at x > 0.
/// mu = 0 gives the Bessel(3) kernel.
double qt_density(double t, double x, double y, const ModelSpec& spec);

/// E exp(-alpha T_h) for the coth-drift diffusion started at x in [0, h).
/// x = 0 reduces to laplace_tau_minus_sigma.
double conditioned_hit_laplace(double alpha, double x, const ModelSpec& spec);
/// Mean of T_h for the coth-drift diffusion started at 0.
double conditioned_hit_mean(const ModelSpec& spec);

}  // namespace hslopes
