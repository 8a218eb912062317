#pragma once

// Straight transcriptions of the closed-form laws, written without the
// library's stabilised helpers so the two can be checked against each other.

#include <cmath>
#include <numbers>

namespace oracle {

inline double root(double alpha, double mu) { return std::sqrt(2.0 * alpha + mu * mu); }

inline double mean_minus_beta(double mu, double h) {
  return std::sinh(mu * h) / (mu * std::exp(-mu * h));
}
inline double mean_excess_up(double mu, double h) {
  return std::sinh(mu * h) / (mu * std::exp(mu * h));
}
inline double mean_excess_down(double mu, double h) { return mean_minus_beta(mu, h); }
inline double mean_len_up(double mu, double h) {
  return (mu * h - std::sinh(mu * h) * std::exp(-mu * h)) / (mu * mu);
}
inline double mean_len_down(double mu, double h) {
  return (std::exp(mu * h) * std::sinh(mu * h) - mu * h) / (mu * mu);
}
inline double mean_cycle(double mu, double h) {
  const double s = std::sinh(mu * h);
  return 2.0 * s * s / (mu * mu);
}
inline double prob_cover_up(double mu, double h) { return mean_len_up(mu, h) / mean_cycle(mu, h); }

// Rate of sigma given beta = -x, and the transforms of sigma and tau - sigma.
inline double exponent_sigma(double alpha, double mu, double h) {
  const double r = root(alpha, mu);
  return r / std::tanh(r * h) - mu / std::tanh(mu * h);
}
inline double laplace_sigma(double alpha, double mu, double h) {
  const double r = root(alpha, mu);
  return mu * std::exp(-mu * h) / (std::sinh(mu * h) * (r / std::tanh(r * h) - mu));
}
inline double laplace_tau_minus_sigma(double alpha, double mu, double h) {
  const double r = root(alpha, mu);
  return r / mu * std::sinh(mu * h) / std::sinh(r * h);
}

// Joint transform of (length, excess); up = +1 for an upward slope.
inline double laplace_slope(double alpha, double lambda, int up, double mu, double h) {
  const double r = root(alpha, mu);
  const double m = up > 0 ? mu : -mu;
  return r * std::exp(m * h) / (r * std::cosh(r * h) + (lambda + m) * std::sinh(r * h));
}
inline double laplace_cycle(double alpha, double mu, double h) {
  const double r = root(alpha, mu);
  const double c = std::cosh(r * h);
  return r * r / (2.0 * alpha * c * c + mu * mu);
}

inline double n_up(double mu, double h) { return mu * std::exp(-mu * h) / std::sinh(mu * h); }

// Two-sided exit from (x, y) with x < 0 < y, started at 0.
inline double exit_below(double alpha, double mu, double x, double y) {
  const double r = root(alpha, mu);
  return std::exp(-mu * x) * std::sinh(y * r) / std::sinh((y - x) * r);
}
inline double exit_above(double alpha, double mu, double x, double y) {
  const double r = root(alpha, mu);
  return std::exp(-mu * y) * std::sinh(-x * r) / std::sinh((y - x) * r);
}
inline double to_0_before_h(double alpha, double mu, double h, double y) {
  const double r = root(alpha, mu);
  return std::exp(mu * y) * std::sinh((h - y) * r) / std::sinh(h * r);
}
inline double to_h_before_0(double alpha, double mu, double h, double y) {
  const double r = root(alpha, mu);
  return std::exp(mu * (y - h)) * std::sinh(y * r) / std::sinh(h * r);
}
inline double prob_0_first(double mu, double h, double y) {
  return std::exp(mu * y) * std::sinh(mu * (h - y)) / std::sinh(mu * h);
}
inline double prob_h_first(double mu, double h, double y) {
  return std::exp(mu * (y - h)) * std::sinh(mu * y) / std::sinh(mu * h);
}
inline double ruin_transform(double alpha, double mu, double y) {
  return std::exp(mu * y - y * root(alpha, mu));
}
inline double ruin_mean(double mu, double y) {
  return std::exp(y * (mu - std::abs(mu))) * y / std::abs(mu);
}

inline double scale_w(double mu, double x) { return (std::exp(2.0 * mu * x) - 1.0) / mu; }
inline double scale_w_alpha(double alpha, double mu, double x) {
  const double r = root(alpha, mu);
  return std::exp(mu * x) * (std::exp(r * x) - std::exp(-r * x)) / r;
}
inline double scale_z_alpha(double alpha, double mu, double x) {
  const double r = root(alpha, mu);
  return alpha * std::exp(mu * x) / r *
         (std::exp(r * x) / (mu + r) - std::exp(-r * x) / (mu - r));
}

// Transition density of the coth-drift diffusion.
inline double qt(double t, double x, double y, double mu) {
  const double ratio = mu == 0.0 ? y / x : std::sinh(mu * y) / std::sinh(mu * x);
  const double kernel = (std::exp(-(y - x) * (y - x) / (2.0 * t)) -
                         std::exp(-(y + x) * (y + x) / (2.0 * t))) /
                        std::sqrt(2.0 * std::numbers::pi * t);
  return ratio * std::exp(-0.5 * mu * mu * t) * kernel;
}

}  // namespace oracle
