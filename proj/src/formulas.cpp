#include "hslopes/formulas.hpp"

#include <cmath>
#include <numbers>

#include "hslopes/error.hpp"

namespace hslopes {

namespace {

constexpr double kLogSpaceCutoff = 30.0;

void require_formula_spec(const ModelSpec& spec) { spec.require_nonzero_drift(); }

// log|sinh z| for z != 0, accurate for large |z|.
double log_abs_sinh(double z) {
  const double a = std::abs(z);
  if (a <= kLogSpaceCutoff) return std::log(std::sinh(a));
  return a + std::log1p(-std::exp(-2.0 * a)) - std::numbers::ln2;
}

// sinh(a) / sinh(b), b != 0.
double sinh_ratio(double a, double b) {
  if (a == 0.0) return 0.0;
  if (std::max(std::abs(a), std::abs(b)) <= kLogSpaceCutoff) return std::sinh(a) / std::sinh(b);
  const double sign = ((a > 0) == (b > 0)) ? 1.0 : -1.0;
  return sign * std::exp(log_abs_sinh(a) - log_abs_sinh(b));
}

// sinh(m a) / sinh(m b) with the m -> 0 limit a / b.
double sinh_ratio_scaled(double m, double a, double b) {
  if (m == 0.0) return a / b;
  return sinh_ratio(m * a, m * b);
}

double coth(double x) { return 1.0 / std::tanh(x); }

// sech^2(z), z >= 0, without overflow.
double sech2(double z) {
  const double e = std::exp(-z);
  const double s = 2.0 * e / (1.0 + e * e);
  return s * s;
}

// e^{m h} / cosh(r h), r > 0.
double exp_over_cosh(double m, double r, double h) {
  return 2.0 * std::exp((m - r) * h) / (1.0 + std::exp(-2.0 * r * h));
}

// Excess mean for the slope whose signed drift parameter is m (m = mu for
// up-slopes, m = -mu for down-slopes).
double excess_mean(double m, double h) { return std::sinh(m * h) / (m * std::exp(m * h)); }

// (x - sinh(x) e^{-x}) / m^2 with x = m h, written to avoid cancellation.
double length_mean(double m, double h) {
  const double x = m * h;
  double num;
  if (std::abs(x) < 0.1) {
    // x + (e^{-2x} - 1)/2 = sum_{n>=2} (-1)^n 2^{n-1} x^n / n!
    num = 0.0;
    double term = x;  // 2^{n-1} x^n / n! at n = 1, signs applied below
    for (int n = 2; n < 30; ++n) {
      term *= 2.0 * x / n;
      num += (n % 2 == 0 ? term : -term);
    }
  } else {
    num = x + 0.5 * std::expm1(-2.0 * x);
  }
  return num / (m * m);
}

// mu e^{-mu h} / sinh(mu h), valid for either sign of mu.
double excursion_mass(double mu, double h) { return 2.0 * mu / std::expm1(2.0 * mu * h); }

double sign_of(Direction d) { return d == Direction::Up ? 1.0 : -1.0; }

DomainError hat_alpha_error(double mu) {
  return DomainError("hat_alpha = alpha + mu^2/2 > 0", -0.5 * mu * mu);
}

}  // namespace

AlphaHat alpha_hat(double alpha, double mu) {
  if (!std::isfinite(alpha)) throw InvalidArgument("alpha must be finite");
  AlphaHat a;
  a.alpha = alpha;
  a.hat_alpha = alpha + 0.5 * mu * mu;
  if (!(a.hat_alpha > 0.0)) throw hat_alpha_error(mu);
  a.root = std::sqrt(2.0 * a.hat_alpha);
  return a;
}

SlopeMoments slope_moments(const ModelSpec& spec) {
  require_formula_spec(spec);
  const double mu = spec.mu;
  const double h = spec.h;
  SlopeMoments m;
  m.mean_minus_beta = 1.0 / excursion_mass(mu, h);
  m.mean_excess_up = excess_mean(mu, h);
  m.mean_excess_down = excess_mean(-mu, h);
  m.mean_len_up = length_mean(mu, h);
  m.mean_len_down = length_mean(-mu, h);
  const double s = std::sinh(std::abs(mu) * h) / std::abs(mu);
  m.mean_cycle = 2.0 * s * s;
  m.prob_cover_up = m.mean_len_up / m.mean_cycle;
  m.prob_cover_down = m.mean_len_down / m.mean_cycle;
  return m;
}

double laplace_sigma_given_beta(double alpha, double x, const ModelSpec& spec) {
  if (!(x >= 0.0)) throw InvalidArgument("x must be non-negative");
  return std::exp(-x * laplace_building_blocks(alpha, spec).exponent_sigma);
}

BuildingBlocks laplace_building_blocks(double alpha, const ModelSpec& spec) {
  require_formula_spec(spec);
  const auto a = alpha_hat(alpha, spec.mu);
  const double mu = spec.mu;
  const double amu = std::abs(mu);
  const double h = spec.h;
  const double r = a.root;
  const double r_coth = r * coth(r * h);

  BuildingBlocks b;
  b.exponent_sigma = r_coth - amu * coth(amu * h);
  b.laplace_tau_minus_sigma = (r / amu) * sinh_ratio(amu * h, r * h);
  b.sigma_domain.condition = "sqrt(2 hat_alpha) coth(sqrt(2 hat_alpha) h) > mu";
  b.sigma_domain.satisfied = r_coth > mu;
  if (b.sigma_domain.satisfied) b.laplace_sigma = excursion_mass(mu, h) / (r_coth - mu);
  return b;
}

double laplace_sigma(double alpha, const ModelSpec& spec) {
  const auto b = laplace_building_blocks(alpha, spec);
  if (!b.laplace_sigma) throw DomainError(b.sigma_domain.condition);
  return *b.laplace_sigma;
}

double laplace_tau_minus_sigma(double alpha, const ModelSpec& spec) {
  return laplace_building_blocks(alpha, spec).laplace_tau_minus_sigma;
}

DomainCondition slope_domain(double alpha, double lambda, Direction dir, const ModelSpec& spec) {
  require_formula_spec(spec);
  DomainCondition d;
  const double m = sign_of(dir) * spec.mu;
  d.condition = std::string("sqrt(2 hat_alpha) coth(sqrt(2 hat_alpha) h) + lambda ") +
                (dir == Direction::Up ? "+" : "-") + " mu > 0";
  const double hat = alpha + 0.5 * spec.mu * spec.mu;
  if (!(hat > 0.0)) {
    d.condition = "hat_alpha = alpha + mu^2/2 > 0";
    d.boundary_alpha = -0.5 * spec.mu * spec.mu;
    return d;
  }
  const double r = std::sqrt(2.0 * hat);
  d.satisfied = r * coth(r * spec.h) + lambda + m > 0.0;
  return d;
}

double laplace_slope(double alpha, double lambda, Direction dir, const ModelSpec& spec) {
  require_formula_spec(spec);
  if (!std::isfinite(lambda)) throw InvalidArgument("lambda must be finite");
  const auto a = alpha_hat(alpha, spec.mu);
  const auto dom = slope_domain(alpha, lambda, dir, spec);
  if (!dom.satisfied) throw DomainError(dom.condition);
  const double m = sign_of(dir) * spec.mu;
  const double r = a.root;
  const double h = spec.h;
  // numerator and denominator divided by cosh(r h)
  return r * exp_over_cosh(m, r, h) / (r + (lambda + m) * std::tanh(r * h));
}

double cycle_boundary_alpha(const ModelSpec& spec) {
  require_formula_spec(spec);
  const double mu2 = spec.mu * spec.mu;
  const double c = std::abs(spec.mu) * spec.h;
  if (c <= 1.0) return -0.5 * mu2;
  // positive root of y = c tanh(y)
  double lo = 0.0;
  double hi = 10.0 * c;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid - c * std::tanh(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double y = 0.5 * (lo + hi);
  return -0.5 * mu2 + y * y / (2.0 * spec.h * spec.h);
}

DomainCondition cycle_domain(double alpha, const ModelSpec& spec) {
  require_formula_spec(spec);
  DomainCondition d;
  d.boundary_alpha = cycle_boundary_alpha(spec);
  const double mu2 = spec.mu * spec.mu;
  const double hat = alpha + 0.5 * mu2;
  if (!(hat > 0.0)) {
    d.condition = "hat_alpha = alpha + mu^2/2 > 0";
    return d;
  }
  d.condition = "2 alpha cosh^2(sqrt(2 hat_alpha) h) + mu^2 > 0";
  const double s = sech2(std::sqrt(2.0 * hat) * spec.h);
  d.satisfied = 2.0 * alpha + mu2 * s > 0.0;
  return d;
}

double laplace_cycle(double alpha, const ModelSpec& spec) {
  const auto dom = cycle_domain(alpha, spec);
  if (!dom.satisfied) throw DomainError(dom.condition, dom.boundary_alpha);
  const auto a = alpha_hat(alpha, spec.mu);
  const double s = sech2(a.root * spec.h);
  return 2.0 * a.hat_alpha * s / (2.0 * alpha + spec.mu * spec.mu * s);
}

const char* to_string(HittingKind kind) noexcept {
  switch (kind) {
    case HittingKind::exit_below: return "exit_below";
    case HittingKind::exit_above: return "exit_above";
    case HittingKind::from_y_to_0_before_h: return "from_y_to_0_before_h";
    case HittingKind::from_y_to_h_before_0: return "from_y_to_h_before_0";
    case HittingKind::prob_0_first: return "prob_0_first";
    case HittingKind::prob_h_first: return "prob_h_first";
    case HittingKind::ruin_transform: return "ruin_transform";
    case HittingKind::ruin_mean: return "ruin_mean";
  }
  return "?";
}

std::optional<HittingKind> parse_hitting_kind(const std::string& name) {
  for (auto k : {HittingKind::exit_below, HittingKind::exit_above,
                 HittingKind::from_y_to_0_before_h, HittingKind::from_y_to_h_before_0,
                 HittingKind::prob_0_first, HittingKind::prob_h_first,
                 HittingKind::ruin_transform, HittingKind::ruin_mean})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

double hitting_laplace(HittingKind kind, const HittingParams& p, const ModelSpec& spec) {
  require_formula_spec(spec);
  const double mu = spec.mu;
  const double h = spec.h;
  const double x = p.x;
  const double y = p.y;
  auto need_interval = [&] {
    if (!(x < 0.0 && 0.0 < y)) throw DomainError("x < 0 < y");
  };
  auto need_strip = [&] {
    if (!(0.0 < y && y < h)) throw DomainError("0 < y < h");
  };
  auto need_positive = [&] {
    if (!(y > 0.0)) throw DomainError("y > 0");
  };
  switch (kind) {
    case HittingKind::exit_below: {
      need_interval();
      const double r = alpha_hat(p.alpha, mu).root;
      return std::exp(-mu * x) * sinh_ratio(y * r, (y - x) * r);
    }
    case HittingKind::exit_above: {
      need_interval();
      const double r = alpha_hat(p.alpha, mu).root;
      return std::exp(-mu * y) * sinh_ratio(-x * r, (y - x) * r);
    }
    case HittingKind::from_y_to_0_before_h: {
      need_strip();
      const double r = alpha_hat(p.alpha, mu).root;
      return std::exp(mu * y) * sinh_ratio((h - y) * r, h * r);
    }
    case HittingKind::from_y_to_h_before_0: {
      need_strip();
      const double r = alpha_hat(p.alpha, mu).root;
      return std::exp(mu * (y - h)) * sinh_ratio(y * r, h * r);
    }
    case HittingKind::prob_0_first:
      need_strip();
      return std::exp(mu * y) * sinh_ratio(mu * (h - y), mu * h);
    case HittingKind::prob_h_first:
      need_strip();
      return std::exp(mu * (y - h)) * sinh_ratio(mu * y, mu * h);
    case HittingKind::ruin_transform: {
      need_positive();
      const double r = alpha_hat(p.alpha, mu).root;
      return std::exp(mu * y - y * r);
    }
    case HittingKind::ruin_mean:
      need_positive();
      return std::exp(y * (mu - std::abs(mu))) * y / std::abs(mu);
  }
  throw InvalidArgument("unknown hitting kind");
}

double scale_w(const ModelSpec& spec, double x) {
  require_formula_spec(spec);
  if (!(x >= 0.0)) throw DomainError("x >= 0");
  return std::expm1(2.0 * spec.mu * x) / spec.mu;
}

double scale_w_alpha(double alpha, const ModelSpec& spec, double x) {
  require_formula_spec(spec);
  if (!(x >= 0.0)) throw DomainError("x >= 0");
  const double r = alpha_hat(alpha, spec.mu).root;
  return 2.0 * std::exp(spec.mu * x) * std::sinh(r * x) / r;
}

double scale_z_alpha(double alpha, const ModelSpec& spec, double x) {
  require_formula_spec(spec);
  if (!(x >= 0.0)) throw DomainError("x >= 0");
  const double r = alpha_hat(alpha, spec.mu).root;
  return std::exp(spec.mu * x) * (std::cosh(r * x) - (spec.mu / r) * std::sinh(r * x));
}

ScaleValues scale_functions(double alpha, const ModelSpec& spec, double x) {
  return {scale_w(spec, x), scale_w_alpha(alpha, spec, x), scale_z_alpha(alpha, spec, x)};
}

ItoRates ito_rates(double alpha, const ModelSpec& spec) {
  require_formula_spec(spec);
  const auto a = alpha_hat(alpha, spec.mu);
  const double mu = spec.mu;
  const double h = spec.h;
  const double r = a.root;
  ItoRates out;
  out.n_up = excursion_mass(mu, h);
  out.excursion_exponent = r * coth(r * h) - std::abs(mu) * coth(std::abs(mu) * h);
  // n(e^{-alpha T_h}; T_h < T_0) = r e^{-mu h} / sinh(r h), then normalised.
  const double hit = 2.0 * r * std::exp(-mu * h - r * h) / -std::expm1(-2.0 * r * h);
  out.conditional_hit_laplace = hit / out.n_up;
  return out;
}

double qt_density(double t, double x, double y, const ModelSpec& spec) {
  if (!(t > 0.0) || !(x > 0.0) || !(y > 0.0)) throw DomainError("t > 0, x > 0, y > 0");
  if (!std::isfinite(spec.mu)) throw InvalidArgument("drift mu must be finite");
  const double mu = spec.mu;
  double log_ratio;
  if (mu == 0.0) {
    log_ratio = std::log(y / x);
  } else {
    log_ratio = log_abs_sinh(mu * y) - log_abs_sinh(mu * x);
  }
  const double d = y - x;
  const double log_gauss = log_ratio - 0.5 * mu * mu * t - d * d / (2.0 * t);
  return std::exp(log_gauss) * -std::expm1(-2.0 * x * y / t) / std::sqrt(2.0 * std::numbers::pi * t);
}

double conditioned_hit_laplace(double alpha, double x, const ModelSpec& spec) {
  spec.validate();
  if (!(x >= 0.0 && x < spec.h)) throw DomainError("0 <= x < h");
  const double amu = std::abs(spec.mu);
  const double r = alpha_hat(alpha, spec.mu).root;
  const double h = spec.h;
  if (x == 0.0) {
    if (amu == 0.0) return std::exp(std::log(r * h) - log_abs_sinh(r * h));
    return (r / amu) * sinh_ratio(amu * h, r * h);
  }
  return sinh_ratio(x * r, h * r) * sinh_ratio_scaled(amu, h, x);
}

double conditioned_hit_mean(const ModelSpec& spec) {
  spec.validate();
  const double amu = std::abs(spec.mu);
  const double h = spec.h;
  if (amu == 0.0) return h * h / 3.0;
  return h * coth(amu * h) / amu - 1.0 / (amu * amu);
}

}  // namespace hslopes
