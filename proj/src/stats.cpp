#include "hslopes/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "hslopes/error.hpp"

namespace hslopes {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

namespace {

EstimatorReport mean_of(std::span<const double> xs, const std::function<double(double)>& f) {
  if (xs.size() < 2) throw InvalidArgument("an estimate needs at least two observations");
  CompensatedSum s;
  const double first = f(xs[0]);
  bool constant = true;
  for (double x : xs) {
    const double v = f(x);
    constant = constant && v == first;
    s.add(v);
  }
  const double n = static_cast<double>(xs.size());
  const double mean = constant ? first : s.value() / n;
  CompensatedSum ss;
  for (double x : xs) {
    const double d = f(x) - mean;
    ss.add(d * d);
  }
  EstimatorReport r;
  r.estimate = mean;
  r.n = xs.size();
  r.std_error = std::sqrt(ss.value() / (n - 1.0) / n);
  return r;
}

}  // namespace

EstimatorReport estimate_mean(std::span<const double> sample) {
  return mean_of(sample, [](double x) { return x; });
}

EstimatorReport estimate_laplace(std::span<const double> sample, double alpha) {
  return mean_of(sample, [alpha](double x) { return std::exp(-alpha * x); });
}

EstimatorReport judge(EstimatorReport r, double oracle, double z_max, double allowance) {
  r.oracle = oracle;
  r.allowance = allowance;
  const double diff = r.estimate - oracle;
  if (r.std_error > 0.0) r.z = diff / r.std_error;
  r.pass = std::abs(diff) <= z_max * r.std_error + allowance;
  return r;
}

double kolmogorov_q(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-transformed series converges fast for small lambda.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      s += std::exp(-j * j * c);
    }
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw InvalidArgument("empty sample");
  std::vector<double> xs(sample.begin(), sample.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf) {
  const double d = ks_statistic(sample, cdf);
  return kolmogorov_q(std::sqrt(static_cast<double>(sample.size())) * d);
}

double ks_exponential(std::span<const double> sample, double mean) {
  if (sample.size() < 50) throw InvalidArgument("KS test needs at least 50 observations");
  if (!(mean > 0.0)) throw InvalidArgument("exponential mean must be positive");
  return ks_one_sample(sample, [mean](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x / mean); });
}

double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  const double d = ks_two_sample_statistic(a, b);
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  return kolmogorov_q(std::sqrt(n * m / (n + m)) * d);
}

ChiSquareResult chi_square(std::span<const double> observed, std::span<const double> expected,
                           std::size_t constraints) {
  if (observed.size() != expected.size() || observed.empty())
    throw InvalidArgument("observed and expected bins must match");
  if (observed.size() <= constraints) throw InvalidArgument("too few bins for the constraints");
  ChiSquareResult r;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) throw InvalidArgument("expected counts must be positive");
    const double d = observed[i] - expected[i];
    r.statistic += d * d / expected[i];
  }
  r.dof = observed.size() - constraints;
  r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * r.statistic);
  return r;
}

double two_proportion_z(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2) {
  if (n1 == 0 || n2 == 0) throw InvalidArgument("empty proportion sample");
  const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
  const double p = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
  const double se = std::sqrt(p * (1.0 - p) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  return se > 0.0 ? (p1 - p2) / se : 0.0;
}

}  // namespace hslopes
