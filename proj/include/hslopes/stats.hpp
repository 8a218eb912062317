#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hslopes {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Point estimate with CLT standard error, optionally judged against an oracle.
struct EstimatorReport {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  std::optional<double> oracle;
  std::optional<double> z;
  /// Additive tolerance on top of z_max standard errors (grid bias budget).
  double allowance = 0.0;
  bool pass = true;
};

EstimatorReport estimate_mean(std::span<const double> sample);
/// Empirical E exp(-alpha X).
EstimatorReport estimate_laplace(std::span<const double> sample, double alpha);

/// Fill in oracle, z and pass: |estimate - oracle| <= z_max * stderr + allowance.
[[nodiscard]] EstimatorReport judge(EstimatorReport r, double oracle, double z_max, double allowance = 0.0);

/// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_q(double lambda);

/// Sup distance between the empirical CDF of `sample` and `cdf`.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);
double ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf);
/// KS p-value of `sample` against Exponential with the given mean; n >= 50.
double ks_exponential(std::span<const double> sample, double mean);

double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b);
/// Asymptotic two-sample KS p-value with effective size nm/(n+m).
double ks_two_sample(std::span<const double> a, std::span<const double> b);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit. `expected` need not sum to the observed total:
/// bins outside the histogram are the caller's business.
ChiSquareResult chi_square(std::span<const double> observed, std::span<const double> expected,
                           std::size_t constraints = 1);

/// Two-proportion z statistic for k1/n1 vs k2/n2 under the pooled null.
double two_proportion_z(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2);

}  // namespace hslopes
