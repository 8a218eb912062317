#include "hslopes/conditioned.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hslopes/error.hpp"
#include "hslopes/formulas.hpp"

namespace hslopes {

namespace {

std::size_t steps_for(double time, double dt) {
  return static_cast<std::size_t>(std::llround(time / dt));
}

// Accumulates a PathSummary along a path observed on the dt grid.
class SummaryTracker {
 public:
  SummaryTracker(double start, std::size_t probe_step) : probe_step_(probe_step) {
    s_.value_at_t = start;
    s_.max_level = start;
  }

  void observe(std::size_t step, double x) {
    if (step > probe_step_) return;
    s_.value_at_t = x;
    s_.max_level = std::max(s_.max_level, x);
  }

  PathSummary finish(double duration, bool censored) {
    s_.duration = duration;
    s_.censored = censored;
    return s_;
  }

 private:
  std::size_t probe_step_;
  PathSummary s_;
};

}  // namespace

double coth_drift(double mu, double x) {
  const double z = mu * x;
  if (std::abs(z) < 1e-4) return 1.0 / x + mu * z / 3.0;
  return mu / std::tanh(z);
}

ConditionedPath integrate_coth_sde(RngStream& stream, const ModelSpec& spec,
                                   const SdeOptions& o) {
  spec.validate();
  if (!(o.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(o.eps0 > 0.0 && o.eps0 < spec.h)) throw InvalidArgument("eps0 must lie in (0, h)");
  if (!(o.stop_time > 0.0)) throw InvalidArgument("stop_time must be positive");
  if (!(o.probe_time >= 0.0)) throw InvalidArgument("probe_time must be non-negative");

  const double mu = spec.mu;
  const double h = spec.h;
  const std::size_t n_steps = std::max<std::size_t>(1, steps_for(o.stop_time, o.dt));
  ConditionedPath out;
  out.dt = o.dt;
  out.eps0 = o.eps0;
  if (o.record_path) out.values.push_back(o.eps0);
  SummaryTracker tracker(o.eps0, steps_for(o.probe_time, o.dt));

  const double sqrt_dt = std::sqrt(o.dt);
  double x = o.eps0;
  double t = 0.0;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t_next = static_cast<double>(k) * o.dt;
    while (t < t_next) {
      const double rest = t_next - t;
      double step = std::min(rest, 0.0625 * x * x);
      const double drift = coth_drift(mu, x);
      const double root = step == o.dt ? sqrt_dt : std::sqrt(step);
      double y = x + drift * step + root * stream.normal();
      if (y <= 0.0) {
        y = x + drift * step + std::sqrt(step) * stream.normal();
        while (y <= 0.0) {
          step *= 0.5;
          y = x + drift * step + std::sqrt(step) * stream.normal();
        }
      }
      x = y;
      t = step == rest ? t_next : t + step;
      if (o.absorb && x >= h) {
        tracker.observe(k, x);
        if (o.record_path) out.values.push_back(x);
        out.hit_time = t;
        out.summary = tracker.finish(t, false);
        return out;
      }
    }
    tracker.observe(k, x);
    if (o.record_path) out.values.push_back(x);
  }
  out.hit_time = t;
  out.censored = o.absorb;
  out.summary = tracker.finish(t, out.censored);
  return out;
}

RejectionResult doob_rejection(RngStream& stream, const ModelSpec& spec, double dt, double eps,
                               double probe_time, bool record_path, std::size_t max_attempts) {
  spec.validate();
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (!(eps > 0.0 && eps < spec.h)) throw InvalidArgument("eps must lie in (0, h)");
  const double mean = -spec.mu * dt;
  const double sd = std::sqrt(dt);
  const double h = spec.h;
  const std::size_t probe_step = steps_for(probe_time, dt);

  RejectionResult res;
  res.path.dt = dt;
  res.path.eps0 = eps;
  while (res.attempts < max_attempts) {
    ++res.attempts;
    if (record_path) res.path.values.assign(1, eps);
    SummaryTracker tracker(eps, probe_step);
    double x = eps;
    for (std::size_t k = 1;; ++k) {
      x += mean + sd * stream.normal();
      if (x <= 0.0) break;
      tracker.observe(k, x);
      if (record_path) res.path.values.push_back(x);
      if (x >= h) {
        res.path.hit_time = static_cast<double>(k) * dt;
        res.path.summary = tracker.finish(res.path.hit_time, false);
        return res;
      }
    }
  }
  throw HorizonTooShort("no trajectory reached h within the attempt budget");
}

double rejection_rate_allowance(const ModelSpec& spec, double dt, double eps) {
  constexpr double kOvershoot = 0.5825971579390106;
  // d/dx log W(x) = 2 mu / (1 - exp(-2 mu x)), 1/x at mu = 0.
  auto dlog_w = [mu = spec.mu](double x) {
    return mu == 0.0 ? 1.0 / x : -2.0 * mu / std::expm1(-2.0 * mu * x);
  };
  const double rate = scale_w(spec, eps) / scale_w(spec, spec.h);
  const double shift = kOvershoot * std::sqrt(dt);
  return 2.0 * rate * shift * std::abs(dlog_w(eps) - 2.0 * dlog_w(spec.h));
}

const char* to_string(SectionKind kind) noexcept {
  switch (kind) {
    case SectionKind::mela1: return "mela1";
    case SectionKind::mela2: return "mela2";
    case SectionKind::pera1: return "pera1";
    case SectionKind::pera2: return "pera2";
  }
  return "?";
}

std::vector<double> SectionSample::durations() const {
  std::vector<double> out;
  out.reserve(sections.size());
  for (const auto& s : sections) out.push_back(s.duration);
  return out;
}

SectionSample near_extremum_sections(const SlopeSequence& seq, const ModelSpec& spec,
                                     SectionKind kind, const SectionOptions& options) {
  spec.require_nonzero_drift();
  SectionSample out;
  out.kind = kind;
  out.dt = seq.path.dt;
  const double margin = options.margin_cycles * slope_moments(spec).mean_cycle;
  const bool wants_up = kind == SectionKind::mela1 || kind == SectionKind::mela2;
  const bool forward = kind == SectionKind::mela1 || kind == SectionKind::pera1;
  // Down slopes are reflected so every section climbs to h.
  const double sign = wants_up ? 1.0 : -1.0;
  const auto& v = seq.path.values;
  const double h = seq.h;
  const std::size_t probe_step = steps_for(options.probe_time, seq.path.dt);

  for (const auto& s : seq.slopes()) {
    if ((s.direction == Direction::Up) != wants_up) continue;
    const bool right = s.start.time >= margin;
    const bool left = s.end.time <= -margin;
    if (!right && !left) continue;
    const std::size_t anchor = forward ? s.start.grid_index : s.end.grid_index;
    const std::size_t span = s.end.grid_index - s.start.grid_index;
    SummaryTracker tracker(0.0, probe_step);
    std::vector<double> window{0.0};
    bool cut = false;
    for (std::size_t j = 1; j <= span; ++j) {
      const std::size_t idx = forward ? anchor + j : anchor - j;
      const double d = sign * (forward ? v[idx] - v[anchor] : v[anchor] - v[idx]);
      tracker.observe(j, d);
      if (options.keep_windows) window.push_back(d);
      if (d >= h) {
        out.sections.push_back(tracker.finish(static_cast<double>(j) * seq.path.dt, false));
        cut = true;
        break;
      }
    }
    if (!cut) continue;
    if (options.keep_windows) out.windows.push_back(std::move(window));
  }
  return out;
}

LawComparison compare_laws(const std::vector<PathSummary>& a, const std::vector<PathSummary>& b) {
  std::vector<double> da, db, va, vb, ma, mb;
  for (const auto& s : a) {
    if (s.censored) continue;
    da.push_back(s.duration);
    va.push_back(s.value_at_t);
    ma.push_back(s.max_level);
  }
  for (const auto& s : b) {
    if (s.censored) continue;
    db.push_back(s.duration);
    vb.push_back(s.value_at_t);
    mb.push_back(s.max_level);
  }
  if (da.empty() || db.empty()) throw InvalidArgument("compare_laws needs two nonempty samples");
  LawComparison out;
  out.n_a = da.size();
  out.n_b = db.size();
  auto add = [&](const char* name, const std::vector<double>& x, const std::vector<double>& y) {
    FunctionalComparison f;
    f.functional = name;
    CompensatedSum sx, sy;
    for (double e : x) sx.add(e);
    for (double e : y) sy.add(e);
    f.mean_a = sx.value() / static_cast<double>(x.size());
    f.mean_b = sy.value() / static_cast<double>(y.size());
    f.ks_statistic = ks_two_sample_statistic(x, y);
    f.p_value = ks_two_sample(x, y);
    out.functionals.push_back(f);
  };
  add("duration", da, db);
  add("value_at_t", va, vb);
  add("max_level", ma, mb);
  return out;
}

std::vector<EpsStudyRow> sde_eps_study(const ModelSpec& spec, double dt,
                                       const std::vector<double>& eps_values, std::size_t n_paths,
                                       std::uint64_t seed) {
  std::vector<EpsStudyRow> rows;
  for (double eps : eps_values) {
    std::vector<double> d;
    d.reserve(n_paths);
    SdeOptions o;
    o.dt = dt;
    o.eps0 = eps;
    for (std::size_t i = 0; i < n_paths; ++i) {
      // Same streams for every eps, so the rows differ only through eps.
      RngStream s = spawn_stream(seed, i);
      const auto p = integrate_coth_sde(s, spec, o);
      if (!p.censored) d.push_back(p.hit_time);
    }
    EpsStudyRow row{eps, estimate_mean(d)};
    row.duration.name = "duration";
    rows.push_back(row);
  }
  return rows;
}

double qt_cdf(double t, double x, double y, const ModelSpec& spec) {
  if (!(y > 0.0)) return 0.0;
  auto f = [&](double z) { return z > 0.0 ? qt_density(t, x, z, spec) : 0.0; };
  using boost::math::quadrature::gauss_kronrod;
  // Split at the start point, where the density peaks for small t.
  const double mid = std::min(x, y);
  double total = gauss_kronrod<double, 61>::integrate(f, 0.0, mid, 15, 1e-12);
  if (y > mid) total += gauss_kronrod<double, 61>::integrate(f, mid, y, 15, 1e-12);
  return total;
}

ChiSquareResult qt_chi_square(std::span<const double> sample, double t, double x,
                              const ModelSpec& spec, std::size_t bins) {
  if (bins < 2) throw InvalidArgument("need at least two bins");
  if (sample.empty()) throw InvalidArgument("empty sample");
  // Equal-probability cell edges: a cumulative table on a fine mesh, then
  // bisection inside the mesh cell that holds each target.
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double z) { return z > 0.0 ? qt_density(t, x, z, spec) : 0.0; };
  const double upper = x + std::abs(spec.mu) * t + 15.0 * std::sqrt(t) + 1.0;
  constexpr std::size_t kMesh = 4000;
  const double width = upper / kMesh;
  std::vector<double> cum(kMesh + 1, 0.0);
  for (std::size_t i = 0; i < kMesh; ++i)
    cum[i + 1] = cum[i] + gauss_kronrod<double, 31>::integrate(f, i * width, (i + 1) * width, 5, 1e-13);
  std::vector<double> edges;
  for (std::size_t i = 1; i < bins; ++i) {
    const double target = cum[kMesh] * static_cast<double>(i) / static_cast<double>(bins);
    const auto cell = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()) - 1;
    const double a = static_cast<double>(cell) * width;
    double lo = a;
    double hi = a + width;
    for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
      const double m = 0.5 * (lo + hi);
      const double c = cum[cell] + gauss_kronrod<double, 31>::integrate(f, a, m, 5, 1e-13);
      (c < target ? lo : hi) = m;
    }
    edges.push_back(0.5 * (lo + hi));
  }
  std::vector<double> observed(bins, 0.0);
  for (double v : sample) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    observed[static_cast<std::size_t>(it - edges.begin())] += 1.0;
  }
  const std::vector<double> expected(bins, static_cast<double>(sample.size()) / static_cast<double>(bins));
  return chi_square(observed, expected);
}

}  // namespace hslopes
