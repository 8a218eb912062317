#include "hslopes/paths.hpp"

#include <algorithm>
#include <cmath>

#include "hslopes/error.hpp"

namespace hslopes {

void ModelSpec::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("threshold h must be positive");
  if (!std::isfinite(mu)) throw InvalidArgument("drift mu must be finite");
}

void ModelSpec::require_nonzero_drift() const {
  validate();
  if (mu == 0.0) throw Unsupported("closed-form laws require mu != 0");
}

SampledPath TwoSidedPath::concatenated() const {
  SampledPath out;
  out.dt = positive_half.dt;
  const std::size_t n_neg = negative_half.size();
  out.t0 = -static_cast<double>(n_neg - 1) * out.dt;
  out.values.reserve(n_neg + positive_half.size() - 1);
  out.values.assign(negative_half.values.rbegin(), negative_half.values.rend());
  out.values.insert(out.values.end(), positive_half.values.begin() + 1,
                    positive_half.values.end());
  return out;
}

void extend_path(SampledPath& path, RngStream& stream, double drift, std::size_t n_steps) {
  if (path.values.empty()) throw InvalidArgument("cannot extend an empty path");
  const double mean = drift * path.dt;
  const double sd = std::sqrt(path.dt);
  path.values.reserve(path.values.size() + n_steps);
  double level = path.values.back();
  for (std::size_t k = 0; k < n_steps; ++k) {
    level += mean + sd * stream.normal();
    path.values.push_back(level);
  }
}

SampledPath generate_one_sided(RngStream& stream, const ModelSpec& spec, double dt,
                               std::size_t n_steps, double start_level) {
  spec.validate();
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (n_steps == 0) throw InvalidArgument("n_steps must be at least 1");
  SampledPath path{0.0, dt, {start_level}};
  extend_path(path, stream, -spec.mu, n_steps);
  return path;
}

TwoSidedGenerator::TwoSidedGenerator(const RngStream& stream, const ModelSpec& spec, double dt)
    : spec_(spec), dt_(dt), positive_(stream.child(0)), negative_(stream.child(1)) {
  spec.validate();
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
}

TwoSidedPath TwoSidedGenerator::generate(double horizon) {
  if (!(horizon >= dt_)) throw InvalidArgument("horizon must be at least dt");
  const auto n = static_cast<std::size_t>(std::floor(horizon / dt_ + 1e-9));
  TwoSidedPath path;
  path.positive_half = SampledPath{0.0, dt_, {0.0}};
  path.negative_half = SampledPath{0.0, dt_, {0.0}};
  extend_path(path.positive_half, positive_, -spec_.mu, n);
  extend_path(path.negative_half, negative_, spec_.mu, n);
  return path;
}

void TwoSidedGenerator::extend_positive(TwoSidedPath& path, std::size_t n_steps) {
  extend_path(path.positive_half, positive_, -spec_.mu, n_steps);
}

void TwoSidedGenerator::extend_negative(TwoSidedPath& path, std::size_t n_steps) {
  extend_path(path.negative_half, negative_, spec_.mu, n_steps);
}

TwoSidedPath generate_two_sided(const RngStream& stream, const ModelSpec& spec, double dt,
                                double horizon) {
  TwoSidedGenerator gen(stream, spec, dt);
  return gen.generate(horizon);
}

SampledPath refine_midpoints(const SampledPath& path, RngStream& stream) {
  if (path.size() < 2) return path;
  SampledPath out{path.t0, path.dt / 2.0, {}};
  out.values.reserve(2 * path.size() - 1);
  // Bridge midpoint of BM over a step dt: mean of the endpoints, variance dt/4,
  // independent of the drift.
  const double sd = std::sqrt(path.dt) / 2.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    out.values.push_back(path.values[k]);
    out.values.push_back(0.5 * (path.values[k] + path.values[k + 1]) + sd * stream.normal());
  }
  out.values.push_back(path.values.back());
  return out;
}

}  // namespace hslopes
