#include "hslopes/extrema.hpp"

#include <cmath>

#include "hslopes/error.hpp"

namespace hslopes {

const char* to_string(ExtremumKind kind) noexcept {
  return kind == ExtremumKind::Min ? "min" : "max";
}

const char* to_string(Direction dir) noexcept { return dir == Direction::Up ? "up" : "down"; }

namespace {

void check_threshold(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("threshold h must be positive");
}

// Mode of the first crossing, or nullopt if the series never moves by h.
std::optional<SweepMode> first_crossing(std::span<const double> v, double h) {
  if (v.empty()) return std::nullopt;
  double lo = v[0];
  double hi = v[0];
  for (double x : v) {
    if (x < lo) lo = x;
    if (x > hi) hi = x;
    if (x >= lo + h) return SweepMode::SeekMax;
    if (x <= hi - h) return SweepMode::SeekMin;
  }
  return std::nullopt;
}

}  // namespace

std::vector<SweepRecord> sweep(std::span<const double> v, double h, SweepMode mode) {
  check_threshold(h);
  std::vector<SweepRecord> out;
  if (mode == SweepMode::Auto) {
    const auto resolved = first_crossing(v, h);
    if (!resolved) return out;
    mode = *resolved;
  }
  bool seek_max = mode == SweepMode::SeekMax;
  const std::size_t n = v.size();
  std::size_t start = 0;
  while (start < n) {
    double ext = v[start];
    std::size_t arg = start;
    std::size_t k = start + 1;
    if (seek_max) {
      for (; k < n; ++k) {
        const double x = v[k];
        if (x <= ext) {
          ext = x;
          arg = k;
        } else if (x >= ext + h) {
          break;
        }
      }
    } else {
      for (; k < n; ++k) {
        const double x = v[k];
        if (x >= ext) {
          ext = x;
          arg = k;
        } else if (x <= ext - h) {
          break;
        }
      }
    }
    if (k >= n) break;
    out.push_back({k, ext, arg, seek_max ? ExtremumKind::Min : ExtremumKind::Max});
    start = k;
    seek_max = !seek_max;
  }
  return out;
}

std::vector<SweepRecord> sweep(const SampledPath& path, double h, SweepMode mode) {
  return sweep(std::span<const double>(path.values), h, mode);
}

StreamingDetector::StreamingDetector(double h, SweepMode mode) : h_(h), mode_(mode) {
  check_threshold(h);
}

std::optional<HExtremum> StreamingDetector::push(double t, double value) {
  if (!std::isfinite(t) || !std::isfinite(value))
    throw InvalidArgument("series contains a non-finite entry");
  if (count_ > 0 && !(t > last_time_))
    throw InvalidArgument("series time must be strictly increasing");
  const std::size_t k = count_++;
  last_time_ = t;
  const Candidate here{value, t, k};
  if (k == 0) {
    low_ = here;
    high_ = here;
    return std::nullopt;
  }

  auto confirm = [&](const Candidate& c, ExtremumKind kind) {
    return HExtremum{c.index, c.time, c.level, kind};
  };

  switch (mode_) {
    case SweepMode::Auto:
      if (value <= low_.level) low_ = here;
      if (value >= high_.level) high_ = here;
      if (value >= low_.level + h_) {
        mode_ = SweepMode::SeekMin;
        const auto out = confirm(low_, ExtremumKind::Min);
        high_ = here;
        return out;
      }
      if (value <= high_.level - h_) {
        mode_ = SweepMode::SeekMax;
        const auto out = confirm(high_, ExtremumKind::Max);
        low_ = here;
        return out;
      }
      return std::nullopt;
    case SweepMode::SeekMax:
      if (value <= low_.level) {
        low_ = here;
      } else if (value >= low_.level + h_) {
        mode_ = SweepMode::SeekMin;
        const auto out = confirm(low_, ExtremumKind::Min);
        high_ = here;
        return out;
      }
      return std::nullopt;
    case SweepMode::SeekMin:
      if (value >= high_.level) {
        high_ = here;
      } else if (value <= high_.level - h_) {
        mode_ = SweepMode::SeekMax;
        const auto out = confirm(high_, ExtremumKind::Max);
        low_ = here;
        return out;
      }
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<HExtremum> detect_stream(std::span<const std::pair<double, double>> series, double h,
                                     SweepMode mode) {
  StreamingDetector det(h, mode);
  std::vector<HExtremum> out;
  for (const auto& [t, v] : series)
    if (auto e = det.push(t, v)) out.push_back(*e);
  return out;
}

bool is_h_extremum(std::span<const double> v, std::size_t index, ExtremumKind kind, double h) {
  if (index >= v.size()) return false;
  const double x = v[index];
  // sign folds the max case onto the min case
  const double s = kind == ExtremumKind::Min ? 1.0 : -1.0;
  auto witness = [&](std::ptrdiff_t step) {
    for (auto k = static_cast<std::ptrdiff_t>(index) + step;
         k >= 0 && k < static_cast<std::ptrdiff_t>(v.size()); k += step) {
      const double d = s * (v[static_cast<std::size_t>(k)] - x);
      if (d < 0.0) return false;
      if (d >= h) return true;
    }
    return false;
  };
  return witness(-1) && witness(+1);
}

Slope make_slope(const HExtremum& start, const HExtremum& end, double h) {
  Slope s;
  s.start = start;
  s.end = end;
  s.direction = start.kind == ExtremumKind::Min ? Direction::Up : Direction::Down;
  s.length = end.time - start.time;
  s.height = std::abs(end.level - start.level);
  s.excess = s.height - h;
  return s;
}

std::vector<Slope> SlopeSequence::slopes() const {
  std::vector<Slope> out;
  if (extrema.size() < 2) return out;
  out.reserve(extrema.size() - 1);
  for (std::size_t i = 0; i + 1 < extrema.size(); ++i)
    out.push_back(make_slope(extrema[i], extrema[i + 1], h));
  return out;
}

std::vector<Slope> slopes(const SlopeSequence& seq) {
  if (seq.extrema.size() < 2) throw InvalidArgument("a slope needs two extrema");
  return seq.slopes();
}

SlopeSequence center(const TwoSidedPath& two_sided, double h, std::size_t min_per_side) {
  check_threshold(h);
  if (min_per_side == 0) throw InvalidArgument("min_per_side must be at least 1");
  SlopeSequence seq;
  seq.h = h;
  seq.path = two_sided.concatenated();
  seq.path_origin = two_sided.origin_index();

  const auto records = sweep(seq.path, h, SweepMode::Auto);
  std::size_t left = 0;
  // The first record is anchored at the left edge of the window; skip it.
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    seq.extrema.push_back({r.sigma, seq.path.time(r.sigma), r.beta, r.kind});
    if (r.sigma <= seq.path_origin) ++left;
  }
  const std::size_t right = seq.extrema.size() - left;
  if (left < min_per_side || right < min_per_side)
    throw HorizonTooShort("need " + std::to_string(min_per_side) +
                          " h-extrema on each side of the origin, found " + std::to_string(left) +
                          " and " + std::to_string(right));
  seq.origin = left - 1;
  return seq;
}

}  // namespace hslopes
