#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hslopes/paths.hpp"

namespace hslopes {

enum class ExtremumKind { Min, Max };
enum class Direction { Up, Down };

/// Which crossing the first sweep waits for. SeekMax tracks the running
/// minimum and waits for a rise of h; SeekMin is the mirror image. Auto picks
/// whichever crossing happens first, which is what a generic series needs.
enum class SweepMode { SeekMax, SeekMin, Auto };

const char* to_string(ExtremumKind kind) noexcept;
const char* to_string(Direction dir) noexcept;

inline Direction opposite(Direction d) noexcept {
  return d == Direction::Up ? Direction::Down : Direction::Up;
}

struct HExtremum {
  std::size_t grid_index = 0;
  double time = 0.0;
  double level = 0.0;
  ExtremumKind kind = ExtremumKind::Min;

  bool operator==(const HExtremum&) const = default;
};

/// One completed sweep: `tau` is the crossing index, `sigma` the last index in
/// the sweep window attaining the extremal level `beta`.
struct SweepRecord {
  std::size_t tau = 0;
  double beta = 0.0;
  std::size_t sigma = 0;
  ExtremumKind kind = ExtremumKind::Min;

  bool operator==(const SweepRecord&) const = default;
};

/// The inductive tau/beta/sigma construction on grid values.
///
/// Each window starts at the previous crossing (inclusive). The first record
/// is anchored at the start of the series and is not in general an
/// h-extremum; every later sigma is. A trailing sweep that never crosses is
/// dropped.
std::vector<SweepRecord> sweep(std::span<const double> values, double h, SweepMode mode);
std::vector<SweepRecord> sweep(const SampledPath& path, double h, SweepMode mode);

/// Constant-memory version of `sweep`. Feed points in increasing time; each
/// push returns the extremum confirmed by that point, if any. The output
/// matches `sweep` with the same mode, first record included.
class StreamingDetector {
 public:
  explicit StreamingDetector(double h, SweepMode mode = SweepMode::Auto);

  std::optional<HExtremum> push(double t, double value);
  std::size_t count() const noexcept { return count_; }

 private:
  struct Candidate {
    double level;
    double time;
    std::size_t index;
  };

  double h_;
  SweepMode mode_;
  std::size_t count_ = 0;
  double last_time_ = 0.0;
  // Auto uses both; the fixed modes use only the one they track.
  Candidate low_{};
  Candidate high_{};
};

std::vector<HExtremum> detect_stream(std::span<const std::pair<double, double>> series, double h,
                                     SweepMode mode = SweepMode::Auto);

/// Grid check of the h-extremum definition at `index`: there are witnesses
/// u < index < v, h away in level, with the path never beyond the candidate
/// level in between.
bool is_h_extremum(std::span<const double> values, std::size_t index, ExtremumKind kind,
                   double h);

struct Slope {
  HExtremum start;
  HExtremum end;
  Direction direction = Direction::Up;
  double length = 0.0;
  double height = 0.0;
  double excess = 0.0;

  std::span<const double> window(const SampledPath& path) const {
    return path.window(start.grid_index, end.grid_index);
  }
};

Slope make_slope(const HExtremum& start, const HExtremum& end, double h);

/// h-extrema of a two-sided path, indexed so that extrema[origin] <= 0 <
/// extrema[origin + 1] in time.
struct SlopeSequence {
  SampledPath path;
  std::size_t path_origin = 0;  // grid index of time 0 in `path`
  double h = 1.0;
  std::vector<HExtremum> extrema;
  std::size_t origin = 0;

  /// Slope i joins extrema[i] and extrema[i + 1].
  std::vector<Slope> slopes() const;
  std::size_t covering_index() const noexcept { return origin; }
  Slope covering_slope() const { return make_slope(extrema[origin], extrema[origin + 1], h); }
};

/// Extract the h-extrema of a two-sided path in a single sweep over the glued
/// trajectory. Throws HorizonTooShort unless at least `min_per_side` extrema
/// lie on each side of the origin.
SlopeSequence center(const TwoSidedPath& path, double h, std::size_t min_per_side = 2);

std::vector<Slope> slopes(const SlopeSequence& seq);

}  // namespace hslopes
