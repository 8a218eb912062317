#include "hslopes/palm.hpp"

#include <algorithm>
#include <cmath>

#include "hslopes/error.hpp"
#include "hslopes/formulas.hpp"
#include "parallel.hpp"

namespace hslopes {

namespace {

struct BlockPair {
  RiseBlock rise;  // B, drift -mu: its minimum and the climb after it
  RiseBlock fall;  // -B', drift +mu: the maximum of B' and the drop after it
};

BlockPair simulate_pair(RngStream& stream, const ModelSpec& spec, double dt) {
  BlockPair p;
  p.rise = simulate_rise(stream, -spec.mu, spec.h, dt);
  p.fall = simulate_rise(stream, spec.mu, spec.h, dt);
  return p;
}

SlopeRecord slope_from(const BlockPair& p, Direction d, double h) {
  SlopeRecord s;
  s.direction = d;
  if (d == Direction::Up) {
    s.length = (p.rise.tau - p.rise.sigma) + p.fall.sigma;
    s.excess = -p.fall.extreme;
  } else {
    s.length = (p.fall.tau - p.fall.sigma) + p.rise.sigma;
    s.excess = -p.rise.extreme;
  }
  s.height = h + s.excess;
  return s;
}

EstimatorReport mean_or_empty(const std::vector<double>& v, const char* name) {
  EstimatorReport r;
  if (v.size() >= 2) r = estimate_mean(v);
  r.n = v.size();
  r.name = name;
  return r;
}

}  // namespace

void MarkedSequence::validate() const {
  if (marks.empty() || points.size() != marks.size() + 1)
    throw InvalidArgument("a marked sequence needs one more point than marks");
  if (origin >= marks.size()) throw InvalidArgument("origin index out of range");
  for (std::size_t i = 0; i < marks.size(); ++i) {
    const double gap = points[i + 1] - points[i];
    if (std::abs(gap - marks[i].length) > 1e-9 * std::max(1.0, marks[i].length))
      throw InvalidArgument("point gap differs from slope length at mark " + std::to_string(i));
    if (i > 0 && marks[i].direction == marks[i - 1].direction)
      throw InvalidArgument("slope directions do not alternate at mark " + std::to_string(i));
  }
  if (!(points[origin] <= 0.0 && points[origin + 1] > 0.0))
    throw InvalidArgument("origin mark does not cover 0");
}

RiseBlock simulate_rise(RngStream& stream, double drift, double h, double dt) {
  if (!(h > 0.0)) throw InvalidArgument("h must be positive");
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  const double step_mean = drift * dt;
  const double sd = std::sqrt(dt);
  double y = 0.0;
  RiseBlock b;
  for (std::size_t k = 1;; ++k) {
    y += step_mean + sd * stream.normal();
    if (y <= b.extreme) {
      b.extreme = y;
      b.sigma = static_cast<double>(k) * dt;
    } else if (y >= b.extreme + h) {
      b.tau = static_cast<double>(k) * dt;
      return b;
    }
  }
}

SlopeRecord sample_slope(RngStream& stream, const ModelSpec& spec, double dt, Direction d) {
  spec.require_nonzero_drift();
  return slope_from(simulate_pair(stream, spec, dt), d, spec.h);
}

MarkedSequence sample_palm(RngStream& stream, const ModelSpec& spec, double dt,
                           std::size_t n_slopes) {
  if (n_slopes < 2) throw InvalidArgument("n_slopes must be at least 2");
  spec.require_nonzero_drift();
  MarkedSequence seq;
  Direction d = stream.uniform() < 0.5 ? Direction::Up : Direction::Down;
  seq.points.push_back(0.0);
  for (std::size_t i = 0; i < n_slopes; ++i) {
    seq.marks.push_back(sample_slope(stream, spec, dt, d));
    seq.points.push_back(seq.points.back() + seq.marks.back().length);
    d = opposite(d);
  }
  return seq;
}

SlopePool::SlopePool(std::vector<SlopeRecord> up, std::vector<SlopeRecord> down)
    : up_(std::move(up)), down_(std::move(down)) {
  if (up_.empty() || down_.empty()) throw InvalidArgument("slope pool needs both directions");
  up_side_ = index(up_);
  down_side_ = index(down_);
}

SlopePool::Side SlopePool::index(const std::vector<SlopeRecord>& v) {
  Side s;
  CompensatedSum sum, sum_sq;
  for (const auto& r : v) {
    sum.add(r.length);
    sum_sq.add(r.length * r.length);
    s.cum_length.push_back(sum.value());
    s.sorted_length.push_back(r.length);
  }
  s.sum = sum.value();
  s.sum_sq = sum_sq.value();
  std::sort(s.sorted_length.begin(), s.sorted_length.end());
  CompensatedSum run;
  for (double l : s.sorted_length) {
    run.add(l);
    s.sorted_prefix.push_back(run.value());
  }
  return s;
}

double SlopePool::mean_length(Direction d) const {
  return side(d).sum / static_cast<double>(slopes(d).size());
}

double SlopePool::mean_square_length(Direction d) const {
  return side(d).sum_sq / static_cast<double>(slopes(d).size());
}

double SlopePool::cover_probability(Direction d) const {
  const double up = mean_length(Direction::Up);
  const double down = mean_length(Direction::Down);
  return (d == Direction::Up ? up : down) / (up + down);
}

std::size_t SlopePool::length_biased_index(Direction d, double u) const {
  const auto& cum = side(d).cum_length;
  const auto it = std::upper_bound(cum.begin(), cum.end(), u * cum.back());
  return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
}

double SlopePool::x1_cdf(Direction d, double x) const {
  if (x <= 0.0) return 0.0;
  const Side& s = side(d);
  // sum of min(l, x) = (sum of l below x) + x * (count at or above x)
  const auto k = static_cast<std::size_t>(
      std::lower_bound(s.sorted_length.begin(), s.sorted_length.end(), x) - s.sorted_length.begin());
  const double below = k ? s.sorted_prefix[k - 1] : 0.0;
  return std::min(1.0, (below + x * static_cast<double>(s.sorted_length.size() - k)) / s.sum);
}

SlopePool build_pool(const ModelSpec& spec, double dt, std::size_t size, std::uint64_t seed,
                     unsigned threads) {
  spec.require_nonzero_drift();
  if (size < 2) throw InvalidArgument("pool size must be at least 2");
  std::vector<BlockPair> pairs(size);
  detail::parallel_for(size, threads, [&](std::size_t i) {
    RngStream s = spawn_stream(seed, i);
    pairs[i] = simulate_pair(s, spec, dt);
  });
  std::vector<SlopeRecord> up, down;
  up.reserve(size);
  down.reserve(size);
  for (const auto& p : pairs) {
    up.push_back(slope_from(p, Direction::Up, spec.h));
    down.push_back(slope_from(p, Direction::Down, spec.h));
  }
  return SlopePool(std::move(up), std::move(down));
}

MarkedSequence sample_stationary(RngStream& stream, const SlopePool& pool, std::size_t per_side) {
  const Direction d0 =
      stream.uniform() < pool.cover_probability(Direction::Up) ? Direction::Up : Direction::Down;
  const SlopeRecord cover = pool.slopes(d0)[pool.length_biased_index(d0, stream.uniform())];
  auto uniform_pick = [&](Direction d) {
    const auto& v = pool.slopes(d);
    const auto i = static_cast<std::size_t>(stream.uniform() * static_cast<double>(v.size()));
    return v[std::min(i, v.size() - 1)];
  };

  std::vector<SlopeRecord> left;
  Direction d = opposite(d0);
  for (std::size_t i = 0; i < per_side; ++i, d = opposite(d)) left.push_back(uniform_pick(d));
  std::vector<SlopeRecord> right;
  d = opposite(d0);
  for (std::size_t i = 0; i < per_side; ++i, d = opposite(d)) right.push_back(uniform_pick(d));

  MarkedSequence seq;
  seq.marks.assign(left.rbegin(), left.rend());
  seq.origin = seq.marks.size();
  seq.marks.push_back(cover);
  seq.marks.insert(seq.marks.end(), right.begin(), right.end());

  // 1 - U lies in (0, 1), so 0 is strictly before the end of the slope.
  const double x0 = -stream.uniform() * cover.length;
  seq.points.assign(seq.marks.size() + 1, 0.0);
  seq.points[seq.origin] = x0;
  for (std::size_t i = seq.origin; i > 0; --i) seq.points[i - 1] = seq.points[i] - seq.marks[i - 1].length;
  for (std::size_t i = seq.origin; i < seq.marks.size(); ++i)
    seq.points[i + 1] = seq.points[i] + seq.marks[i].length;
  return seq;
}

MarkedSequence from_slope_sequence(const SlopeSequence& seq) {
  if (seq.extrema.size() < 2) throw InvalidArgument("a slope needs two extrema");
  MarkedSequence out;
  for (const auto& e : seq.extrema) out.points.push_back(e.time);
  for (const auto& s : seq.slopes()) out.marks.push_back(record_of(s));
  out.origin = seq.origin;
  return out;
}

std::vector<MarkedSequence> sample_direct(const ModelSpec& spec, double dt, std::size_t replicas,
                                          std::uint64_t seed, unsigned threads) {
  spec.require_nonzero_drift();
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  const double horizon = 3.0 * slope_moments(spec).mean_cycle;
  std::vector<MarkedSequence> out(replicas);
  detail::parallel_for(replicas, threads, [&](std::size_t r) {
    TwoSidedGenerator gen(spawn_stream(seed, r), spec, dt);
    TwoSidedPath path = gen.generate(horizon);
    const std::size_t grow = std::max<std::size_t>(path.positive_half.size() / 2, 16);
    for (;;) {
      try {
        out[r] = from_slope_sequence(center(path, spec.h, 2));
        return;
      } catch (const HorizonTooShort&) {
        gen.extend_negative(path, grow);
        gen.extend_positive(path, grow);
      }
    }
  });
  return out;
}

CoveringStats covering_statistics(std::span<const MarkedSequence> sequences, double histogram_width) {
  if (sequences.empty()) throw InvalidArgument("no sequences to summarise");
  if (!(histogram_width > 0.0)) throw InvalidArgument("histogram width must be positive");
  CoveringStats st;
  st.n = sequences.size();
  std::vector<double> len_up, len_down, x1_up, x1_down;
  st.x1_histogram.width = histogram_width;
  for (const auto& s : sequences) {
    const bool up = s.origin_kind() == Direction::Up;
    const double x1 = s.x1();
    st.n_up += up;
    st.x1.push_back(x1);
    (up ? len_up : len_down).push_back(s.marks[s.origin].length);
    (up ? x1_up : x1_down).push_back(x1);
    const auto bin = static_cast<std::size_t>(x1 / histogram_width);
    if (bin >= st.x1_histogram.counts.size()) st.x1_histogram.counts.resize(bin + 1, 0);
    ++st.x1_histogram.counts[bin];
  }
  st.freq_up = static_cast<double>(st.n_up) / static_cast<double>(st.n);
  st.freq_down = static_cast<double>(st.n - st.n_up) / static_cast<double>(st.n);
  st.len_gamma0_up = mean_or_empty(len_up, "len_gamma0_up");
  st.len_gamma0_down = mean_or_empty(len_down, "len_gamma0_down");
  st.x1_up = mean_or_empty(x1_up, "x1_up");
  st.x1_down = mean_or_empty(x1_down, "x1_down");
  return st;
}

PalmComparison compare_constructions(const std::vector<MarkedSequence>& direct,
                                     const std::vector<MarkedSequence>& stationary,
                                     const SlopePool& pool, const ModelSpec& spec) {
  PalmComparison c;
  c.direct = covering_statistics(direct);
  c.stationary = covering_statistics(stationary);
  const auto m = slope_moments(spec);
  c.oracle_cover_up = m.prob_cover_up;
  c.freq_z = two_proportion_z(c.direct.n_up, c.direct.n, c.stationary.n_up, c.stationary.n);
  c.x1_ks_p = ks_two_sample(c.direct.x1, c.stationary.x1);

  const auto& du = c.direct.len_gamma0_up;
  if (du.std_error > 0.0) c.length_bias_z_direct = (du.estimate - m.mean_len_up) / du.std_error;
  const auto& su = c.stationary.len_gamma0_up;
  const double n_pool = static_cast<double>(pool.slopes(Direction::Up).size());
  const double pool_mean = pool.mean_length(Direction::Up);
  const double pool_var = (pool.mean_square_length(Direction::Up) - pool_mean * pool_mean) / n_pool;
  const double se = std::sqrt(su.std_error * su.std_error + pool_var);
  if (se > 0.0) c.length_bias_z_stationary = (su.estimate - pool_mean) / se;
  return c;
}

}  // namespace hslopes
