#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "havs/random.hpp"
#include "havs/samplers.hpp"

namespace havs {
namespace {

// Orders argmax candidates: larger distance first, then lexicographically
// smaller point, then smaller index.
struct Candidate {
  double dist = -std::numeric_limits<double>::infinity();
  Index index = std::numeric_limits<Index>::max();
};

inline bool beats(const Candidate& a, const Candidate& b, std::span<const Vec3> pts) noexcept {
  if (a.dist != b.dist) return a.dist > b.dist;
  if (b.index == std::numeric_limits<Index>::max()) return true;
  if (pts[a.index] != pts[b.index]) return pts[a.index] < pts[b.index];
  return a.index < b.index;
}

constexpr std::size_t kBlock = 512;

// Distance update plus argmax over [begin, end). Selected points carry -1 and
// never win unless every remaining distance is also -1. Works in L1-sized
// blocks so the tie scan rereads hot data.
inline Candidate update_range(const double* xs, const double* ys, const double* zs,
                              double* mind, std::size_t begin, std::size_t end,
                              const Vec3& p, std::span<const Vec3> pts) noexcept {
  const double px = p[0], py = p[1], pz = p[2];
  Candidate c;
  for (std::size_t b = begin; b < end; b += kBlock) {
    const std::size_t e = std::min(end, b + kBlock);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = b; j < e; ++j) {
      const double dx = xs[j] - px;
      const double dy = ys[j] - py;
      const double dz = zs[j] - pz;
      const double d = dx * dx + dy * dy + dz * dz;
      const double nd = d < mind[j] ? d : mind[j];
      mind[j] = nd;
      best = nd > best ? nd : best;
    }
    if (best < c.dist) continue;
    for (std::size_t j = b; j < e; ++j) {
      if (mind[j] == best) {
        const Candidate cand{best, static_cast<Index>(j)};
        if (beats(cand, c, pts)) c = cand;
      }
    }
  }
  return c;
}

}  // namespace

FpsState::FpsState(std::span<const Vec3> points, Index start)
    : points_(points),
      xs_(points.size()),
      ys_(points.size()),
      zs_(points.size()),
      mind_(points.size(), std::numeric_limits<double>::infinity()),
      last_(std::numeric_limits<double>::infinity()) {
  if (start >= points.size()) throw Error(ErrorCode::kOutOfRange, "fps start index out of range");
  for (std::size_t j = 0; j < points.size(); ++j) {
    xs_[j] = points[j][0];
    ys_[j] = points[j][1];
    zs_[j] = points[j][2];
  }
  selected_.push_back(start);
  mind_[start] = -1.0;
}

Index FpsState::step() {
  if (selected_.size() >= points_.size()) {
    throw Error(ErrorCode::kOutOfRange, "fps has no points left to select");
  }
  const Candidate c = update_range(xs_.data(), ys_.data(), zs_.data(), mind_.data(), 0,
                                   points_.size(), points_[selected_.back()], points_);
  selected_.push_back(c.index);
  mind_[c.index] = -1.0;
  last_ = std::sqrt(c.dist);
  return c.index;
}

double FpsState::dist_to_set(std::size_t j) const noexcept {
  if (mind_[j] < 0.0) return 0.0;
  // mind_ lags one pick behind; fold in the newest selection here.
  const Vec3& p = points_[selected_.back()];
  const double dx = xs_[j] - p[0];
  const double dy = ys_[j] - p[1];
  const double dz = zs_[j] - p[2];
  return std::sqrt(std::min(mind_[j], dx * dx + dy * dy + dz * dz));
}

FpsTrace fps_trace(std::span<const Vec3> points, std::size_t m, FpsStart start,
                   std::uint64_t seed, int threads) {
  const std::size_t n = points.size();
  if (m == 0 || m > n) {
    throw Error(ErrorCode::kOutOfRange, "fps sample count " + std::to_string(m) +
                                            " outside [1, " + std::to_string(n) + "]");
  }
  Index current = 0;
  if (start == FpsStart::kRandom) {
    Rng rng(seed, 0x465053);
    current = static_cast<Index>(rng.below(n));
  }

  FpsTrace trace;
  trace.selected.reserve(m);
  trace.selection_dist.reserve(m);
  threads = std::max(1, threads);
  if (threads == 1 || n < 4096) {
    FpsState state(points, current);
    trace.selection_dist.push_back(state.last_distance());
    for (std::size_t it = 1; it < m; ++it) {
      state.step();
      trace.selection_dist.push_back(state.last_distance());
    }
    trace.selected = state.selected();
    return trace;
  }

  std::vector<double> xs(n), ys(n), zs(n);
  for (std::size_t j = 0; j < n; ++j) {
    xs[j] = points[j][0];
    ys[j] = points[j][1];
    zs[j] = points[j][2];
  }
  std::vector<double> mind(n, std::numeric_limits<double>::infinity());
  trace.selected.push_back(current);
  trace.selection_dist.push_back(std::numeric_limits<double>::infinity());
  mind[current] = -1.0;

  Candidate shared;
#pragma omp parallel num_threads(threads)
  {
    const auto nt = static_cast<std::size_t>(omp_get_num_threads());
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t chunk = (n + nt - 1) / nt;
    const std::size_t begin = std::min(n, tid * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    for (std::size_t it = 1; it < m; ++it) {
      const Candidate local = update_range(xs.data(), ys.data(), zs.data(), mind.data(), begin,
                                           end, points[current], points);
#pragma omp critical(havs_fps_merge)
      {
        if (local.index != std::numeric_limits<Index>::max() && beats(local, shared, points)) {
          shared = local;
        }
      }
#pragma omp barrier
#pragma omp single
      {
        current = shared.index;
        trace.selected.push_back(current);
        trace.selection_dist.push_back(std::sqrt(shared.dist));
        mind[current] = -1.0;
        shared = Candidate{};
      }
    }
  }
  return trace;
}

SampleOutput fps(const PointCloud& cloud, std::size_t m, FpsStart start, std::uint64_t seed,
                 int threads) {
  FpsTrace trace = fps_trace(cloud.points(), m, start, seed, threads);
  SampleOutput out;
  out.method = "fps";
  out.points.reserve(m);
  for (Index i : trace.selected) out.points.push_back(cloud[i]);
  out.indices = std::move(trace.selected);
  out.layer_of.assign(m, 1);
  return out;
}

}  // namespace havs
