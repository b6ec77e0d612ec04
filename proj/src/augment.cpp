#include "jclr/augment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <unordered_set>

namespace jclr {

namespace {

constexpr SegmentId kNoParent = std::numeric_limits<SegmentId>::max();

/// Shortest directed path from -> to avoiding `removed`; returns the interior
/// segments (both endpoints excluded), or nullopt when no path exists.
std::optional<std::vector<SegmentId>> alternative_interior(
    const RoadNetwork& network, SegmentId from, SegmentId to,
    const std::unordered_set<SegmentId>& removed) {
  std::vector<SegmentId> parent(network.size(), kNoParent);
  std::deque<SegmentId> queue;
  parent[from] = from;
  queue.push_back(from);
  while (!queue.empty()) {
    const SegmentId u = queue.front();
    queue.pop_front();
    if (u == to) break;
    for (SegmentId v : network.out_neighbors(u)) {
      if (parent[v] != kNoParent || removed.contains(v)) continue;
      parent[v] = u;
      queue.push_back(v);
    }
  }
  if (parent[to] == kNoParent) return std::nullopt;
  std::vector<SegmentId> interior;
  for (SegmentId v = parent[to]; v != from; v = parent[v]) interior.push_back(v);
  std::reverse(interior.begin(), interior.end());
  return interior;
}

}  // namespace

void AugmentConfig::validate() const {
  if (!(detour_frac > 0.0 && detour_frac < 1.0)) {
    throw ValidationError(cat("detour_frac ", detour_frac, " outside (0,1)"));
  }
  if (mask_prob < 0.0 || mask_prob > 1.0 || replace_prob < 0.0 ||
      replace_prob > 1.0) {
    throw ValidationError("mask_prob/replace_prob outside [0,1]");
  }
}

DetourResult detour(const RoadNetwork& network, const Trajectory& traj,
                    const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t n = traj.length();
  if (n < 3) return {traj, false};

  std::size_t window = static_cast<std::size_t>(
      std::llround(cfg.detour_frac * static_cast<double>(n)));
  window = std::clamp<std::size_t>(window, 1, n - 2);
  const std::size_t start = 1 + uniform_index(rng, n - 1 - window);  // in [1, n-1-window]
  const SegmentId left = traj.segments[start - 1];
  const SegmentId right = traj.segments[start + window];

  std::unordered_set<SegmentId> removed(traj.segments.begin() + start,
                                        traj.segments.begin() + start + window);
  removed.erase(left);
  removed.erase(right);

  auto interior = alternative_interior(network, left, right, removed);
  if (!interior) return {traj, false};

  Trajectory out;
  out.id = traj.id;
  out.segments.assign(traj.segments.begin(), traj.segments.begin() + start);
  out.segments.insert(out.segments.end(), interior->begin(), interior->end());
  out.segments.insert(out.segments.end(), traj.segments.begin() + start + window,
                      traj.segments.end());
  return {std::move(out), true};
}

Trajectory mask_segments(const Trajectory& traj, const AugmentConfig& cfg,
                         Rng& rng) {
  cfg.validate();
  const std::size_t n = traj.length();
  if (n < 3) return traj;
  Trajectory out;
  out.id = traj.id;
  out.segments.reserve(n);
  out.segments.push_back(traj.segments.front());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (uniform01(rng) >= cfg.mask_prob) out.segments.push_back(traj.segments[i]);
  }
  out.segments.push_back(traj.segments.back());
  return out;
}

Trajectory replace_segments(const RoadNetwork& network, const Trajectory& traj,
                            const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t n = traj.length();
  if (n < 3) return traj;
  Trajectory out;
  out.id = traj.id;
  out.segments = traj.segments;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (uniform01(rng) >= cfg.replace_prob) continue;
    const auto nbrs = network.out_neighbors(traj.segments[i]);
    if (nbrs.empty()) continue;
    out.segments[i] = nbrs[uniform_index(rng, nbrs.size())];
  }
  return out;
}

Trajectory noisy_view(const RoadNetwork& network, const Trajectory& traj,
                      const AugmentConfig& cfg, Rng& rng) {
  switch (uniform_index(rng, 3)) {
    case 0:
      return detour(network, traj, cfg, rng).trajectory;
    case 1:
      return mask_segments(traj, cfg, rng);
    default:
      return replace_segments(network, traj, cfg, rng);
  }
}

}  // namespace jclr
