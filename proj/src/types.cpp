#include "jclr/types.hpp"

#include <algorithm>


namespace jclr {

RoadNetwork::RoadNetwork(std::vector<SegmentMeta> segments,
                         const std::vector<std::pair<SegmentId, SegmentId>>& edges)
    : segments_(std::move(segments)) {
  const std::size_t n = segments_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (segments_[i].id != static_cast<SegmentId>(i)) {
      throw ValidationError(cat("segment ids must be contiguous 0..", n == 0 ? 0 : n - 1,
              ": position ", i, " holds id ", segments_[i].id));
    }
    if (segments_[i].length_m < 0.0) {
      throw ValidationError(
          cat("segment ", segments_[i].id, " has negative length"));
    }
  }

  auto sorted = edges;
  for (const auto& [from, to] : sorted) {
    if (from >= n || to >= n) {
      throw ValidationError(cat("edge (", from, ", ", to, ") references unknown segment id ",
              std::max(from, to), " (|S| = ", n, ")"));
    }
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const auto& [from, to] : sorted) {
    ++out_offsets_[from + 1];
    ++in_offsets_[to + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }
  out_targets_.resize(sorted.size());
  in_sources_.resize(sorted.size());
  std::vector<std::uint32_t> cursor(in_offsets_.begin(), in_offsets_.end() - 1);
  std::size_t k = 0;
  for (const auto& [from, to] : sorted) {
    out_targets_[k++] = to;
    in_sources_[cursor[to]++] = from;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(in_sources_.begin() + in_offsets_[i],
              in_sources_.begin() + in_offsets_[i + 1]);
  }
}

bool RoadNetwork::has_edge(SegmentId from, SegmentId to) const {
  if (from >= size() || to >= size()) return false;
  auto nbrs = out_neighbors(from);
  return std::binary_search(nbrs.begin(), nbrs.end(), to);
}

std::vector<std::pair<SegmentId, SegmentId>> RoadNetwork::edges() const {
  std::vector<std::pair<SegmentId, SegmentId>> result;
  result.reserve(edge_count());
  for (SegmentId i = 0; i < size(); ++i) {
    for (SegmentId j : out_neighbors(i)) result.emplace_back(i, j);
  }
  return result;
}

void validate_trajectory(const Trajectory& traj, const RoadNetwork& network) {
  if (traj.segments.empty()) {
    throw ValidationError(
        cat("trajectory '", traj.id, "' has no segments"));
  }
  for (SegmentId s : traj.segments) {
    if (!network.contains(s)) {
      throw ValidationError(cat("trajectory '", traj.id, "' references unknown segment id ", s));
    }
  }
  if (!traj.timestamps.empty()) {
    if (traj.timestamps.size() != traj.segments.size()) {
      throw ValidationError(cat("trajectory '", traj.id, "': ", traj.timestamps.size(),
              " timestamps for ", traj.segments.size(), " segments"));
    }
    for (std::size_t i = 1; i < traj.timestamps.size(); ++i) {
      if (traj.timestamps[i] < traj.timestamps[i - 1]) {
        throw ValidationError(cat("trajectory '", traj.id, "': timestamps decrease at position ", i));
      }
    }
  }
}

TrajectoryCorpus filter_trajectories(const TrajectoryCorpus& corpus) {
  TrajectoryCorpus kept;
  kept.trajectories.reserve(corpus.trajectories.size());
  for (const Trajectory& traj : corpus.trajectories) {
    if (traj.length() < 3) continue;
    if (traj.has_timestamps() && traj.duration() < 60.0) continue;
    kept.trajectories.push_back(traj);
  }
  return kept;
}

}  // namespace jclr
