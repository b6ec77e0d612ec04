#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jclr/util.hpp"

namespace jclr {

using SegmentId = std::uint32_t;

/// Per-segment metadata. Labels are small road-type classes; speeds are km/h.
struct SegmentMeta {
  SegmentId id = 0;
  double length_m = 0.0;
  std::optional<int> label;
  std::optional<double> avg_speed;
};

/// Directed road-segment graph. Segments are the vertices; an edge (i, j)
/// means the end of segment i meets the start of segment j. Immutable after
/// construction and safe to share across threads.
class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(std::vector<SegmentMeta> segments,
              const std::vector<std::pair<SegmentId, SegmentId>>& edges);

  std::size_t size() const { return segments_.size(); }
  std::size_t edge_count() const { return out_targets_.size(); }

  const SegmentMeta& meta(SegmentId id) const { return segments_[id]; }
  const std::vector<SegmentMeta>& segments() const { return segments_; }

  /// Out-neighbors of `id`, sorted ascending.
  std::span<const SegmentId> out_neighbors(SegmentId id) const {
    return {out_targets_.data() + out_offsets_[id],
            out_targets_.data() + out_offsets_[id + 1]};
  }
  /// In-neighbors of `id`, sorted ascending.
  std::span<const SegmentId> in_neighbors(SegmentId id) const {
    return {in_sources_.data() + in_offsets_[id],
            in_sources_.data() + in_offsets_[id + 1]};
  }

  bool has_edge(SegmentId from, SegmentId to) const;
  bool contains(SegmentId id) const { return id < segments_.size(); }

  /// All edges as (from, to), ordered by from then to.
  std::vector<std::pair<SegmentId, SegmentId>> edges() const;

 private:
  std::vector<SegmentMeta> segments_;
  std::vector<std::uint32_t> out_offsets_;
  std::vector<SegmentId> out_targets_;
  std::vector<std::uint32_t> in_offsets_;
  std::vector<SegmentId> in_sources_;
};

/// An ordered run of consecutive road segments, optionally timestamped.
/// Timestamps are epoch seconds at the entry of each segment.
struct Trajectory {
  std::string id;
  std::vector<SegmentId> segments;
  std::vector<double> timestamps;  // empty means absent

  std::size_t length() const { return segments.size(); }
  bool has_timestamps() const { return !timestamps.empty(); }
  /// Last minus first timestamp; 0 when timestamps are absent.
  double duration() const {
    return timestamps.empty() ? 0.0 : timestamps.back() - timestamps.front();
  }
};

struct TrajectoryCorpus {
  std::vector<Trajectory> trajectories;

  std::size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }
};

/// Validates a trajectory against a network: nonempty, ids in range,
/// nondecreasing timestamps of matching length. Throws ValidationError.
void validate_trajectory(const Trajectory& traj, const RoadNetwork& network);

/// Keeps exactly the trajectories with length >= 3 and (duration >= 60 s or
/// timestamps absent). Relative order preserved; idempotent.
TrajectoryCorpus filter_trajectories(const TrajectoryCorpus& corpus);

}  // namespace jclr
