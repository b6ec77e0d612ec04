#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "jclr/shortest_path.hpp"
#include "jclr/types.hpp"

namespace jclr {

/// Per-trajectory relevance weights over all segments. weights[s] is the
/// clamped detour ratio |tau| / (|tau'| + D(s, tau)), or exactly 0 when the
/// segment is unreachable or the value falls below the threshold.
struct RSTWeightVector {
  std::string trajectory_id;
  std::vector<double> weights;
};

/// Memoizes single-source hop fields keyed by trajectory endpoints. Build the
/// cache once per network; `warm` precomputes fields for a corpus (optionally
/// in parallel), after which lookups are read-only and thread-safe.
class HopCache {
 public:
  explicit HopCache(const RoadNetwork& network) : network_(network) {}

  const std::vector<std::uint32_t>& from(SegmentId source);
  const std::vector<std::uint32_t>& to(SegmentId target);

  /// Precomputes forward fields for all origins and reverse fields for all
  /// destinations appearing in the corpus.
  void warm(const TrajectoryCorpus& corpus, unsigned num_threads = 1);

 private:
  const RoadNetwork& network_;
  std::unordered_map<SegmentId, std::vector<std::uint32_t>> from_;
  std::unordered_map<SegmentId, std::vector<std::uint32_t>> to_;
};

/// Weight vector for one trajectory. Requires a nonempty trajectory and
/// 0 <= threshold < 1.
RSTWeightVector rst_weight_vector(const RoadNetwork& network,
                                  const Trajectory& traj, double threshold);
RSTWeightVector rst_weight_vector(const RoadNetwork& network,
                                  const Trajectory& traj, double threshold,
                                  HopCache& cache);

/// One weight vector per corpus trajectory, in corpus order. Deterministic
/// for any thread count; trajectories are independent computations over the
/// shared read-only network.
std::vector<RSTWeightVector> rst_weights_for_corpus(
    const RoadNetwork& network, const TrajectoryCorpus& corpus,
    double threshold, unsigned num_threads = 1);

}  // namespace jclr
