#include "jclr/rst.hpp"

#include <algorithm>
#include <thread>

namespace jclr {

const std::vector<std::uint32_t>& HopCache::from(SegmentId source) {
  auto it = from_.find(source);
  if (it == from_.end()) {
    it = from_.emplace(source, hop_distances_from(network_, source).dist).first;
  }
  return it->second;
}

const std::vector<std::uint32_t>& HopCache::to(SegmentId target) {
  auto it = to_.find(target);
  if (it == to_.end()) {
    it = to_.emplace(target, hop_distances_to(network_, target).dist).first;
  }
  return it->second;
}

void HopCache::warm(const TrajectoryCorpus& corpus, unsigned num_threads) {
  std::vector<SegmentId> origins;
  std::vector<SegmentId> destinations;
  for (const Trajectory& t : corpus.trajectories) {
    if (t.segments.empty()) continue;
    if (!from_.contains(t.segments.front())) origins.push_back(t.segments.front());
    if (!to_.contains(t.segments.back())) destinations.push_back(t.segments.back());
  }
  auto dedupe = [](std::vector<SegmentId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedupe(origins);
  dedupe(destinations);

  std::vector<std::vector<std::uint32_t>> origin_fields(origins.size());
  std::vector<std::vector<std::uint32_t>> dest_fields(destinations.size());
  auto work = [&](unsigned tid, unsigned stride) {
    for (std::size_t i = tid; i < origins.size(); i += stride) {
      origin_fields[i] = hop_distances_from(network_, origins[i]).dist;
    }
    for (std::size_t i = tid; i < destinations.size(); i += stride) {
      dest_fields[i] = hop_distances_to(network_, destinations[i]).dist;
    }
  };
  if (num_threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < num_threads; ++t) pool.emplace_back(work, t, num_threads);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < origins.size(); ++i) {
    from_.emplace(origins[i], std::move(origin_fields[i]));
  }
  for (std::size_t i = 0; i < destinations.size(); ++i) {
    to_.emplace(destinations[i], std::move(dest_fields[i]));
  }
}

namespace {

RSTWeightVector weights_impl(const RoadNetwork& network, const Trajectory& traj,
                             double threshold,
                             const std::vector<std::uint32_t>& from_origin,
                             const std::vector<std::uint32_t>& to_dest) {
  const auto tau_len = static_cast<double>(traj.length());
  const std::vector<std::uint32_t> to_traj =
      min_hops_to_set(network, traj.segments);

  RSTWeightVector result;
  result.trajectory_id = traj.id;
  result.weights.assign(network.size(), 0.0);
  for (std::size_t s = 0; s < network.size(); ++s) {
    const std::uint32_t reach = from_origin[s];
    const std::uint32_t leave = to_dest[s];
    const std::uint32_t d = to_traj[s];
    if (reach == kUnreachable || leave == kUnreachable || d == kUnreachable) {
      continue;
    }
    // |tau'| counts segments along origin->s plus s->destination with s
    // shared once between the two shortest sub-paths.
    const double detour_len = static_cast<double>(reach) + leave + 1.0;
    double w = tau_len / (detour_len + d);
    w = std::min(w, 1.0);
    if (w < threshold) continue;
    result.weights[s] = w;
  }
  return result;
}

}  // namespace

RSTWeightVector rst_weight_vector(const RoadNetwork& network,
                                  const Trajectory& traj, double threshold,
                                  HopCache& cache) {
  if (traj.segments.empty()) {
    throw ValidationError(cat("rst_weight_vector: trajectory '", traj.id,
                              "' is empty"));
  }
  if (threshold < 0.0 || threshold >= 1.0) {
    throw ValidationError(cat("rst threshold ", threshold, " outside [0,1)"));
  }
  return weights_impl(network, traj, threshold, cache.from(traj.segments.front()),
                      cache.to(traj.segments.back()));
}

RSTWeightVector rst_weight_vector(const RoadNetwork& network,
                                  const Trajectory& traj, double threshold) {
  HopCache cache(network);
  return rst_weight_vector(network, traj, threshold, cache);
}

std::vector<RSTWeightVector> rst_weights_for_corpus(const RoadNetwork& network,
                                                    const TrajectoryCorpus& corpus,
                                                    double threshold,
                                                    unsigned num_threads) {
  HopCache cache(network);
  cache.warm(corpus, num_threads);

  std::vector<RSTWeightVector> result(corpus.size());
  auto work = [&](unsigned tid, unsigned stride) {
    for (std::size_t i = tid; i < corpus.size(); i += stride) {
      result[i] = rst_weight_vector(network, corpus.trajectories[i], threshold,
                                    cache);
    }
  };
  if (num_threads <= 1 || corpus.size() < 2) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < num_threads; ++t) pool.emplace_back(work, t, num_threads);
    for (auto& t : pool) t.join();
  }
  return result;
}

}  // namespace jclr
