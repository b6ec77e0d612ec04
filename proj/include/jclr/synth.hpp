#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jclr/types.hpp"

namespace jclr {

/// Grid-city generator configuration. Each undirected street yields two
/// directed segments; road-type classes are assigned by row/column bands so
/// labels correlate with topology.
struct CityConfig {
  int grid_rows = 8;
  int grid_cols = 8;
  int num_road_types = 5;
  std::vector<double> speed_by_type;  // km/h per class; defaulted when empty
  int num_trajectories = 2000;
  std::string od_policy = "far";  // "far" or "uniform"
  double route_noise = 0.1;
  std::uint64_t seed = 7;

  void validate() const;
  std::vector<double> effective_speeds() const;
};

/// Deterministic directed grid network with labels, lengths and speeds.
RoadNetwork generate_network(const CityConfig& cfg);

/// Shortest-path trips between sampled OD nodes, perturbed per step with
/// probability route_noise, timestamped from per-segment travel times. Every
/// returned trajectory passes filter_trajectories.
TrajectoryCorpus generate_trajectories(const RoadNetwork& network,
                                       const CityConfig& cfg);

}  // namespace jclr
