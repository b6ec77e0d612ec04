#include <doctest.h>

#include <set>

#include "jclr/shortest_path.hpp"
#include "jclr/synth.hpp"
#include "jclr/transition.hpp"
#include "support.hpp"

using namespace jclr;

TEST_CASE("a 2x2 grid yields 8 directed segments") {
  CityConfig cfg;
  cfg.grid_rows = 2;
  cfg.grid_cols = 2;
  cfg.num_road_types = 2;
  cfg.num_trajectories = 0;
  const RoadNetwork net = generate_network(cfg);
  CHECK(net.size() == 8);
}

TEST_CASE("every grid segment has at least one outgoing edge") {
  CityConfig cfg;
  cfg.num_trajectories = 0;
  const RoadNetwork net = generate_network(cfg);
  for (SegmentId s = 0; s < net.size(); ++s) {
    CHECK_FALSE(net.out_neighbors(s).empty());
  }
}

TEST_CASE("grid generation is deterministic per seed") {
  CityConfig cfg;
  cfg.num_trajectories = 50;
  const RoadNetwork a = generate_network(cfg);
  const RoadNetwork b = generate_network(cfg);
  REQUIRE(a.size() == b.size());
  for (SegmentId s = 0; s < a.size(); ++s) {
    CHECK(a.meta(s).length_m == b.meta(s).length_m);
    CHECK(a.meta(s).avg_speed == b.meta(s).avg_speed);
    CHECK(a.meta(s).label == b.meta(s).label);
  }
  CHECK(a.edges() == b.edges());
  const TrajectoryCorpus ca = generate_trajectories(a, cfg);
  const TrajectoryCorpus cb = generate_trajectories(b, cfg);
  REQUIRE(ca.size() == cb.size());
  for (std::size_t i = 0; i < ca.size(); ++i) {
    CHECK(ca.trajectories[i].segments == cb.trajectories[i].segments);
    CHECK(ca.trajectories[i].timestamps == cb.trajectories[i].timestamps);
  }
}

TEST_CASE("labels cover every configured road type") {
  for (int rows : {4, 8}) {
    CityConfig cfg;
    cfg.grid_rows = rows;
    cfg.grid_cols = rows;
    cfg.num_trajectories = 0;
    const RoadNetwork net = generate_network(cfg);
    std::set<int> seen;
    for (SegmentId s = 0; s < net.size(); ++s) seen.insert(*net.meta(s).label);
    CHECK(seen.size() == static_cast<std::size_t>(cfg.num_road_types));
    // no class may hold the majority (by construction <= 0.5)
    std::vector<int> counts(cfg.num_road_types, 0);
    for (SegmentId s = 0; s < net.size(); ++s) ++counts[*net.meta(s).label];
    for (int c : counts) {
      CHECK(c <= static_cast<int>(net.size()) / 2);
    }
  }
}

TEST_CASE("grids too small for the label palette are rejected") {
  CityConfig cfg;
  cfg.grid_rows = 2;
  cfg.grid_cols = 2;
  cfg.num_road_types = 5;
  cfg.num_trajectories = 0;
  CHECK_THROWS_AS(generate_network(cfg), ValidationError);
}

TEST_CASE("noise-free trajectories are shortest paths") {
  CityConfig cfg;
  cfg.route_noise = 0.0;
  cfg.num_trajectories = 40;
  const RoadNetwork net = generate_network(cfg);
  const TrajectoryCorpus corpus = generate_trajectories(net, cfg);
  for (const Trajectory& traj : corpus.trajectories) {
    const auto field = hop_distances_from(net, traj.segments.front());
    CHECK(field.dist[traj.segments.back()] ==
          static_cast<std::uint32_t>(traj.length() - 1));
  }
}

TEST_CASE("timestamps are strictly increasing") {
  CityConfig cfg;
  cfg.num_trajectories = 60;
  const RoadNetwork net = generate_network(cfg);
  const TrajectoryCorpus corpus = generate_trajectories(net, cfg);
  for (const Trajectory& traj : corpus.trajectories) {
    REQUIRE(traj.timestamps.size() == traj.segments.size());
    for (std::size_t k = 1; k < traj.timestamps.size(); ++k) {
      CHECK(traj.timestamps[k] > traj.timestamps[k - 1]);
    }
  }
}

TEST_CASE("generated corpora pass validation and filtering untouched") {
  CityConfig cfg;
  cfg.num_trajectories = 150;
  const RoadNetwork net = generate_network(cfg);
  const TrajectoryCorpus corpus = generate_trajectories(net, cfg);
  REQUIRE(corpus.size() == 150);
  for (const Trajectory& traj : corpus.trajectories) {
    CHECK_NOTHROW(validate_trajectory(traj, net));
  }
  CHECK(filter_trajectories(corpus).size() == corpus.size());
  // And they feed the transition module with no errors.
  const auto counts = build_transition_counts(corpus, net.size());
  CHECK(counts.total() > 0);
}

TEST_CASE("default-policy trip lengths track the grid diameter") {
  CityConfig cfg;
  cfg.num_trajectories = 300;
  REQUIRE(cfg.od_policy == "far");
  double mean_len = 0.0;
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    CityConfig c = cfg;
    c.seed = seed;
    const RoadNetwork net = generate_network(c);
    const TrajectoryCorpus corpus = generate_trajectories(net, c);
    double local = 0.0;
    for (const auto& t : corpus.trajectories) local += static_cast<double>(t.length());
    mean_len += local / corpus.size();
  }
  mean_len /= 3.0;
  const double diameter = (cfg.grid_rows - 1) + (cfg.grid_cols - 1);
  CHECK(mean_len > 0.7 * diameter);
  CHECK(mean_len < 1.3 * diameter);
}

TEST_CASE("od policies control the minimum trip length") {
  CityConfig cfg;
  cfg.num_trajectories = 80;
  cfg.od_policy = "mid";
  const RoadNetwork net = generate_network(cfg);
  const TrajectoryCorpus corpus = generate_trajectories(net, cfg);
  for (const auto& t : corpus.trajectories) {
    CHECK(t.length() >= static_cast<std::size_t>((cfg.grid_rows + cfg.grid_cols) / 2));
  }
  CityConfig bad = cfg;
  bad.od_policy = "nearest";
  CHECK_THROWS_AS(generate_trajectories(net, bad), ValidationError);
}

TEST_CASE("config validation rejects degenerate grids") {
  CityConfig cfg;
  cfg.grid_rows = 1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.grid_rows = 4;
  cfg.route_noise = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.route_noise = 0.1;
  cfg.speed_by_type = {10.0};  // wrong length for 5 road types
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
