#include <doctest.h>

#include "jclr/rst.hpp"
#include "jclr/shortest_path.hpp"
#include "support.hpp"

using namespace jclr;

TEST_CASE("hop distances on a path graph") {
  RoadNetwork net({{0, 1, {}, {}}, {1, 1, {}, {}}, {2, 1, {}, {}}},
                  {{0, 1}, {1, 2}});
  const auto field = hop_distances_from(net, 0);
  CHECK(field.dist == std::vector<std::uint32_t>{0, 1, 2});
}

TEST_CASE("source with no outgoing edges reaches only itself") {
  RoadNetwork net({{0, 1, {}, {}}, {1, 1, {}, {}}, {2, 1, {}, {}}},
                  {{1, 0}, {1, 2}});
  const auto field = hop_distances_from(net, 0);
  CHECK(field.dist[0] == 0);
  CHECK(field.dist[1] == kUnreachable);
  CHECK(field.dist[2] == kUnreachable);
}

TEST_CASE("BFS agrees with the Floyd-Warshall oracle on random graphs") {
  Rng rng(7);
  for (int round = 0; round < 10; ++round) {
    const RoadNetwork net = test::random_network(rng, 40, 2);
    const auto oracle = test::floyd_warshall(net);
    const auto source = static_cast<SegmentId>(uniform_index(rng, net.size()));
    const auto field = hop_distances_from(net, source);
    for (std::size_t j = 0; j < net.size(); ++j) {
      CHECK(field.dist[j] == oracle[source][j]);
    }
    // And the reverse field matches the oracle column.
    const auto target = static_cast<SegmentId>(uniform_index(rng, net.size()));
    const auto rev = hop_distances_to(net, target);
    for (std::size_t i = 0; i < net.size(); ++i) {
      CHECK(rev.dist[i] == oracle[i][target]);
    }
  }
}

TEST_CASE("distance fields satisfy the directed triangle inequality") {
  Rng rng(21);
  const RoadNetwork net = test::random_network(rng, 30);
  const auto field = hop_distances_from(net, 3);
  CHECK(field.dist[3] == 0);
  for (SegmentId i = 0; i < net.size(); ++i) {
    if (field.dist[i] == kUnreachable) continue;
    for (SegmentId j : net.out_neighbors(i)) {
      CHECK(field.dist[j] <= field.dist[i] + 1);
    }
  }
}

TEST_CASE("min_hops_to_set equals the minimum over per-target fields") {
  Rng rng(5);
  const RoadNetwork net = test::random_network(rng, 25);
  const std::vector<SegmentId> targets{2, 7, 11};
  const auto joint = min_hops_to_set(net, targets);
  const auto oracle = test::floyd_warshall(net);
  for (std::size_t i = 0; i < net.size(); ++i) {
    std::uint32_t expected = test::kInf;
    for (SegmentId t : targets) expected = std::min(expected, oracle[i][t]);
    CHECK(joint[i] == expected);
  }
}

TEST_CASE("on-trajectory shortest-path segments get weight 1") {
  RoadNetwork net({{0, 1, {}, {}}, {1, 1, {}, {}}, {2, 1, {}, {}}},
                  {{0, 1}, {1, 2}});
  const Trajectory traj{"t", {0, 1, 2}, {}};
  const auto w = rst_weight_vector(net, traj, 0.5);
  CHECK(w.weights[0] == 1.0);
  CHECK(w.weights[1] == 1.0);
  CHECK(w.weights[2] == 1.0);
}

TEST_CASE("unreachable segments get exactly zero weight") {
  // Segment 3 cannot reach the trajectory.
  RoadNetwork net({{0, 1, {}, {}}, {1, 1, {}, {}}, {2, 1, {}, {}}, {3, 1, {}, {}}},
                  {{0, 1}, {1, 2}, {2, 3}});
  const Trajectory traj{"t", {0, 1, 2}, {}};
  const auto w = rst_weight_vector(net, traj, 0.0);
  CHECK(w.weights[3] == 0.0);
}

TEST_CASE("rst weights match the Floyd-Warshall oracle exactly") {
  Rng rng(31);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 10 + uniform_index(rng, 31);  // up to 40 nodes
    const RoadNetwork net = test::random_network(rng, n);
    const Trajectory traj =
        test::random_walk(rng, net, "t", 3 + uniform_index(rng, 6));
    const double threshold = 0.4 * uniform01(rng);
    const auto got = rst_weight_vector(net, traj, threshold);
    const auto expected = test::rst_oracle(net, traj, threshold);
    for (std::size_t s = 0; s < n; ++s) {
      CHECK(got.weights[s] == expected[s]);  // exact, same integer ratios
    }
  }
}

TEST_CASE("weights respect range, threshold and on-trajectory zero distance") {
  Rng rng(77);
  const RoadNetwork net = test::random_network(rng, 30);
  const Trajectory traj = test::random_walk(rng, net, "t", 6);
  const double threshold = 0.35;
  const auto w = rst_weight_vector(net, traj, threshold);
  for (double v : w.weights) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (v != 0.0) CHECK(v >= threshold);
  }
  // Spec invariant: D = 0 for on-trajectory segments, so their weight is
  // |tau| / |tau'| which the oracle reproduces.
  const auto oracle = test::rst_oracle(net, traj, threshold);
  for (SegmentId s : traj.segments) CHECK(w.weights[s] == oracle[s]);
}

TEST_CASE("corpus weights equal per-trajectory computation and parallel runs agree") {
  Rng rng(13);
  const RoadNetwork net = test::random_network(rng, 40);
  TrajectoryCorpus corpus;
  for (int i = 0; i < 100; ++i) {
    corpus.trajectories.push_back(
        test::random_walk(rng, net, cat("t", i), 3 + uniform_index(rng, 6)));
  }
  const auto serial = rst_weights_for_corpus(net, corpus, 0.3, 1);
  const auto parallel = rst_weights_for_corpus(net, corpus, 0.3, 4);
  REQUIRE(serial.size() == corpus.size());
  REQUIRE(parallel.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto single = rst_weight_vector(net, corpus.trajectories[i], 0.3);
    CHECK(serial[i].trajectory_id == corpus.trajectories[i].id);
    CHECK(serial[i].weights == single.weights);
    CHECK(parallel[i].weights == single.weights);
  }
}

TEST_CASE("empty corpus yields an empty collection") {
  Rng rng(1);
  const RoadNetwork net = test::random_network(rng, 10);
  CHECK(rst_weights_for_corpus(net, {}, 0.5).empty());
}

TEST_CASE("rst weight vector validates inputs") {
  Rng rng(2);
  const RoadNetwork net = test::random_network(rng, 10);
  CHECK_THROWS_AS(rst_weight_vector(net, Trajectory{"e", {}, {}}, 0.5),
                  ValidationError);
  const Trajectory traj = test::random_walk(rng, net, "t", 3);
  CHECK_THROWS_AS(rst_weight_vector(net, traj, 1.0), ValidationError);
  CHECK_THROWS_AS(rst_weight_vector(net, traj, -0.1), ValidationError);
}
