#include "jclr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "jclr/types.hpp"
#include "jclr/util.hpp"

namespace jclr {

namespace {

struct Node {
  int r = 0, c = 0;
};

/// Street enumeration shared by the network and trajectory generators:
/// horizontal streets row-major first, then vertical streets; each street
/// occupies two consecutive segment ids (forward, then backward).
struct GridLayout {
  int rows, cols;

  explicit GridLayout(const CityConfig& cfg)
      : rows(cfg.grid_rows), cols(cfg.grid_cols) {}

  int num_h_streets() const { return rows * (cols - 1); }
  int num_v_streets() const { return (rows - 1) * cols; }
  int num_segments() const { return 2 * (num_h_streets() + num_v_streets()); }

  int h_street(int r, int c) const { return r * (cols - 1) + c; }
  int v_street(int r, int c) const { return num_h_streets() + r * cols + c; }

  /// Directed segment id for the traversal a -> b of adjacent nodes.
  SegmentId segment(Node a, Node b) const {
    if (a.r == b.r) {
      const int street = h_street(a.r, std::min(a.c, b.c));
      return static_cast<SegmentId>(2 * street + (b.c > a.c ? 0 : 1));
    }
    const int street = v_street(std::min(a.r, b.r), a.c);
    return static_cast<SegmentId>(2 * street + (b.r > a.r ? 0 : 1));
  }

  /// Endpoint nodes (start, end) of a directed segment.
  std::pair<Node, Node> endpoints(SegmentId seg) const {
    const int street = static_cast<int>(seg) / 2;
    const bool reversed = seg % 2 == 1;
    Node a, b;
    if (street < num_h_streets()) {
      a = {street / (cols - 1), street % (cols - 1)};
      b = {a.r, a.c + 1};
    } else {
      const int v = street - num_h_streets();
      a = {v / cols, v % cols};
      b = {a.r + 1, a.c};
    }
    return reversed ? std::pair{b, a} : std::pair{a, b};
  }

  std::vector<Node> neighbors(Node n) const {
    std::vector<Node> out;
    if (n.r > 0) out.push_back({n.r - 1, n.c});
    if (n.r + 1 < rows) out.push_back({n.r + 1, n.c});
    if (n.c > 0) out.push_back({n.r, n.c - 1});
    if (n.c + 1 < cols) out.push_back({n.r, n.c + 1});
    return out;
  }
};

int manhattan(Node a, Node b) { return std::abs(a.r - b.r) + std::abs(a.c - b.c); }

/// Band class for a street from its midpoint position: diagonal stripes
/// across the grid, so the class is a function of location alone and
/// correlates with the topology the encoders see.
int street_class(const GridLayout& grid, int street, int num_types) {
  double row_mid, col_mid;
  if (street < grid.num_h_streets()) {
    row_mid = street / (grid.cols - 1);
    col_mid = street % (grid.cols - 1) + 0.5;
  } else {
    const int v = street - grid.num_h_streets();
    row_mid = v / grid.cols + 0.5;
    col_mid = v % grid.cols;
  }
  const double u =
      0.5 * (row_mid / (grid.rows - 1) + col_mid / (grid.cols - 1));
  return std::min(num_types - 1, static_cast<int>(u * num_types));
}

double standard_normal(Rng& rng) {
  const double u1 = std::max(uniform01(rng), 1e-300);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

void CityConfig::validate() const {
  if (grid_rows < 2 || grid_cols < 2) {
    throw ValidationError("grid dimensions must be at least 2x2");
  }
  if (num_road_types < 1) throw ValidationError("num_road_types must be >= 1");
  if (route_noise < 0.0 || route_noise > 1.0) {
    throw ValidationError("route_noise outside [0,1]");
  }
  if (num_trajectories < 0) throw ValidationError("num_trajectories must be >= 0");
  if (!speed_by_type.empty() &&
      speed_by_type.size() != static_cast<std::size_t>(num_road_types)) {
    throw ValidationError(cat("speed_by_type has ", speed_by_type.size(),
                              " entries for ", num_road_types, " road types"));
  }
  if (od_policy != "far" && od_policy != "mid" && od_policy != "band" &&
      od_policy != "uniform") {
    throw ValidationError(cat("unknown od_policy '", od_policy, "'"));
  }
}

std::vector<double> CityConfig::effective_speeds() const {
  if (!speed_by_type.empty()) return speed_by_type;
  std::vector<double> speeds(num_road_types);
  for (int k = 0; k < num_road_types; ++k) {
    speeds[k] = std::max(15.0, 50.0 - 6.0 * k);
  }
  return speeds;
}

RoadNetwork generate_network(const CityConfig& cfg) {
  cfg.validate();
  const GridLayout grid(cfg);
  const auto speeds = cfg.effective_speeds();
  Rng rng(substream_seed(cfg.seed, 0x6e37));

  const int num_streets = grid.num_h_streets() + grid.num_v_streets();
  std::vector<SegmentMeta> metas(grid.num_segments());
  std::vector<bool> class_seen(cfg.num_road_types, false);
  for (int street = 0; street < num_streets; ++street) {
    const int label = street_class(grid, street, cfg.num_road_types);
    class_seen[label] = true;
    const double length = 150.0 + 100.0 * uniform01(rng);
    for (int dir = 0; dir < 2; ++dir) {
      const auto id = static_cast<SegmentId>(2 * street + dir);
      metas[id].id = id;
      metas[id].length_m = length;
      metas[id].label = label;
      metas[id].avg_speed =
          speeds[label] * std::exp(0.1 * standard_normal(rng));
    }
  }
  if (!std::all_of(class_seen.begin(), class_seen.end(), [](bool b) { return b; })) {
    throw ValidationError(
        "grid too small to realize every road-type class; reduce num_road_types");
  }

  std::vector<std::pair<SegmentId, SegmentId>> edges;
  for (SegmentId seg = 0; seg < metas.size(); ++seg) {
    const auto [_, end] = grid.endpoints(seg);
    for (Node next : grid.neighbors(end)) {
      edges.emplace_back(seg, grid.segment(end, next));
    }
  }
  return RoadNetwork(std::move(metas), edges);
}

TrajectoryCorpus generate_trajectories(const RoadNetwork& network,
                                       const CityConfig& cfg) {
  cfg.validate();
  const GridLayout grid(cfg);
  if (static_cast<std::size_t>(grid.num_segments()) != network.size()) {
    throw ValidationError(cat("network has ", network.size(),
                              " segments but the grid config implies ",
                              grid.num_segments()));
  }
  Rng rng(substream_seed(cfg.seed, 0x7a21));
  int min_dist = 3;
  int max_dist = grid.rows + grid.cols;
  if (cfg.od_policy == "far") min_dist = (2 * (grid.rows + grid.cols) + 2) / 3;
  if (cfg.od_policy == "mid") min_dist = (grid.rows + grid.cols) / 2;
  if (cfg.od_policy == "band") {
    min_dist = (grid.rows + grid.cols) / 2;
    max_dist = min_dist + 2;
  }

  auto sample_node = [&]() -> Node {
    return {static_cast<int>(uniform_index(rng, grid.rows)),
            static_cast<int>(uniform_index(rng, grid.cols))};
  };

  TrajectoryCorpus corpus;
  corpus.trajectories.reserve(cfg.num_trajectories);
  const double base_epoch = 1.7e9;
  int trip = 0;
  while (static_cast<int>(corpus.size()) < cfg.num_trajectories) {
    Node origin = sample_node();
    Node dest = sample_node();
    const int od_dist = manhattan(origin, dest);
    if (od_dist < min_dist || od_dist > max_dist) continue;

    // Greedy walk toward dest with per-step random deviations.
    const int cap = 4 * (grid.rows + grid.cols);
    std::vector<Node> path{origin};
    Node cur = origin;
    while (!(cur.r == dest.r && cur.c == dest.c)) {
      const auto nbrs = grid.neighbors(cur);
      Node next;
      const bool deviate = static_cast<int>(path.size()) < cap &&
                           uniform01(rng) < cfg.route_noise;
      if (deviate) {
        next = nbrs[uniform_index(rng, nbrs.size())];
      } else {
        std::vector<Node> closer;
        for (Node n : nbrs) {
          if (manhattan(n, dest) < manhattan(cur, dest)) closer.push_back(n);
        }
        next = closer[uniform_index(rng, closer.size())];
      }
      path.push_back(next);
      cur = next;
    }

    Trajectory traj;
    traj.id = cat("t", trip);
    traj.segments.reserve(path.size() - 1);
    traj.timestamps.reserve(path.size() - 1);
    double clock = base_epoch + 60.0 * trip;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const SegmentId seg = grid.segment(path[i], path[i + 1]);
      traj.segments.push_back(seg);
      traj.timestamps.push_back(clock);
      const SegmentMeta& meta = network.meta(seg);
      clock += meta.length_m / (*meta.avg_speed / 3.6);
    }

    TrajectoryCorpus probe;
    probe.trajectories.push_back(traj);
    if (filter_trajectories(probe).size() != 1) continue;  // resample this trip

    corpus.trajectories.push_back(std::move(traj));
    ++trip;
  }
  return corpus;
}

}  // namespace jclr
