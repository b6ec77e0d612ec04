#include "jclr/transition.hpp"

#include <algorithm>
#include <numeric>

namespace jclr {

namespace {

template <class Pair>
auto find_in_row(std::vector<Pair>& row, SegmentId key) {
  return std::lower_bound(row.begin(), row.end(), key,
                          [](const Pair& p, SegmentId k) { return p.first < k; });
}

}  // namespace

std::uint64_t TransitionCounts::count(SegmentId from, SegmentId to) const {
  const auto& row = rows_[from];
  auto it = std::lower_bound(row.begin(), row.end(), to,
                             [](const auto& p, SegmentId k) { return p.first < k; });
  return (it != row.end() && it->first == to) ? it->second : 0;
}

std::uint64_t TransitionCounts::row_sum(SegmentId i) const {
  std::uint64_t sum = 0;
  for (const auto& [_, c] : rows_[i]) sum += c;
  return sum;
}

std::uint64_t TransitionCounts::total() const {
  std::uint64_t sum = 0;
  for (SegmentId i = 0; i < rows_.size(); ++i) sum += row_sum(i);
  return sum;
}

std::size_t TransitionCounts::nnz() const {
  std::size_t n = 0;
  for (const auto& row : rows_) n += row.size();
  return n;
}

void TransitionCounts::add(SegmentId from, SegmentId to, std::uint64_t amount) {
  auto& row = rows_[from];
  auto it = find_in_row(row, to);
  if (it != row.end() && it->first == to) {
    it->second += amount;
  } else {
    row.insert(it, {to, amount});
  }
}

bool TransitionAdjacency::has(SegmentId from, SegmentId to) const {
  if (from >= rows_.size()) return false;
  const auto& row = rows_[from];
  return std::binary_search(row.begin(), row.end(), to);
}

std::size_t TransitionAdjacency::nnz() const {
  std::size_t n = 0;
  for (const auto& row : rows_) n += row.size();
  return n;
}

void TransitionAdjacency::mark(SegmentId from, SegmentId to) {
  auto& row = rows_[from];
  auto it = std::lower_bound(row.begin(), row.end(), to);
  if (it == row.end() || *it != to) row.insert(it, to);
}

TransitionCounts build_transition_counts(const TrajectoryCorpus& corpus,
                                         std::size_t num_segments) {
  TransitionCounts counts(num_segments);
  for (const Trajectory& traj : corpus.trajectories) {
    for (std::size_t k = 0; k + 1 < traj.segments.size(); ++k) {
      counts.add(traj.segments[k], traj.segments[k + 1]);
    }
  }
  return counts;
}

TransitionAdjacency binarize_transition(const TransitionCounts& counts, double t) {
  if (t < 0.0 || t > 1.0) {
    throw ValidationError(cat("transition threshold ", t, " outside [0,1]"));
  }
  TransitionAdjacency adj(counts.num_segments(), t);
  for (SegmentId i = 0; i < counts.num_segments(); ++i) {
    const std::uint64_t sum = counts.row_sum(i);
    if (sum == 0) continue;
    for (const auto& [j, c] : counts.row(i)) {
      if (static_cast<double>(c) / static_cast<double>(sum) >= t) adj.mark(i, j);
    }
  }
  return adj;
}

std::vector<SegmentId> context_set(const RoadNetwork& network,
                                   const TransitionAdjacency& trans, SegmentId s) {
  if (!network.contains(s)) {
    throw ValidationError(cat("context_set: unknown segment ", s));
  }
  auto structural = network.out_neighbors(s);
  static const std::vector<SegmentId> kEmpty;
  const auto& transitional = s < trans.num_segments() ? trans.row(s) : kEmpty;
  std::vector<SegmentId> merged;
  merged.reserve(structural.size() + transitional.size());
  std::set_union(structural.begin(), structural.end(), transitional.begin(),
                 transitional.end(), std::back_inserter(merged));
  std::erase(merged, s);
  return merged;
}

}  // namespace jclr
