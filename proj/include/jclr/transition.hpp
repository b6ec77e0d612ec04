#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "jclr/types.hpp"

namespace jclr {

/// Sparse nonnegative-integer matrix M_T of consecutive-pair transition
/// counts. Row i holds (target, count) pairs sorted by target.
class TransitionCounts {
 public:
  explicit TransitionCounts(std::size_t num_segments) : rows_(num_segments) {}

  std::size_t num_segments() const { return rows_.size(); }
  const std::vector<std::pair<SegmentId, std::uint64_t>>& row(SegmentId i) const {
    return rows_[i];
  }
  std::uint64_t count(SegmentId from, SegmentId to) const;
  std::uint64_t row_sum(SegmentId i) const;
  std::uint64_t total() const;
  std::size_t nnz() const;

  void add(SegmentId from, SegmentId to, std::uint64_t amount = 1);

 private:
  std::vector<std::vector<std::pair<SegmentId, std::uint64_t>>> rows_;
};

/// Binary transition adjacency A_T obtained from row-normalized counts and a
/// threshold t. Only positions with a positive count can be marked.
class TransitionAdjacency {
 public:
  TransitionAdjacency() = default;
  TransitionAdjacency(std::size_t num_segments, double threshold)
      : rows_(num_segments), threshold_(threshold) {}

  std::size_t num_segments() const { return rows_.size(); }
  double threshold() const { return threshold_; }
  const std::vector<SegmentId>& row(SegmentId i) const { return rows_[i]; }
  bool has(SegmentId from, SegmentId to) const;
  std::size_t nnz() const;

  void mark(SegmentId from, SegmentId to);

 private:
  std::vector<std::vector<SegmentId>> rows_;
  double threshold_ = 0.0;
};

/// M_T[i,j] = number of consecutive occurrences of (i, j) over all
/// trajectories. Self-transitions from repeated segments are counted.
TransitionCounts build_transition_counts(const TrajectoryCorpus& corpus,
                                         std::size_t num_segments);

/// Divides each row of M_T by its row sum (zero rows stay zero) and marks
/// A_T[i,j] = 1 where the normalized value >= t. Requires 0 <= t <= 1.
TransitionAdjacency binarize_transition(const TransitionCounts& counts, double t);

/// Structural and transitional neighbors of `s`, excluding `s` itself.
/// Sorted ascending.
std::vector<SegmentId> context_set(const RoadNetwork& network,
                                   const TransitionAdjacency& trans, SegmentId s);

}  // namespace jclr
