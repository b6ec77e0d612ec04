#pragma once

#include <span>
#include <vector>

#include "jclr/encoders.hpp"

namespace jclr {

/// Overflow-safe softplus log(1 + e^x).
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Agreement score between two embeddings: the inner product.
inline double pair_score(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw ValidationError("pair_score: dimension mismatch");
  }
  return x.dot(y);
}

/// Jensen-Shannon MI estimate: mean over positives of -softplus(-s) minus
/// mean over negatives of softplus(s). Requires at least one score on each
/// side.
double js_mi(std::span<const double> pos_scores, std::span<const double> neg_scores);

struct LossWeights {
  double ss = 0.1;
  double tt = 0.1;
  double st = 0.8;
  void validate() const;  // each in [0,1], summing to 1 within 1e-9
};

/// Road-road contrast for one anchor: positives are in-batch context
/// segments, negatives in-batch non-context segments. Indices address
/// BatchContrastPlan::segments.
struct RoadContrast {
  int anchor = 0;
  std::vector<int> positives;
  std::vector<int> negatives;
};

/// Road-trajectory contrast for one batch trajectory: weighted positive
/// segments (w > 0) and zero-weight negative segments.
struct StContrast {
  int trajectory = 0;  // index into the batch trajectory list
  std::vector<int> pos_segments;
  std::vector<double> pos_weights;
  std::vector<int> neg_segments;
};

/// Positive/negative structure of one training batch. Trajectory-trajectory
/// pairs are implicit: (view_i, traj_i) positive, (view_j, traj_i) negative
/// for j != i.
struct BatchContrastPlan {
  std::vector<SegmentId> segments;  // plan index -> segment id
  std::vector<RoadContrast> road;
  std::vector<StContrast> st;
  std::size_t num_trajectories = 0;
  bool literal_st_norm = false;    // normalize positives by |S| instead of sum(w)
  std::size_t total_segments = 0;  // |S|, used by the literal normalization
};

/// L_SS: negative mean over anchors of the per-anchor JS MI against context
/// positives and in-batch negatives. Anchors with no positives are skipped.
/// When `d_hs` is given, lambda-scaled gradients accumulate into it.
double loss_ss(const Matrix& H_S, const BatchContrastPlan& plan,
               Matrix* d_hs = nullptr, double grad_scale = 1.0);

/// L_TT: positives pair each trajectory with its own noisy view, negatives
/// with every other view in the batch. Requires batch size >= 2.
double loss_tt(const Matrix& traj_embeds, const Matrix& view_embeds,
               Matrix* d_traj = nullptr, Matrix* d_view = nullptr,
               double grad_scale = 1.0);

/// L_ST weighted by RS-T distance: per trajectory, the w-weighted mean of
/// positive terms over segments with w > 0 (normalized by sum(w), or by |S|
/// in literal mode) minus the mean softplus over zero-weight negatives.
double loss_st_weighted(const Matrix& H_S, const Matrix& traj_embeds,
                        const BatchContrastPlan& plan, Matrix* d_hs = nullptr,
                        Matrix* d_traj = nullptr, double grad_scale = 1.0);

/// lambda_SS * L_SS + lambda_TT * L_TT + lambda_ST * L_ST.
double total_loss(double l_ss, double l_tt, double l_st, const LossWeights& w);

}  // namespace jclr
