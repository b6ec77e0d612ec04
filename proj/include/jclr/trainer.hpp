#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jclr/augment.hpp"
#include "jclr/encoders.hpp"
#include "jclr/objectives.hpp"
#include "jclr/rst.hpp"
#include "jclr/transition.hpp"

namespace jclr {

struct TrainConfig {
  HyperParams hyper;
  int batch_size = 256;
  int epochs = 10;
  double learning_rate = 1e-3;
  LossWeights loss_weights;
  std::uint64_t seed = 42;
  double transition_threshold = 0.02;
  double rst_threshold = 0.5;
  AugmentConfig augment;
  std::string precision = "f64";
  int neg_pool = 0;             // 0 selects batch_size
  int max_batch_segments = 512;
  double grad_clip = 5.0;
  bool literal_st_norm = false;

  void validate() const;
  int effective_neg_pool() const { return neg_pool > 0 ? neg_pool : batch_size; }
};

struct StepLog {
  int step = 0;
  int epoch = 0;
  double l_ss = 0.0, l_tt = 0.0, l_st = 0.0, total = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<StepLog> steps;
  std::vector<double> epoch_mean_loss;
};

/// One assembled minibatch: original trajectories, their noisy views and the
/// contrast plan over the shared segment pool.
struct BatchData {
  std::vector<const Trajectory*> originals;
  std::vector<Trajectory> views;
  BatchContrastPlan plan;
};

struct LossBreakdown {
  double ss = 0.0, tt = 0.0, st = 0.0, total = 0.0;
};

/// Builds the segment pool (union of batch trajectory segments, capped with
/// uniform subsampling), the road-road contrasts from context sets, and the
/// weighted road-trajectory contrasts from the RS-T vectors. Negative pools
/// are sampled without replacement up to `neg_pool`.
BatchContrastPlan build_batch_plan(const RoadNetwork& network,
                                   const TransitionAdjacency& transitions,
                                   std::span<const Trajectory* const> batch,
                                   std::span<const RSTWeightVector* const> rst,
                                   const TrainConfig& config, Rng& rng);

/// Full forward pass plus the three losses on one batch. Gradients of every
/// parameter accumulate into `grads` when non-null; dropout is active only
/// when `dropout_rng` is non-null.
LossBreakdown batch_loss_and_grads(const ModelParams& params,
                                   const GatGraph& graph, const BatchData& batch,
                                   const LossWeights& weights, ModelParams* grads,
                                   Rng* dropout_rng);

/// Adam with bias correction and global-norm gradient clipping.
class AdamOptimizer {
 public:
  AdamOptimizer(double learning_rate, double clip_norm)
      : lr_(learning_rate), clip_(clip_norm) {}

  void step(ModelParams& params, ModelParams& grads);

 private:
  double lr_;
  double clip_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  int t_ = 0;
  std::vector<Vector> m_, v_;
};

/// Minibatch training over the contrastive objective. Deterministic per
/// seed; throws NumericError naming the step when the loss turns non-finite.
TrainResult train(const RoadNetwork& network, const TrajectoryCorpus& corpus,
                  const std::vector<RSTWeightVector>& rst_weights,
                  const TransitionAdjacency& transitions,
                  const TrainConfig& config);

struct GradCheckReport {
  struct Entry {
    std::string weights;  // lambda configuration label
    double max_rel_err = 0.0;
    std::string worst_tensor;
  };
  std::vector<Entry> entries;
  double max_rel_err = 0.0;
  std::string worst_tensor;
  /// Smallest |pre-activation| of any ReLU/LeakyReLU/ELU in the instance's
  /// forward pass. Central differences are undefined when a perturbation can
  /// cross such a kink, so instances with margin below ~20x the step are
  /// reported as skipped rather than checked.
  double kink_margin = 0.0;
  bool skipped = false;
  bool passed(double tol = 1e-5) const { return !skipped && max_rel_err < tol; }
};

/// Compares every analytic parameter gradient of the total loss (and of each
/// loss isolated via lambda toggles) against central finite differences on a
/// small random instance derived from `seed`. Dropout is disabled. Instances
/// whose kink margin falls below `min_margin` are skipped (see
/// GradCheckReport::kink_margin).
/// min_margin < 0 selects the default of 5 * fd_step.
GradCheckReport grad_check(const TrainConfig& config, std::uint64_t seed,
                           double fd_step = 1e-6, double min_margin = -1.0);

/// Binary checkpoint: magic "JCLR", u16 version, hyperparameter block,
/// per-tensor records, trailing CRC32. Exact round-trip.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

/// Loss log CSV with header step,epoch,l_ss,l_tt,l_st,total.
void save_loss_log(const std::vector<StepLog>& steps, const std::filesystem::path& path);

}  // namespace jclr
