#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jclr/augment.hpp"
#include "jclr/encoders.hpp"
#include "jclr/types.hpp"

namespace jclr {

struct EvalReport {
  std::string task;
  std::vector<std::pair<std::string, double>> metrics;
  // One metric set per fold, for cross-validated tasks.
  std::vector<std::vector<std::pair<std::string, double>>> folds;
  std::string config_fingerprint;

  double metric(const std::string& name) const;
  std::string to_json() const;
  void print_table(std::ostream& os) const;
};

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;
};

/// Micro/macro F1 over single-label predictions in [0, num_classes).
F1Scores f1_scores(std::span<const int> truth, std::span<const int> predicted,
                   int num_classes);

double mean_absolute_error(std::span<const double> truth,
                           std::span<const double> predicted);
double root_mean_squared_error(std::span<const double> truth,
                               std::span<const double> predicted);

/// Arithmetic mean of 1-based ranks.
double mean_rank(std::span<const int> ranks);
/// Fraction of ranks <= k.
double hit_ratio_at(std::span<const int> ranks, int k);

/// String-dispatched metric computation: kind "classification" (truth &
/// predictions as class indices), "regression" (MAE/RMSE) or "ranking"
/// (predictions are 1-based ranks; MR and HR@k).
std::vector<std::pair<std::string, double>> compute_metrics(
    const std::string& kind, const std::vector<double>& truth,
    const std::vector<double>& predictions, int k = 10);

/// Linear + softmax probe on frozen segment embeddings, 5-fold CV, mean
/// Mi-F1/Ma-F1. Errors when a class has fewer samples than folds.
EvalReport eval_road_classification(const Matrix& h_s,
                                    const std::vector<std::optional<int>>& labels,
                                    int folds, std::uint64_t seed);

/// Least-squares linear probe with k-fold CV; MAE/RMSE in km/h. Errors when a
/// training fold has fewer than dim+1 labeled segments.
EvalReport eval_speed_inference(const Matrix& h_s,
                                const std::vector<std::optional<double>>& speeds,
                                int folds, std::uint64_t seed);

/// Detour-twin retrieval: each sampled query is replaced in the database by
/// its detoured twin; database embeddings are ranked by similarity to the
/// query embedding (dot product by default, cosine optionally). Reports MR
/// and HR@k over the twin ranks.
enum class SimMetric { kDot, kCosine };
EvalReport eval_similarity_search(const ModelParams& params,
                                  const RoadNetwork& network,
                                  const TrajectoryCorpus& database,
                                  int num_queries, const AugmentConfig& detour_cfg,
                                  std::uint64_t seed, int hr_k = 10,
                                  SimMetric metric = SimMetric::kDot);

/// 3-layer MLP probe (hidden dim, dim/2, scalar; ReLU) predicting trip
/// duration in seconds from frozen trajectory embeddings; train/eval split by
/// record order.
EvalReport eval_travel_time(const ModelParams& params, const RoadNetwork& network,
                            const TrajectoryCorpus& corpus, double train_frac,
                            std::uint64_t seed);

/// Preprocessing helper: per-segment average of 3.6 * length_m / traversal
/// seconds over all timestamped traversals.
std::vector<std::optional<double>> derive_avg_speeds(const RoadNetwork& network,
                                                     const TrajectoryCorpus& corpus);

}  // namespace jclr
