#include "jclr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "jclr/objectives.hpp"

namespace jclr {

double EvalReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  throw ValidationError(cat("report '", task, "' has no metric '", name, "'"));
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["task"] = task;
  j["config_fingerprint"] = config_fingerprint;
  for (const auto& [k, v] : metrics) j["metrics"][k] = v;
  if (!folds.empty()) {
    auto arr = nlohmann::json::array();
    for (const auto& fold : folds) {
      nlohmann::json fj;
      for (const auto& [k, v] : fold) fj[k] = v;
      arr.push_back(std::move(fj));
    }
    j["folds"] = std::move(arr);
  }
  return j.dump();
}

void EvalReport::print_table(std::ostream& os) const {
  os << "== " << task << " ==\n";
  for (const auto& [k, v] : metrics) {
    os << "  " << k << ": " << v << '\n';
  }
  if (!config_fingerprint.empty()) {
    os << "  config: " << config_fingerprint << '\n';
  }
}

F1Scores f1_scores(std::span<const int> truth, std::span<const int> predicted,
                   int num_classes) {
  if (truth.empty() || truth.size() != predicted.size()) {
    throw ValidationError("f1_scores: empty or mismatched inputs");
  }
  std::vector<long> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= num_classes || predicted[i] < 0 ||
        predicted[i] >= num_classes) {
      throw ValidationError(cat("f1_scores: class outside [0,", num_classes, ")"));
    }
    if (truth[i] == predicted[i]) {
      ++tp[truth[i]];
    } else {
      ++fp[predicted[i]];
      ++fn[truth[i]];
    }
  }
  long tp_sum = 0, fp_sum = 0, fn_sum = 0;
  double macro = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    tp_sum += tp[c];
    fp_sum += fp[c];
    fn_sum += fn[c];
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    macro += denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
  }
  F1Scores out;
  out.macro = macro / num_classes;
  const double micro_denom = 2.0 * tp_sum + fp_sum + fn_sum;
  out.micro = micro_denom > 0.0 ? 2.0 * tp_sum / micro_denom : 0.0;
  return out;
}

double mean_absolute_error(std::span<const double> truth,
                           std::span<const double> predicted) {
  if (truth.empty() || truth.size() != predicted.size()) {
    throw ValidationError("mae: empty or mismatched inputs");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) acc += std::abs(truth[i] - predicted[i]);
  return acc / static_cast<double>(truth.size());
}

double root_mean_squared_error(std::span<const double> truth,
                               std::span<const double> predicted) {
  if (truth.empty() || truth.size() != predicted.size()) {
    throw ValidationError("rmse: empty or mismatched inputs");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - predicted[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(truth.size()));
}

double mean_rank(std::span<const int> ranks) {
  if (ranks.empty()) throw ValidationError("mean_rank: empty input");
  double acc = 0.0;
  for (int r : ranks) acc += r;
  return acc / static_cast<double>(ranks.size());
}

double hit_ratio_at(std::span<const int> ranks, int k) {
  if (ranks.empty()) throw ValidationError("hit_ratio_at: empty input");
  std::size_t hits = 0;
  for (int r : ranks) hits += r <= k ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

std::vector<std::pair<std::string, double>> compute_metrics(
    const std::string& kind, const std::vector<double>& truth,
    const std::vector<double>& predictions, int k) {
  if (kind == "classification") {
    std::vector<int> t(truth.size()), p(predictions.size());
    int num_classes = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      t[i] = static_cast<int>(truth[i]);
      num_classes = std::max(num_classes, t[i] + 1);
    }
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      p[i] = static_cast<int>(predictions[i]);
      if (p[i] >= num_classes) {
        throw ValidationError(cat("unknown class ", p[i], " in predictions"));
      }
    }
    const F1Scores f1 = f1_scores(t, p, num_classes);
    return {{"mi_f1", f1.micro}, {"ma_f1", f1.macro}};
  }
  if (kind == "regression") {
    return {{"mae", mean_absolute_error(truth, predictions)},
            {"rmse", root_mean_squared_error(truth, predictions)}};
  }
  if (kind == "ranking") {
    std::vector<int> ranks(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      ranks[i] = static_cast<int>(predictions[i]);
    }
    return {{"mr", mean_rank(ranks)},
            {cat("hr@", k), hit_ratio_at(ranks, k)}};
  }
  throw ValidationError(cat("unknown metric kind '", kind, "'"));
}

namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
  }
  return idx;
}

/// Full-batch Adam on a softmax linear probe.
struct LinearClassifier {
  Matrix w;  // d x classes
  Vector b;

  static LinearClassifier fit(const Matrix& x, const std::vector<int>& y,
                              int num_classes, int epochs, double lr,
                              std::uint64_t seed) {
    const auto n = x.rows();
    const auto d = x.cols();
    Rng rng(seed);
    LinearClassifier clf;
    clf.w = Matrix::Zero(d, num_classes);
    clf.b = Vector::Zero(num_classes);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (int c = 0; c < num_classes; ++c) {
        clf.w(i, c) = (2.0 * uniform01(rng) - 1.0) * 0.01;
      }
    }
    Matrix mw = Matrix::Zero(d, num_classes), vw = mw;
    Vector mb = Vector::Zero(num_classes), vb = mb;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (int t = 1; t <= epochs; ++t) {
      Matrix logits = (x * clf.w).rowwise() + clf.b.transpose();
      Matrix probs(n, num_classes);
      for (Eigen::Index r = 0; r < n; ++r) {
        const double m = logits.row(r).maxCoeff();
        probs.row(r) = (logits.row(r).array() - m).exp();
        probs.row(r) /= probs.row(r).sum();
      }
      for (Eigen::Index r = 0; r < n; ++r) probs(r, y[r]) -= 1.0;
      probs /= static_cast<double>(n);
      const Matrix gw = x.transpose() * probs;
      const Vector gb = probs.colwise().sum().transpose();

      const double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
      mw = b1 * mw + (1.0 - b1) * gw;
      vw = b2 * vw + (1.0 - b2) * gw.cwiseProduct(gw);
      clf.w -= lr * (mw / c1).cwiseQuotient(((vw / c2).cwiseSqrt().array() + eps).matrix());
      mb = b1 * mb + (1.0 - b1) * gb;
      vb = b2 * vb + (1.0 - b2) * gb.cwiseProduct(gb);
      clf.b -= lr * (mb / c1).cwiseQuotient(((vb / c2).cwiseSqrt().array() + eps).matrix());
    }
    return clf;
  }

  std::vector<int> predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    const Matrix logits = (x * w).rowwise() + b.transpose();
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      Eigen::Index best;
      logits.row(r).maxCoeff(&best);
      out[r] = static_cast<int>(best);
    }
    return out;
  }
};

/// Least-squares linear regression with intercept.
struct LinearRegressor {
  Vector w;
  double b = 0.0;

  static LinearRegressor fit(const Matrix& x, const Vector& y) {
    Matrix design(x.rows(), x.cols() + 1);
    design.leftCols(x.cols()) = x;
    design.col(x.cols()).setOnes();
    const Vector sol = design.colPivHouseholderQr().solve(y);
    LinearRegressor reg;
    reg.w = sol.head(x.cols());
    reg.b = sol(x.cols());
    return reg;
  }

  Vector predict(const Matrix& x) const {
    return (x * w).array() + b;
  }
};

/// 3-layer perceptron regressor (dim -> dim -> dim/2 -> 1, ReLU), trained
/// full-batch with Adam on standardized features and targets.
struct MlpRegressor {
  Matrix w1, w2, w3;
  Vector b1, b2;
  double b3 = 0.0;
  Vector x_mean, x_scale;
  double y_mean = 0.0, y_scale = 1.0;

  static MlpRegressor fit(const Matrix& x_raw, const Vector& y_raw, int epochs,
                          double lr, std::uint64_t seed) {
    const auto n = x_raw.rows();
    const auto d = x_raw.cols();
    const auto h2 = std::max<Eigen::Index>(1, d / 2);
    MlpRegressor mlp;
    mlp.x_mean = x_raw.colwise().mean().transpose();
    mlp.x_scale.resize(d);
    for (Eigen::Index c = 0; c < d; ++c) {
      const double var =
          (x_raw.col(c).array() - mlp.x_mean(c)).square().mean();
      mlp.x_scale(c) = std::sqrt(var) > 1e-12 ? std::sqrt(var) : 1.0;
    }
    mlp.y_mean = y_raw.mean();
    const double y_var = (y_raw.array() - mlp.y_mean).square().mean();
    mlp.y_scale = std::sqrt(y_var) > 1e-12 ? std::sqrt(y_var) : 1.0;

    Matrix x = (x_raw.rowwise() - mlp.x_mean.transpose()).array().rowwise() /
               mlp.x_scale.transpose().array();
    Vector y = (y_raw.array() - mlp.y_mean) / mlp.y_scale;

    Rng rng(seed);
    auto init = [&](Eigen::Index rows, Eigen::Index cols) {
      Matrix m(rows, cols);
      const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          m(r, c) = (2.0 * uniform01(rng) - 1.0) * bound;
        }
      }
      return m;
    };
    mlp.w1 = init(d, d);
    mlp.b1 = Vector::Zero(d);
    mlp.w2 = init(d, h2);
    mlp.b2 = Vector::Zero(h2);
    mlp.w3 = init(h2, 1);
    mlp.b3 = 0.0;

    struct Slot { Matrix m, v; };
    auto make_slot = [](const Matrix& like) {
      return Slot{Matrix::Zero(like.rows(), like.cols()),
                  Matrix::Zero(like.rows(), like.cols())};
    };
    Slot s1 = make_slot(mlp.w1), s2 = make_slot(mlp.w2), s3 = make_slot(mlp.w3);
    Slot sb1 = make_slot(mlp.b1), sb2 = make_slot(mlp.b2);
    double mb3 = 0.0, vb3 = 0.0;
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    auto adam = [&](Matrix& p, const Matrix& g, Slot& s, int t) {
      s.m = beta1 * s.m + (1.0 - beta1) * g;
      s.v = beta2 * s.v + (1.0 - beta2) * g.cwiseProduct(g);
      const double c1 = 1.0 - std::pow(beta1, t), c2 = 1.0 - std::pow(beta2, t);
      p -= lr * (s.m / c1).cwiseQuotient(((s.v / c2).cwiseSqrt().array() + eps).matrix());
    };

    for (int t = 1; t <= epochs; ++t) {
      const Matrix a1 = ((x * mlp.w1).rowwise() + mlp.b1.transpose()).cwiseMax(0.0);
      const Matrix a2 = ((a1 * mlp.w2).rowwise() + mlp.b2.transpose()).cwiseMax(0.0);
      const Vector pred = (a2 * mlp.w3).col(0).array() + mlp.b3;
      const Vector err = 2.0 * (pred - y) / static_cast<double>(n);

      const Matrix g3 = a2.transpose() * err;
      const double gb3 = err.sum();
      Matrix d2 = err * mlp.w3.transpose();
      d2 = d2.cwiseProduct((a2.array() > 0.0).cast<double>().matrix());
      const Matrix g2 = a1.transpose() * d2;
      const Vector gb2 = d2.colwise().sum().transpose();
      Matrix d1 = d2 * mlp.w2.transpose();
      d1 = d1.cwiseProduct((a1.array() > 0.0).cast<double>().matrix());
      const Matrix g1 = x.transpose() * d1;
      const Vector gb1 = d1.colwise().sum().transpose();

      adam(mlp.w1, g1, s1, t);
      adam(mlp.w2, g2, s2, t);
      adam(mlp.w3, g3, s3, t);
      Matrix b1m = mlp.b1, gb1m = gb1;
      adam(b1m, gb1m, sb1, t);
      mlp.b1 = b1m;
      Matrix b2m = mlp.b2, gb2m = gb2;
      adam(b2m, gb2m, sb2, t);
      mlp.b2 = b2m;
      mb3 = beta1 * mb3 + (1.0 - beta1) * gb3;
      vb3 = beta2 * vb3 + (1.0 - beta2) * gb3 * gb3;
      const double c1 = 1.0 - std::pow(beta1, t), c2 = 1.0 - std::pow(beta2, t);
      mlp.b3 -= lr * (mb3 / c1) / (std::sqrt(vb3 / c2) + eps);
    }
    return mlp;
  }

  Vector predict(const Matrix& x_raw) const {
    const Matrix x = (x_raw.rowwise() - x_mean.transpose()).array().rowwise() /
                     x_scale.transpose().array();
    const Matrix a1 = ((x * w1).rowwise() + b1.transpose()).cwiseMax(0.0);
    const Matrix a2 = ((a1 * w2).rowwise() + b2.transpose()).cwiseMax(0.0);
    Vector pred = (a2 * w3).col(0).array() + b3;
    return (pred.array() * y_scale + y_mean).matrix();
  }
};

constexpr int kProbeEpochs = 200;
constexpr double kLinearProbeLr = 1e-2;
constexpr double kMlpProbeLr = 1e-3;

}  // namespace

EvalReport eval_road_classification(const Matrix& h_s,
                                    const std::vector<std::optional<int>>& labels,
                                    int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("road classification needs >= 2 folds");
  std::vector<std::size_t> items;
  int num_classes = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      items.push_back(i);
      num_classes = std::max(num_classes, *labels[i] + 1);
    }
  }
  if (items.empty()) throw ValidationError("no labeled segments");
  std::vector<int> class_count(num_classes, 0);
  for (std::size_t i : items) ++class_count[*labels[i]];
  for (int c = 0; c < num_classes; ++c) {
    if (class_count[c] < folds) {
      throw ValidationError(cat("class ", c, " has ", class_count[c],
                                " samples for ", folds, "-fold CV"));
    }
  }

  Rng rng(substream_seed(seed, 0xc1a55));
  std::vector<std::size_t> order = shuffled_indices(items.size(), rng);

  EvalReport report;
  report.task = "road_classification";
  double mi_sum = 0.0, ma_sum = 0.0;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_ids, test_ids;
    for (std::size_t k = 0; k < order.size(); ++k) {
      (static_cast<int>(k % folds) == f ? test_ids : train_ids)
          .push_back(items[order[k]]);
    }
    Matrix x_train(train_ids.size(), h_s.cols());
    std::vector<int> y_train(train_ids.size());
    for (std::size_t k = 0; k < train_ids.size(); ++k) {
      x_train.row(static_cast<Eigen::Index>(k)) = h_s.row(train_ids[k]);
      y_train[k] = *labels[train_ids[k]];
    }
    Matrix x_test(test_ids.size(), h_s.cols());
    std::vector<int> y_test(test_ids.size());
    for (std::size_t k = 0; k < test_ids.size(); ++k) {
      x_test.row(static_cast<Eigen::Index>(k)) = h_s.row(test_ids[k]);
      y_test[k] = *labels[test_ids[k]];
    }
    const auto clf = LinearClassifier::fit(x_train, y_train, num_classes,
                                           kProbeEpochs, kLinearProbeLr,
                                           substream_seed(seed, 0xf01d, f));
    const auto pred = clf.predict(x_test);
    const F1Scores f1 = f1_scores(y_test, pred, num_classes);
    report.folds.push_back({{"mi_f1", f1.micro}, {"ma_f1", f1.macro}});
    mi_sum += f1.micro;
    ma_sum += f1.macro;
  }
  report.metrics = {{"mi_f1", mi_sum / folds}, {"ma_f1", ma_sum / folds}};
  return report;
}

EvalReport eval_speed_inference(const Matrix& h_s,
                                const std::vector<std::optional<double>>& speeds,
                                int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("speed inference needs >= 2 folds");
  std::vector<std::size_t> items;
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    if (speeds[i]) items.push_back(i);
  }
  const auto d = h_s.cols();
  Rng rng(substream_seed(seed, 0x59eed));
  std::vector<std::size_t> order = shuffled_indices(items.size(), rng);

  EvalReport report;
  report.task = "speed_inference";
  double mae_sum = 0.0, rmse_sum = 0.0;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_ids, test_ids;
    for (std::size_t k = 0; k < order.size(); ++k) {
      (static_cast<int>(k % folds) == f ? test_ids : train_ids)
          .push_back(items[order[k]]);
    }
    if (train_ids.size() < static_cast<std::size_t>(d) + 1) {
      throw ValidationError(cat("speed probe underdetermined: ",
                                train_ids.size(), " samples for dim ", d));
    }
    Matrix x_train(train_ids.size(), d);
    Vector y_train(train_ids.size());
    for (std::size_t k = 0; k < train_ids.size(); ++k) {
      x_train.row(static_cast<Eigen::Index>(k)) = h_s.row(train_ids[k]);
      y_train(static_cast<Eigen::Index>(k)) = *speeds[train_ids[k]];
    }
    Matrix x_test(test_ids.size(), d);
    std::vector<double> y_test(test_ids.size());
    for (std::size_t k = 0; k < test_ids.size(); ++k) {
      x_test.row(static_cast<Eigen::Index>(k)) = h_s.row(test_ids[k]);
      y_test[k] = *speeds[test_ids[k]];
    }
    const auto reg = LinearRegressor::fit(x_train, y_train);
    const Vector pred = reg.predict(x_test);
    std::vector<double> pred_v(pred.data(), pred.data() + pred.size());
    const double mae = mean_absolute_error(y_test, pred_v);
    const double rmse = root_mean_squared_error(y_test, pred_v);
    report.folds.push_back({{"mae", mae}, {"rmse", rmse}});
    mae_sum += mae;
    rmse_sum += rmse;
  }
  report.metrics = {{"mae", mae_sum / folds}, {"rmse", rmse_sum / folds}};
  return report;
}

EvalReport eval_similarity_search(const ModelParams& params,
                                  const RoadNetwork& network,
                                  const TrajectoryCorpus& database,
                                  int num_queries, const AugmentConfig& detour_cfg,
                                  std::uint64_t seed, int hr_k, SimMetric metric) {
  if (static_cast<std::size_t>(num_queries) >= database.size()) {
    throw ValidationError(cat("similarity search: ", num_queries,
                              " queries need a larger database than ",
                              database.size()));
  }
  Rng rng(substream_seed(seed, 0x5ea9c4));

  // Draw queries (resampling when no detour exists) until the pool runs dry.
  std::vector<std::size_t> candidates =
      shuffled_indices(database.size(), rng);
  std::vector<std::size_t> query_ids;
  std::vector<Trajectory> twins;
  for (std::size_t idx : candidates) {
    if (static_cast<int>(query_ids.size()) == num_queries) break;
    const Trajectory& query = database.trajectories[idx];
    if (query.length() < 3) continue;
    DetourResult res = detour(network, query, detour_cfg, rng);
    if (!res.changed) continue;
    res.trajectory.timestamps.clear();
    query_ids.push_back(idx);
    twins.push_back(std::move(res.trajectory));
  }
  if (static_cast<int>(query_ids.size()) < num_queries) {
    throw ValidationError(cat("similarity search: only ", query_ids.size(),
                              " of ", num_queries,
                              " queries admit a detour twin"));
  }

  const Matrix h_s = gat_forward(params, network);
  auto embed = [&](const Trajectory& t) {
    return encode_trajectory(params, h_s, t);
  };

  // Database = twins plus every non-query trajectory; the twin inherits the
  // query's id, which it uses in rank tie-breaking.
  std::vector<const Trajectory*> db_items;
  std::vector<bool> is_query(database.size(), false);
  for (std::size_t idx : query_ids) is_query[idx] = true;
  for (const Trajectory& twin : twins) db_items.push_back(&twin);
  for (std::size_t i = 0; i < database.size(); ++i) {
    if (!is_query[i]) db_items.push_back(&database.trajectories[i]);
  }

  Matrix db_embeds(db_items.size(), params.hyper.dim);
  for (std::size_t i = 0; i < db_items.size(); ++i) {
    db_embeds.row(static_cast<Eigen::Index>(i)) = embed(*db_items[i]).transpose();
  }
  if (metric == SimMetric::kCosine) {
    for (Eigen::Index i = 0; i < db_embeds.rows(); ++i) {
      const double norm = db_embeds.row(i).norm();
      if (norm > 0.0) db_embeds.row(i) /= norm;
    }
  }

  std::vector<int> ranks(query_ids.size());
  for (std::size_t q = 0; q < query_ids.size(); ++q) {
    Vector qe = embed(database.trajectories[query_ids[q]]);
    if (metric == SimMetric::kCosine && qe.norm() > 0.0) qe /= qe.norm();
    const Vector scores = db_embeds * qe;
    const double twin_score = scores(static_cast<Eigen::Index>(q));
    const std::string& twin_id = db_items[q]->id;
    int rank = 1;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      if (static_cast<std::size_t>(i) == q) continue;
      if (scores(i) > twin_score ||
          (scores(i) == twin_score && db_items[i]->id < twin_id)) {
        ++rank;
      }
    }
    ranks[q] = rank;
  }

  EvalReport report;
  report.task = "similarity_search";
  report.metrics = {{"mr", mean_rank(ranks)},
                    {cat("hr@", hr_k), hit_ratio_at(ranks, hr_k)}};
  return report;
}

EvalReport eval_travel_time(const ModelParams& params, const RoadNetwork& network,
                            const TrajectoryCorpus& corpus, double train_frac,
                            std::uint64_t seed) {
  if (train_frac <= 0.0 || train_frac >= 1.0) {
    throw ValidationError("travel time: train fraction outside (0,1)");
  }
  std::vector<double> durations(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Trajectory& t = corpus.trajectories[i];
    if (!t.has_timestamps()) {
      throw ValidationError(cat("trajectory '", t.id, "' has no timestamps"));
    }
    durations[i] = t.duration();
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_frac * static_cast<double>(corpus.size())));
  if (n_train == 0 || n_train == corpus.size()) {
    throw ValidationError("travel time: split leaves an empty side");
  }

  const Matrix h_s = gat_forward(params, network);
  Matrix features(corpus.size(), params.hyper.dim);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    features.row(static_cast<Eigen::Index>(i)) =
        encode_trajectory(params, h_s, corpus.trajectories[i]).transpose();
  }

  const Matrix x_train = features.topRows(static_cast<Eigen::Index>(n_train));
  const Vector y_train = Eigen::Map<const Vector>(durations.data(),
                                                  static_cast<Eigen::Index>(n_train));
  const Matrix x_test = features.bottomRows(
      static_cast<Eigen::Index>(corpus.size() - n_train));
  std::vector<double> y_test(durations.begin() + static_cast<long>(n_train),
                             durations.end());

  const auto mlp = MlpRegressor::fit(x_train, y_train, kProbeEpochs, kMlpProbeLr,
                                     substream_seed(seed, 0x77e));
  const Vector pred = mlp.predict(x_test);
  std::vector<double> pred_v(pred.data(), pred.data() + pred.size());

  EvalReport report;
  report.task = "travel_time";
  report.metrics = {{"mae", mean_absolute_error(y_test, pred_v)},
                    {"rmse", root_mean_squared_error(y_test, pred_v)}};
  return report;
}

std::vector<std::optional<double>> derive_avg_speeds(const RoadNetwork& network,
                                                     const TrajectoryCorpus& corpus) {
  std::vector<double> sum(network.size(), 0.0);
  std::vector<int> count(network.size(), 0);
  for (const Trajectory& t : corpus.trajectories) {
    if (!t.has_timestamps()) continue;
    for (std::size_t k = 0; k + 1 < t.segments.size(); ++k) {
      const double dt = t.timestamps[k + 1] - t.timestamps[k];
      if (dt <= 0.0) continue;
      sum[t.segments[k]] += 3.6 * network.meta(t.segments[k]).length_m / dt;
      ++count[t.segments[k]];
    }
  }
  std::vector<std::optional<double>> out(network.size());
  for (std::size_t i = 0; i < network.size(); ++i) {
    if (count[i] > 0) out[i] = sum[i] / count[i];
  }
  return out;
}

}  // namespace jclr
