#include "jclr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace jclr {

namespace {

/// Uniform subsample of `k` items, order-preserving; identity when k >= size.
template <class T>
std::vector<T> subsample(std::vector<T> items, std::size_t k, Rng& rng) {
  if (items.size() <= k) return items;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(rng, items.size() - i);
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  std::sort(items.begin(), items.end());
  return items;
}

}  // namespace

void TrainConfig::validate() const {
  hyper.validate();
  if (batch_size < 2) throw ValidationError("batch_size must be at least 2");
  if (epochs <= 0) throw ValidationError("epochs must be positive");
  if (learning_rate < 0.0) throw ValidationError("learning_rate must be >= 0");
  if (transition_threshold < 0.0 || transition_threshold > 1.0) {
    throw ValidationError("transition_threshold outside [0,1]");
  }
  if (rst_threshold < 0.0 || rst_threshold >= 1.0) {
    throw ValidationError("rst_threshold outside [0,1)");
  }
  if (max_batch_segments <= 0) throw ValidationError("max_batch_segments must be positive");
  if (grad_clip < 0.0) throw ValidationError("grad_clip must be >= 0");
  loss_weights.validate();
  augment.validate();
  if (precision != "f64") {
    throw ConfigError(cat("unsupported precision '", precision, "' (only f64)"));
  }
}

BatchContrastPlan build_batch_plan(const RoadNetwork& network,
                                   const TransitionAdjacency& transitions,
                                   std::span<const Trajectory* const> batch,
                                   std::span<const RSTWeightVector* const> rst,
                                   const TrainConfig& config, Rng& rng) {
  BatchContrastPlan plan;
  plan.num_trajectories = batch.size();
  plan.literal_st_norm = config.literal_st_norm;
  plan.total_segments = network.size();

  std::unordered_set<SegmentId> pool_set;
  for (const Trajectory* traj : batch) {
    pool_set.insert(traj->segments.begin(), traj->segments.end());
  }
  std::vector<SegmentId> pool(pool_set.begin(), pool_set.end());
  std::sort(pool.begin(), pool.end());
  pool = subsample(std::move(pool),
                   static_cast<std::size_t>(config.max_batch_segments), rng);
  plan.segments = pool;

  std::unordered_map<SegmentId, int> index;
  index.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    index.emplace(pool[i], static_cast<int>(i));
  }
  const auto neg_cap = static_cast<std::size_t>(config.effective_neg_pool());

  // Road-road contrasts.
  for (std::size_t i = 0; i < pool.size(); ++i) {
    RoadContrast rc;
    rc.anchor = static_cast<int>(i);
    const auto context = context_set(network, transitions, pool[i]);
    std::unordered_set<SegmentId> context_set_lookup(context.begin(), context.end());
    for (SegmentId j : context) {
      if (auto it = index.find(j); it != index.end()) {
        rc.positives.push_back(it->second);
      }
    }
    std::vector<int> candidates;
    candidates.reserve(pool.size());
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (j == i || context_set_lookup.contains(pool[j])) continue;
      candidates.push_back(static_cast<int>(j));
    }
    rc.negatives = subsample(std::move(candidates), neg_cap, rng);
    if (!rc.positives.empty() && !rc.negatives.empty()) {
      plan.road.push_back(std::move(rc));
    }
  }

  // Road-trajectory contrasts.
  for (std::size_t t = 0; t < batch.size(); ++t) {
    StContrast sc;
    sc.trajectory = static_cast<int>(t);
    const auto& weights = rst[t]->weights;
    std::vector<int> negatives;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const double w = weights[pool[i]];
      if (w > 0.0) {
        sc.pos_segments.push_back(static_cast<int>(i));
        sc.pos_weights.push_back(w);
      } else {
        negatives.push_back(static_cast<int>(i));
      }
    }
    if (sc.pos_segments.empty()) {
      // All-zero weight vector: fall back to the on-trajectory indicator.
      std::unordered_set<SegmentId> on_traj(batch[t]->segments.begin(),
                                            batch[t]->segments.end());
      negatives.clear();
      for (std::size_t i = 0; i < pool.size(); ++i) {
        if (on_traj.contains(pool[i])) {
          sc.pos_segments.push_back(static_cast<int>(i));
          sc.pos_weights.push_back(1.0);
        } else {
          negatives.push_back(static_cast<int>(i));
        }
      }
    }
    sc.neg_segments = subsample(std::move(negatives), neg_cap, rng);
    if (!sc.pos_segments.empty()) plan.st.push_back(std::move(sc));
  }
  return plan;
}

LossBreakdown batch_loss_and_grads(const ModelParams& params,
                                   const GatGraph& graph, const BatchData& batch,
                                   const LossWeights& weights, ModelParams* grads,
                                   Rng* dropout_rng) {
  const auto batch_size = static_cast<Eigen::Index>(batch.originals.size());
  const int d = params.hyper.dim;
  const bool need_traj =
      weights.tt > 0.0 || weights.st > 0.0;

  GatCache gat_cache;
  const Matrix h_s = gat_forward(params, graph, grads ? &gat_cache : nullptr);

  Matrix traj_embeds(need_traj ? batch_size : 0, d);
  Matrix view_embeds(weights.tt > 0.0 ? batch_size : 0, d);
  std::vector<TrajEncodeCache> traj_caches(grads ? traj_embeds.rows() : 0);
  std::vector<TrajEncodeCache> view_caches(grads ? view_embeds.rows() : 0);
  for (Eigen::Index i = 0; i < traj_embeds.rows(); ++i) {
    traj_embeds.row(i) = encode_trajectory(params, h_s, *batch.originals[i],
                                           grads ? &traj_caches[i] : nullptr,
                                           dropout_rng)
                             .transpose();
  }
  for (Eigen::Index i = 0; i < view_embeds.rows(); ++i) {
    view_embeds.row(i) = encode_trajectory(params, h_s, batch.views[i],
                                           grads ? &view_caches[i] : nullptr,
                                           dropout_rng)
                             .transpose();
  }

  Matrix d_hs = grads ? Matrix::Zero(h_s.rows(), d) : Matrix();
  Matrix d_traj = grads ? Matrix::Zero(traj_embeds.rows(), d) : Matrix();
  Matrix d_view = grads ? Matrix::Zero(view_embeds.rows(), d) : Matrix();

  LossBreakdown out;
  if (weights.ss > 0.0) {
    out.ss = loss_ss(h_s, batch.plan, grads ? &d_hs : nullptr, weights.ss);
  }
  if (weights.tt > 0.0) {
    out.tt = loss_tt(traj_embeds, view_embeds, grads ? &d_traj : nullptr,
                     grads ? &d_view : nullptr, weights.tt);
  }
  if (weights.st > 0.0) {
    out.st = loss_st_weighted(h_s, traj_embeds, batch.plan,
                              grads ? &d_hs : nullptr,
                              grads ? &d_traj : nullptr, weights.st);
  }
  out.total = total_loss(out.ss, out.tt, out.st, weights);

  if (grads) {
    for (Eigen::Index i = 0; i < traj_embeds.rows(); ++i) {
      encode_trajectory_backward(params, traj_caches[i],
                                 d_traj.row(i).transpose(), *grads, d_hs);
    }
    for (Eigen::Index i = 0; i < view_embeds.rows(); ++i) {
      encode_trajectory_backward(params, view_caches[i],
                                 d_view.row(i).transpose(), *grads, d_hs);
    }
    gat_backward(params, graph, gat_cache, d_hs, *grads);
  }
  return out;
}

void AdamOptimizer::step(ModelParams& params, ModelParams& grads) {
  auto prefs = tensor_refs(params);
  auto grefs = tensor_refs(grads);
  if (m_.empty()) {
    m_.resize(prefs.size());
    v_.resize(prefs.size());
    for (std::size_t i = 0; i < prefs.size(); ++i) {
      m_[i] = Vector::Zero(static_cast<Eigen::Index>(prefs[i].size()));
      v_[i] = Vector::Zero(static_cast<Eigen::Index>(prefs[i].size()));
    }
  }

  if (clip_ > 0.0) {
    double sq = 0.0;
    for (const auto& g : grefs) {
      for (std::size_t k = 0; k < g.size(); ++k) sq += g.data[k] * g.data[k];
    }
    const double norm = std::sqrt(sq);
    if (norm > clip_) {
      const double scale = clip_ / norm;
      for (auto& g : grefs) {
        for (std::size_t k = 0; k < g.size(); ++k) g.data[k] *= scale;
      }
    }
  }

  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, t_);
  const double bc2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < prefs.size(); ++i) {
    double* p = prefs[i].data;
    const double* g = grefs[i].data;
    for (std::size_t k = 0; k < prefs[i].size(); ++k) {
      m_[i](static_cast<Eigen::Index>(k)) =
          beta1_ * m_[i](static_cast<Eigen::Index>(k)) + (1.0 - beta1_) * g[k];
      v_[i](static_cast<Eigen::Index>(k)) =
          beta2_ * v_[i](static_cast<Eigen::Index>(k)) +
          (1.0 - beta2_) * g[k] * g[k];
      const double mhat = m_[i](static_cast<Eigen::Index>(k)) / bc1;
      const double vhat = v_[i](static_cast<Eigen::Index>(k)) / bc2;
      p[k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

TrainResult train(const RoadNetwork& network, const TrajectoryCorpus& corpus,
                  const std::vector<RSTWeightVector>& rst_weights,
                  const TransitionAdjacency& transitions,
                  const TrainConfig& config) {
  config.validate();
  if (corpus.empty()) throw ValidationError("train: empty corpus");
  if (rst_weights.size() != corpus.size()) {
    throw ValidationError(cat("train: ", rst_weights.size(),
                              " RS-T vectors for ", corpus.size(),
                              " trajectories"));
  }
  HyperParams hyper = config.hyper;
  hyper.num_segments = static_cast<std::uint32_t>(network.size());

  const GatGraph graph = GatGraph::build(network);
  TrainResult result;
  result.params = init_params(config.seed, hyper);
  AdamOptimizer opt(config.learning_rate, config.grad_clip);

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  int global_step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng(substream_seed(config.seed, 0xe90c4, epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(shuffle_rng, i)]);
    }

    double epoch_sum = 0.0;
    int epoch_steps = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(
          order.size(), begin + static_cast<std::size_t>(config.batch_size));
      if (end - begin < 2) break;  // a single leftover trajectory cannot contrast

      Rng step_rng(substream_seed(config.seed, 0x57e9, global_step));
      BatchData batch;
      std::vector<const RSTWeightVector*> rst;
      for (std::size_t k = begin; k < end; ++k) {
        batch.originals.push_back(&corpus.trajectories[order[k]]);
        rst.push_back(&rst_weights[order[k]]);
      }
      for (const Trajectory* traj : batch.originals) {
        batch.views.push_back(
            noisy_view(network, *traj, config.augment, step_rng));
      }
      batch.plan = build_batch_plan(network, transitions, batch.originals, rst,
                                    config, step_rng);

      ModelParams grads = ModelParams::zeros_like(result.params);
      Rng dropout_rng(substream_seed(config.seed, 0xd809, global_step));
      const LossBreakdown loss = batch_loss_and_grads(
          result.params, graph, batch, config.loss_weights, &grads,
          config.hyper.dropout > 0.0 ? &dropout_rng : nullptr);
      if (!std::isfinite(loss.total)) {
        throw NumericError(cat("non-finite loss at step ", global_step));
      }
      opt.step(result.params, grads);

      result.steps.push_back({global_step, epoch, loss.ss, loss.tt, loss.st,
                              loss.total});
      epoch_sum += loss.total;
      ++epoch_steps;
      ++global_step;
    }
    if (epoch_steps == 0) {
      throw ValidationError("train: corpus too small for one batch of >= 2");
    }
    result.epoch_mean_loss.push_back(epoch_sum / epoch_steps);
  }
  return result;
}

namespace {

/// Small random instance for gradient checking: a sparse directed graph plus
/// a handful of random-walk trajectories.
struct CheckInstance {
  RoadNetwork network;
  TrajectoryCorpus corpus;
  std::vector<RSTWeightVector> rst;
  TransitionAdjacency transitions;
};

CheckInstance make_check_instance(std::uint64_t seed, double rst_threshold,
                                  double transition_threshold) {
  Rng rng(substream_seed(seed, 0xc11ec7));
  const std::size_t n = 12 + uniform_index(rng, 9);  // 12..20 segments
  std::vector<SegmentMeta> metas(n);
  for (std::size_t i = 0; i < n; ++i) {
    metas[i].id = static_cast<SegmentId>(i);
    metas[i].length_m = 50.0 + 100.0 * uniform01(rng);
  }
  std::vector<std::pair<SegmentId, SegmentId>> edges;
  for (SegmentId i = 0; i < n; ++i) {
    // ring edge keeps the graph connected, plus ~2 random chords
    edges.emplace_back(i, static_cast<SegmentId>((i + 1) % n));
    for (int k = 0; k < 2; ++k) {
      const auto j = static_cast<SegmentId>(uniform_index(rng, n));
      if (j != i) edges.emplace_back(i, j);
    }
  }
  CheckInstance inst;
  inst.network = RoadNetwork(std::move(metas), edges);

  for (int t = 0; t < 4; ++t) {
    Trajectory traj;
    traj.id = cat("g", t);
    SegmentId cur = static_cast<SegmentId>(uniform_index(rng, n));
    traj.segments.push_back(cur);
    const std::size_t len = 3 + uniform_index(rng, 4);  // 3..6
    while (traj.segments.size() < len) {
      const auto nbrs = inst.network.out_neighbors(cur);
      if (nbrs.empty()) break;
      cur = nbrs[uniform_index(rng, nbrs.size())];
      traj.segments.push_back(cur);
    }
    if (traj.segments.size() >= 3) inst.corpus.trajectories.push_back(traj);
  }

  inst.rst = rst_weights_for_corpus(inst.network, inst.corpus, rst_threshold);
  inst.transitions = binarize_transition(
      build_transition_counts(inst.corpus, inst.network.size()),
      transition_threshold);
  return inst;
}

}  // namespace

/// Smallest distance of any kinked activation input (GAT LeakyReLU logits
/// and ELU aggregates, transformer ReLU pre-activations) from zero across the
/// full forward pass of one batch.
double kink_margin(const ModelParams& params, const GatGraph& graph,
                   const BatchData& batch) {
  double margin = std::numeric_limits<double>::infinity();
  GatCache gat_cache;
  const Matrix h_s = gat_forward(params, graph, &gat_cache);
  for (const auto& layer : gat_cache.layers) {
    for (const auto& logits : layer.logits) {
      for (double z : logits) margin = std::min(margin, std::abs(z));
    }
    for (const auto& agg : layer.aggregate) {
      margin = std::min(margin, agg.cwiseAbs().minCoeff());
    }
  }
  auto scan_sequence = [&](const Trajectory& traj) {
    TrajEncodeCache cache;
    encode_trajectory(params, h_s, traj, &cache);
    for (const auto& layer : cache.trans.layers) {
      margin = std::min(margin, layer.ffn_pre.cwiseAbs().minCoeff());
    }
  };
  for (const Trajectory* traj : batch.originals) scan_sequence(*traj);
  for (const Trajectory& view : batch.views) scan_sequence(view);
  return margin;
}

GradCheckReport grad_check(const TrainConfig& config, std::uint64_t seed,
                           double fd_step, double min_margin) {
  if (min_margin < 0.0) min_margin = 5.0 * fd_step;
  TrainConfig cfg = config;
  cfg.hyper.dropout = 0.0;  // finite differences need a deterministic loss

  CheckInstance inst = make_check_instance(seed, cfg.rst_threshold,
                                           cfg.transition_threshold);
  cfg.hyper.num_segments = static_cast<std::uint32_t>(inst.network.size());
  cfg.hyper.validate();

  const GatGraph graph = GatGraph::build(inst.network);
  ModelParams params = init_params(seed, cfg.hyper);

  Rng plan_rng(substream_seed(seed, 0x91a9));
  BatchData batch;
  std::vector<const RSTWeightVector*> rst;
  for (std::size_t i = 0; i < inst.corpus.size(); ++i) {
    batch.originals.push_back(&inst.corpus.trajectories[i]);
    rst.push_back(&inst.rst[i]);
  }
  for (const Trajectory* traj : batch.originals) {
    batch.views.push_back(noisy_view(inst.network, *traj, cfg.augment, plan_rng));
  }
  batch.plan = build_batch_plan(inst.network, inst.transitions, batch.originals,
                                rst, cfg, plan_rng);

  GradCheckReport margin_probe;
  margin_probe.kink_margin = kink_margin(params, graph, batch);
  if (margin_probe.kink_margin < min_margin) {
    margin_probe.skipped = true;
    return margin_probe;
  }

  const std::vector<std::pair<std::string, LossWeights>> configs = {
      {"total", cfg.loss_weights},
      {"ss_only", {1.0, 0.0, 0.0}},
      {"tt_only", {0.0, 1.0, 0.0}},
      {"st_only", {0.0, 0.0, 1.0}},
  };

  GradCheckReport report;
  report.kink_margin = margin_probe.kink_margin;
  for (const auto& [label, weights] : configs) {
    ModelParams grads = ModelParams::zeros_like(params);
    batch_loss_and_grads(params, graph, batch, weights, &grads, nullptr);

    auto prefs = tensor_refs(params);
    auto grefs = tensor_refs(grads);
    GradCheckReport::Entry entry;
    entry.weights = label;
    for (std::size_t ti = 0; ti < prefs.size(); ++ti) {
      for (std::size_t k = 0; k < prefs[ti].size(); ++k) {
        double& value = prefs[ti].data[k];
        const double saved = value;
        value = saved + fd_step;
        const double up =
            batch_loss_and_grads(params, graph, batch, weights, nullptr, nullptr)
                .total;
        value = saved - fd_step;
        const double down =
            batch_loss_and_grads(params, graph, batch, weights, nullptr, nullptr)
                .total;
        value = saved;
        const double numeric = (up - down) / (2.0 * fd_step);
        const double analytic = grefs[ti].data[k];
        const double denom =
            std::max({std::abs(analytic), std::abs(numeric), 1e-3});
        const double rel = std::abs(analytic - numeric) / denom;
        if (rel > entry.max_rel_err) {
          entry.max_rel_err = rel;
          entry.worst_tensor = prefs[ti].name;
        }
      }
    }
    if (entry.max_rel_err > report.max_rel_err) {
      report.max_rel_err = entry.max_rel_err;
      report.worst_tensor = entry.worst_tensor;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

namespace {

constexpr char kMagic[4] = {'J', 'C', 'L', 'R'};
constexpr std::uint16_t kVersion = 1;

template <class T>
void put(std::string& buf, const T& v) {
  buf.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_str(std::string& buf, const std::string& s) {
  put<std::uint16_t>(buf, static_cast<std::uint16_t>(s.size()));
  buf.append(s);
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  template <class T>
  T get() {
    if (pos + sizeof(T) > buf.size()) throw Error("checkpoint: truncated record");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  std::string get_str() {
    const auto len = get<std::uint16_t>();
    if (pos + len > buf.size()) throw Error("checkpoint: truncated string");
    std::string s = buf.substr(pos, len);
    pos += len;
    return s;
  }
};

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::string buf;
  buf.append(kMagic, 4);
  put(buf, kVersion);

  const auto& h = params.hyper;
  const std::vector<std::pair<std::string, double>> hyper = {
      {"dim", static_cast<double>(h.dim)},
      {"heads", static_cast<double>(h.heads)},
      {"gat_layers", static_cast<double>(h.gat_layers)},
      {"trans_layers", static_cast<double>(h.trans_layers)},
      {"ffn_dim", static_cast<double>(h.ffn_dim)},
      {"max_seq_len", static_cast<double>(h.max_seq_len)},
      {"dropout", h.dropout},
      {"num_segments", static_cast<double>(h.num_segments)},
  };
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(hyper.size()));
  for (const auto& [name, value] : hyper) {
    put_str(buf, name);
    put(buf, value);
  }

  auto refs = tensor_refs(const_cast<ModelParams&>(params));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(refs.size()));
  for (const auto& ref : refs) {
    put_str(buf, ref.name);
    put<std::uint64_t>(buf, ref.rows);
    put<std::uint64_t>(buf, ref.cols);
    buf.append(reinterpret_cast<const char*>(ref.data),
               ref.size() * sizeof(double));
  }
  put<std::uint32_t>(buf, crc32(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(cat("cannot write ", path.string()));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(cat("cannot open ", path.string()));
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (buf.size() < 10 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw Error(cat(path.string(), ": not a JCLR checkpoint"));
  }
  std::uint32_t stored_crc;
  std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
  if (crc32(buf.data(), buf.size() - 4) != stored_crc) {
    throw Error(cat(path.string(), ": checksum mismatch (file truncated or corrupt)"));
  }

  Reader r{buf, 4};
  const auto version = r.get<std::uint16_t>();
  if (version != kVersion) {
    throw Error(cat(path.string(), ": unsupported checkpoint version ", version));
  }

  HyperParams h;
  const auto n_hyper = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_hyper; ++i) {
    const std::string name = r.get_str();
    const double value = r.get<double>();
    if (name == "dim") h.dim = static_cast<int>(value);
    else if (name == "heads") h.heads = static_cast<int>(value);
    else if (name == "gat_layers") h.gat_layers = static_cast<int>(value);
    else if (name == "trans_layers") h.trans_layers = static_cast<int>(value);
    else if (name == "ffn_dim") h.ffn_dim = static_cast<int>(value);
    else if (name == "max_seq_len") h.max_seq_len = static_cast<int>(value);
    else if (name == "dropout") h.dropout = value;
    else if (name == "num_segments") h.num_segments = static_cast<std::uint32_t>(value);
    else throw Error(cat(path.string(), ": unknown hyperparameter '", name, "'"));
  }
  h.validate();

  ModelParams params = init_params(0, h);
  auto refs = tensor_refs(params);
  const auto n_tensors = r.get<std::uint32_t>();
  if (n_tensors != refs.size()) {
    throw Error(cat(path.string(), ": expected ", refs.size(), " tensors, found ",
                    n_tensors));
  }
  for (auto& ref : refs) {
    const std::string name = r.get_str();
    const auto rows = r.get<std::uint64_t>();
    const auto cols = r.get<std::uint64_t>();
    if (name != ref.name) {
      throw Error(cat(path.string(), ": tensor order mismatch, expected '",
                      ref.name, "', found '", name, "'"));
    }
    if (rows != ref.rows || cols != ref.cols) {
      throw Error(cat(path.string(), ": shape mismatch for '", name, "': file ",
                      rows, "x", cols, ", model ", ref.rows, "x", ref.cols));
    }
    if (r.pos + ref.size() * sizeof(double) > buf.size()) {
      throw Error(cat(path.string(), ": truncated tensor '", name, "'"));
    }
    std::memcpy(ref.data, buf.data() + r.pos, ref.size() * sizeof(double));
    r.pos += ref.size() * sizeof(double);
  }
  return params;
}

void save_loss_log(const std::vector<StepLog>& steps,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(cat("cannot write ", path.string()));
  out << "step,epoch,l_ss,l_tt,l_st,total\n";
  out.precision(17);
  for (const StepLog& s : steps) {
    out << s.step << ',' << s.epoch << ',' << s.l_ss << ',' << s.l_tt << ','
        << s.l_st << ',' << s.total << '\n';
  }
}

}  // namespace jclr
