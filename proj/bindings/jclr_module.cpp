#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "jclr/augment.hpp"
#include "jclr/config.hpp"
#include "jclr/eval.hpp"
#include "jclr/io.hpp"
#include "jclr/objectives.hpp"
#include "jclr/rst.hpp"
#include "jclr/shortest_path.hpp"
#include "jclr/synth.hpp"
#include "jclr/trainer.hpp"
#include "jclr/transition.hpp"

namespace py = pybind11;
using namespace jclr;

namespace {

AugmentConfig augment_from_kwargs(double detour_frac, double mask_prob,
                                  double replace_prob, std::uint64_t seed) {
  AugmentConfig cfg;
  cfg.detour_frac = detour_frac;
  cfg.mask_prob = mask_prob;
  cfg.replace_prob = replace_prob;
  cfg.rng_seed = seed;
  return cfg;
}

py::dict report_to_dict(const EvalReport& report) {
  py::dict out;
  out["task"] = report.task;
  py::dict metrics;
  for (const auto& [k, v] : report.metrics) metrics[py::str(k)] = v;
  out["metrics"] = metrics;
  py::list folds;
  for (const auto& fold : report.folds) {
    py::dict fd;
    for (const auto& [k, v] : fold) fd[py::str(k)] = v;
    folds.append(fd);
  }
  out["folds"] = folds;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Joint road-network and trajectory contrastive embeddings";

  py::register_exception<Error>(m, "JclrError", PyExc_RuntimeError);

  py::class_<SegmentMeta>(m, "SegmentMeta")
      .def(py::init<>())
      .def_readwrite("id", &SegmentMeta::id)
      .def_readwrite("length_m", &SegmentMeta::length_m)
      .def_readwrite("label", &SegmentMeta::label)
      .def_readwrite("avg_speed", &SegmentMeta::avg_speed)
      .def("__repr__", [](const SegmentMeta& s) {
        return cat("SegmentMeta(id=", s.id, ", length_m=", s.length_m, ")");
      });

  py::class_<RoadNetwork>(m, "RoadNetwork")
      .def(py::init([](const std::vector<SegmentMeta>& segments,
                       const std::vector<std::pair<SegmentId, SegmentId>>& edges) {
             return RoadNetwork(segments, edges);
           }),
           py::arg("segments"), py::arg("edges"))
      .def("__len__", &RoadNetwork::size)
      .def_property_readonly("num_edges", &RoadNetwork::edge_count)
      .def("meta", &RoadNetwork::meta, py::arg("segment"),
           py::return_value_policy::copy)
      .def("out_neighbors",
           [](const RoadNetwork& n, SegmentId s) {
             auto span = n.out_neighbors(s);
             return std::vector<SegmentId>(span.begin(), span.end());
           })
      .def("in_neighbors",
           [](const RoadNetwork& n, SegmentId s) {
             auto span = n.in_neighbors(s);
             return std::vector<SegmentId>(span.begin(), span.end());
           })
      .def("has_edge", &RoadNetwork::has_edge)
      .def("edges", &RoadNetwork::edges);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init([](std::string id, std::vector<SegmentId> segments,
                       std::vector<double> timestamps) {
             Trajectory t;
             t.id = std::move(id);
             t.segments = std::move(segments);
             t.timestamps = std::move(timestamps);
             return t;
           }),
           py::arg("id"), py::arg("segments"),
           py::arg("timestamps") = std::vector<double>{})
      .def_readwrite("id", &Trajectory::id)
      .def_readwrite("segments", &Trajectory::segments)
      .def_readwrite("timestamps", &Trajectory::timestamps)
      .def("__len__", &Trajectory::length)
      .def_property_readonly("duration", &Trajectory::duration);

  py::class_<TrajectoryCorpus>(m, "TrajectoryCorpus")
      .def(py::init<>())
      .def(py::init([](std::vector<Trajectory> trajectories) {
             return TrajectoryCorpus{std::move(trajectories)};
           }),
           py::arg("trajectories"))
      .def_readwrite("trajectories", &TrajectoryCorpus::trajectories)
      .def("__len__", &TrajectoryCorpus::size);

  m.def("load_road_network", &load_road_network, py::arg("path"));
  m.def("save_road_network", &save_road_network, py::arg("network"), py::arg("path"));
  m.def("load_trajectories", &load_trajectories, py::arg("path"), py::arg("network"));
  m.def("save_trajectories", &save_trajectories, py::arg("corpus"), py::arg("path"));
  m.def("filter_trajectories", &filter_trajectories, py::arg("corpus"),
        "Keep trajectories with >= 3 segments and duration >= 60 s (or no timestamps).");

  // Transition graph.
  py::class_<TransitionCounts>(m, "TransitionCounts")
      .def("count", &TransitionCounts::count)
      .def("row_sum", &TransitionCounts::row_sum)
      .def("total", &TransitionCounts::total)
      .def_property_readonly("nnz", &TransitionCounts::nnz);
  py::class_<TransitionAdjacency>(m, "TransitionAdjacency")
      .def("has", &TransitionAdjacency::has)
      .def("row", &TransitionAdjacency::row, py::return_value_policy::copy)
      .def_property_readonly("threshold", &TransitionAdjacency::threshold)
      .def_property_readonly("nnz", &TransitionAdjacency::nnz);
  m.def("build_transition_counts",
        [](const TrajectoryCorpus& corpus, std::size_t num_segments) {
          return build_transition_counts(corpus, num_segments);
        },
        py::arg("corpus"), py::arg("num_segments"));
  m.def("binarize_transition", &binarize_transition, py::arg("counts"),
        py::arg("threshold"));
  m.def("context_set", &context_set, py::arg("network"), py::arg("transitions"),
        py::arg("segment"),
        "Structural plus transitional neighbors, excluding the segment itself.");

  // Shortest paths and RS-T weights.
  m.def("hop_distances_from",
        [](const RoadNetwork& network, SegmentId source) {
          return hop_distances_from(network, source).dist;
        },
        py::arg("network"), py::arg("source"));
  m.def("rst_weight_vector",
        [](const RoadNetwork& network, const Trajectory& traj, double threshold) {
          return rst_weight_vector(network, traj, threshold).weights;
        },
        py::arg("network"), py::arg("trajectory"), py::arg("threshold") = 0.5);
  m.def("rst_weights_for_corpus",
        [](const RoadNetwork& network, const TrajectoryCorpus& corpus,
           double threshold, unsigned threads) {
          const auto vecs = rst_weights_for_corpus(network, corpus, threshold, threads);
          Matrix out(vecs.size(), network.size());
          for (std::size_t i = 0; i < vecs.size(); ++i) {
            for (std::size_t j = 0; j < network.size(); ++j) {
              out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                  vecs[i].weights[j];
            }
          }
          return out;
        },
        py::arg("network"), py::arg("corpus"), py::arg("threshold") = 0.5,
        py::arg("threads") = 1);

  // Augmentations.
  m.def("detour",
        [](const RoadNetwork& network, const Trajectory& traj, double detour_frac,
           std::uint64_t seed) {
          Rng rng(seed);
          auto res = detour(network, traj, augment_from_kwargs(detour_frac, 0, 0, seed), rng);
          return py::make_tuple(res.trajectory, res.changed);
        },
        py::arg("network"), py::arg("trajectory"), py::arg("detour_frac") = 0.1,
        py::arg("seed") = 0);
  m.def("mask_segments",
        [](const Trajectory& traj, double mask_prob, std::uint64_t seed) {
          Rng rng(seed);
          return mask_segments(traj, augment_from_kwargs(0.1, mask_prob, 0, seed), rng);
        },
        py::arg("trajectory"), py::arg("mask_prob"), py::arg("seed") = 0);
  m.def("replace_segments",
        [](const RoadNetwork& network, const Trajectory& traj, double replace_prob,
           std::uint64_t seed) {
          Rng rng(seed);
          return replace_segments(network, traj,
                                  augment_from_kwargs(0.1, 0, replace_prob, seed), rng);
        },
        py::arg("network"), py::arg("trajectory"), py::arg("replace_prob"),
        py::arg("seed") = 0);
  m.def("noisy_view",
        [](const RoadNetwork& network, const Trajectory& traj, double detour_frac,
           double mask_prob, double replace_prob, std::uint64_t seed) {
          Rng rng(seed);
          return noisy_view(network, traj,
                            augment_from_kwargs(detour_frac, mask_prob, replace_prob, seed),
                            rng);
        },
        py::arg("network"), py::arg("trajectory"), py::arg("detour_frac") = 0.1,
        py::arg("mask_prob") = 0.15, py::arg("replace_prob") = 0.15,
        py::arg("seed") = 0);

  // Objectives.
  m.def("pair_score", &pair_score, py::arg("x"), py::arg("y"));
  m.def("js_mi",
        [](const std::vector<double>& pos, const std::vector<double>& neg) {
          return js_mi(pos, neg);
        },
        py::arg("pos_scores"), py::arg("neg_scores"),
        "Jensen-Shannon MI estimate over positive and negative scores.");

  // Synthetic city.
  py::class_<CityConfig>(m, "CityConfig")
      .def(py::init<>())
      .def_readwrite("grid_rows", &CityConfig::grid_rows)
      .def_readwrite("grid_cols", &CityConfig::grid_cols)
      .def_readwrite("num_road_types", &CityConfig::num_road_types)
      .def_readwrite("speed_by_type", &CityConfig::speed_by_type)
      .def_readwrite("num_trajectories", &CityConfig::num_trajectories)
      .def_readwrite("od_policy", &CityConfig::od_policy)
      .def_readwrite("route_noise", &CityConfig::route_noise)
      .def_readwrite("seed", &CityConfig::seed);
  m.def("generate_network", &generate_network, py::arg("config"));
  m.def("generate_trajectories", &generate_trajectories, py::arg("network"),
        py::arg("config"));

  // Model, training, embedding.
  py::class_<HyperParams>(m, "HyperParams")
      .def(py::init<>())
      .def_readwrite("dim", &HyperParams::dim)
      .def_readwrite("heads", &HyperParams::heads)
      .def_readwrite("gat_layers", &HyperParams::gat_layers)
      .def_readwrite("trans_layers", &HyperParams::trans_layers)
      .def_readwrite("ffn_dim", &HyperParams::ffn_dim)
      .def_readwrite("max_seq_len", &HyperParams::max_seq_len)
      .def_readwrite("dropout", &HyperParams::dropout)
      .def_readwrite("num_segments", &HyperParams::num_segments);

  py::class_<ModelParams>(m, "ModelParams")
      .def_property_readonly("hyper", [](const ModelParams& p) { return p.hyper; })
      .def_property_readonly("num_segments",
                             [](const ModelParams& p) { return p.hyper.num_segments; });
  m.def("init_params", &init_params, py::arg("seed"), py::arg("hyper"));
  m.def("save_checkpoint", &save_checkpoint, py::arg("params"), py::arg("path"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  py::class_<LossWeights>(m, "LossWeights")
      .def(py::init([](double ss, double tt, double st) {
             LossWeights w{ss, tt, st};
             w.validate();
             return w;
           }),
           py::arg("ss") = 0.1, py::arg("tt") = 0.1, py::arg("st") = 0.8)
      .def_readwrite("ss", &LossWeights::ss)
      .def_readwrite("tt", &LossWeights::tt)
      .def_readwrite("st", &LossWeights::st);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("hyper", &TrainConfig::hyper)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("loss_weights", &TrainConfig::loss_weights)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("transition_threshold", &TrainConfig::transition_threshold)
      .def_readwrite("rst_threshold", &TrainConfig::rst_threshold)
      .def_readwrite("augment", &TrainConfig::augment)
      .def_readwrite("neg_pool", &TrainConfig::neg_pool)
      .def_readwrite("max_batch_segments", &TrainConfig::max_batch_segments)
      .def_readwrite("grad_clip", &TrainConfig::grad_clip)
      .def_readwrite("literal_st_norm", &TrainConfig::literal_st_norm);

  py::class_<AugmentConfig>(m, "AugmentConfig")
      .def(py::init<>())
      .def_readwrite("detour_frac", &AugmentConfig::detour_frac)
      .def_readwrite("mask_prob", &AugmentConfig::mask_prob)
      .def_readwrite("replace_prob", &AugmentConfig::replace_prob)
      .def_readwrite("rng_seed", &AugmentConfig::rng_seed);

  py::class_<StepLog>(m, "StepLog")
      .def_readonly("step", &StepLog::step)
      .def_readonly("epoch", &StepLog::epoch)
      .def_readonly("l_ss", &StepLog::l_ss)
      .def_readonly("l_tt", &StepLog::l_tt)
      .def_readonly("l_st", &StepLog::l_st)
      .def_readonly("total", &StepLog::total);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("params", &TrainResult::params)
      .def_readonly("steps", &TrainResult::steps)
      .def_readonly("epoch_mean_loss", &TrainResult::epoch_mean_loss);

  m.def("train",
        [](const RoadNetwork& network, const TrajectoryCorpus& corpus,
           const TrainConfig& config) {
          const auto rst = rst_weights_for_corpus(network, corpus,
                                                  config.rst_threshold, 1);
          const auto transitions = binarize_transition(
              build_transition_counts(corpus, network.size()),
              config.transition_threshold);
          return train(network, corpus, rst, transitions, config);
        },
        py::arg("network"), py::arg("corpus"), py::arg("config"),
        "Train embeddings; RS-T weights and the transition graph are computed "
        "from the corpus.");

  m.def("segment_embeddings",
        [](const ModelParams& params, const RoadNetwork& network) {
          return gat_forward(params, network);
        },
        py::arg("params"), py::arg("network"),
        "Graph-attention outputs H_S, one row per segment.");
  m.def("trajectory_embedding",
        [](const ModelParams& params, const RoadNetwork& network,
           const Trajectory& traj) {
          const Matrix h_s = gat_forward(params, network);
          return encode_trajectory(params, h_s, traj);
        },
        py::arg("params"), py::arg("network"), py::arg("trajectory"));
  m.def("trajectory_embeddings",
        [](const ModelParams& params, const RoadNetwork& network,
           const TrajectoryCorpus& corpus) {
          const Matrix h_s = gat_forward(params, network);
          Matrix out(corpus.size(), params.hyper.dim);
          for (std::size_t i = 0; i < corpus.size(); ++i) {
            out.row(static_cast<Eigen::Index>(i)) =
                encode_trajectory(params, h_s, corpus.trajectories[i]).transpose();
          }
          return out;
        },
        py::arg("params"), py::arg("network"), py::arg("corpus"));
  m.def("positional_encoding", &positional_encoding, py::arg("length"), py::arg("dim"));

  // Gradient check.
  py::class_<GradCheckReport>(m, "GradCheckReport")
      .def_readonly("max_rel_err", &GradCheckReport::max_rel_err)
      .def_readonly("worst_tensor", &GradCheckReport::worst_tensor)
      .def("passed", &GradCheckReport::passed, py::arg("tol") = 1e-5);
  m.def("grad_check",
        [](const TrainConfig& config, std::uint64_t seed) {
          return grad_check(config, seed);
        },
        py::arg("config"), py::arg("seed") = 0);

  // Evaluations.
  m.def("eval_road_classification",
        [](const Matrix& h_s, const std::vector<std::optional<int>>& labels,
           int folds, std::uint64_t seed) {
          return report_to_dict(eval_road_classification(h_s, labels, folds, seed));
        },
        py::arg("embeddings"), py::arg("labels"), py::arg("folds") = 5,
        py::arg("seed") = 1);
  m.def("eval_speed_inference",
        [](const Matrix& h_s, const std::vector<std::optional<double>>& speeds,
           int folds, std::uint64_t seed) {
          return report_to_dict(eval_speed_inference(h_s, speeds, folds, seed));
        },
        py::arg("embeddings"), py::arg("speeds"), py::arg("folds") = 5,
        py::arg("seed") = 1);
  m.def("eval_similarity_search",
        [](const ModelParams& params, const RoadNetwork& network,
           const TrajectoryCorpus& database, int num_queries, double detour_frac,
           std::uint64_t seed, int hr_k, const std::string& metric) {
          const SimMetric sim = metric == "cosine" ? SimMetric::kCosine
                                                   : SimMetric::kDot;
          if (metric != "dot" && metric != "cosine") {
            throw ValidationError(cat("metric must be dot or cosine, got '",
                                      metric, "'"));
          }
          return report_to_dict(eval_similarity_search(
              params, network, database, num_queries,
              augment_from_kwargs(detour_frac, 0.15, 0.15, seed), seed, hr_k, sim));
        },
        py::arg("params"), py::arg("network"), py::arg("database"),
        py::arg("num_queries") = 200, py::arg("detour_frac") = 0.1,
        py::arg("seed") = 1, py::arg("hr_k") = 10, py::arg("metric") = "dot");
  m.def("eval_travel_time",
        [](const ModelParams& params, const RoadNetwork& network,
           const TrajectoryCorpus& corpus, double train_frac, std::uint64_t seed) {
          return report_to_dict(
              eval_travel_time(params, network, corpus, train_frac, seed));
        },
        py::arg("params"), py::arg("network"), py::arg("corpus"),
        py::arg("train_frac") = 0.8, py::arg("seed") = 1);
  m.def("derive_avg_speeds", &derive_avg_speeds, py::arg("network"), py::arg("corpus"));
  m.def("compute_metrics", &compute_metrics, py::arg("kind"), py::arg("truth"),
        py::arg("predictions"), py::arg("k") = 10);

  m.attr("__version__") = "0.1.0";
}
