#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "jclr/config.hpp"
#include "jclr/eval.hpp"
#include "jclr/io.hpp"
#include "jclr/synth.hpp"
#include "jclr/trainer.hpp"
#include "jclr/transition.hpp"

namespace {

using namespace jclr;
namespace fs = std::filesystem;

PipelineConfig make_config(const std::string& config_path,
                           const std::vector<std::string>& overrides) {
  PipelineConfig cfg;
  if (!config_path.empty()) cfg.load_file(config_path);
  for (const std::string& o : overrides) cfg.apply_override(o);
  return cfg;
}

void require_input(const fs::path& path, const std::string& what) {
  if (path.empty()) throw ConfigError(cat("no path configured for ", what));
  if (!fs::exists(path)) {
    throw IoError(cat("missing ", what, ": ", path.string()));
  }
}

RoadNetwork load_network(const PipelineConfig& cfg) {
  const fs::path path = cfg.get("paths.network");
  require_input(path, "network file");
  return load_road_network(path);
}

TrajectoryCorpus load_corpus(const PipelineConfig& cfg, const RoadNetwork& network) {
  const fs::path path = cfg.get("paths.trajectories");
  require_input(path, "trajectory file");
  return load_trajectories(path, network);
}

ModelParams load_model(const PipelineConfig& cfg, const RoadNetwork& network) {
  const fs::path path = cfg.get("paths.checkpoint");
  require_input(path, "checkpoint");
  ModelParams params = load_checkpoint(path);
  if (params.hyper.num_segments != network.size()) {
    throw ValidationError(cat("checkpoint trained on ",
                              params.hyper.num_segments,
                              " segments, network has ", network.size()));
  }
  return params;
}

void append_report(const PipelineConfig& cfg, EvalReport& report) {
  report.config_fingerprint = cfg.fingerprint();
  report.print_table(std::cout);
  const fs::path path = cfg.get("paths.reports");
  if (path.empty()) return;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError(cat("cannot write ", path.string()));
  out << report.to_json() << '\n';
}

int cmd_gen_city(const PipelineConfig& cfg) {
  const CityConfig city = cfg.city_config();
  const RoadNetwork network = generate_network(city);
  const TrajectoryCorpus corpus = generate_trajectories(network, city);
  save_road_network(network, cfg.get("paths.network"));
  save_trajectories(corpus, cfg.get("paths.trajectories"));
  std::cout << "generated " << network.size() << " segments, "
            << network.edge_count() << " edges, " << corpus.size()
            << " trajectories\n";
  return 0;
}

int cmd_build_transition(const PipelineConfig& cfg) {
  const RoadNetwork network = load_network(cfg);
  const TrajectoryCorpus corpus =
      filter_trajectories(load_corpus(cfg, network));
  const TransitionCounts counts = build_transition_counts(corpus, network.size());
  const TransitionAdjacency adjacency =
      binarize_transition(counts, cfg.get_double("train.transition_threshold"));

  auto out_path = [&](const char* key, const char* fallback) {
    const std::string value = cfg.get(key);
    return value.empty() ? std::string(fallback) : value;
  };
  SparseMatrixFile counts_file{
      static_cast<std::uint32_t>(network.size()),
      static_cast<std::uint32_t>(network.size()),
      {}};
  for (SegmentId i = 0; i < counts.num_segments(); ++i) {
    for (const auto& [j, c] : counts.row(i)) {
      counts_file.entries.push_back({i, j, static_cast<double>(c)});
    }
  }
  save_sparse_matrix(counts_file,
                     out_path("paths.transition_counts", "transition_counts.txt"));

  SparseMatrixFile adj_file{static_cast<std::uint32_t>(network.size()),
                            static_cast<std::uint32_t>(network.size()),
                            {}};
  for (SegmentId i = 0; i < adjacency.num_segments(); ++i) {
    for (SegmentId j : adjacency.row(i)) adj_file.entries.push_back({i, j, 1.0});
  }
  save_sparse_matrix(adj_file, out_path("paths.transition_adjacency",
                                        "transition_adjacency.txt"));
  std::cout << "transition counts nnz " << counts.nnz() << ", adjacency nnz "
            << adjacency.nnz() << " at t = "
            << cfg.get_double("train.transition_threshold") << '\n';
  return 0;
}

int cmd_compute_rst(const PipelineConfig& cfg) {
  const RoadNetwork network = load_network(cfg);
  const TrajectoryCorpus corpus =
      filter_trajectories(load_corpus(cfg, network));
  const auto weights = rst_weights_for_corpus(
      network, corpus, cfg.get_double("train.rst_threshold"),
      std::max(1u, std::thread::hardware_concurrency()));
  const std::string value = cfg.get("paths.rst_weights");
  const std::string path = value.empty() ? "rst_weights.jsonl" : value;
  save_rst_weights(weights, network.size(), path);
  std::cout << "wrote " << weights.size() << " RS-T weight vectors to " << path
            << '\n';
  return 0;
}

/// Transition adjacency and RS-T weights come from configured files when
/// present, else are computed in process from the filtered corpus.
struct TrainInputs {
  TransitionAdjacency transitions;
  std::vector<RSTWeightVector> rst;
};

TrainInputs prepare_train_inputs(const PipelineConfig& cfg,
                                 const RoadNetwork& network,
                                 const TrajectoryCorpus& corpus,
                                 const TrainConfig& train_cfg) {
  TrainInputs inputs;
  const std::string adj_path = cfg.get("paths.transition_adjacency");
  if (!adj_path.empty()) {
    require_input(adj_path, "transition adjacency");
    const SparseMatrixFile file = load_sparse_matrix(adj_path);
    if (file.rows != network.size() || file.cols != network.size()) {
      throw ValidationError(cat("transition adjacency is ", file.rows, "x",
                                file.cols, ", network has ", network.size(),
                                " segments"));
    }
    inputs.transitions =
        TransitionAdjacency(network.size(), train_cfg.transition_threshold);
    for (const SparseEntry& e : file.entries) {
      if (e.value != 0.0) inputs.transitions.mark(e.row, e.col);
    }
  } else {
    inputs.transitions = binarize_transition(
        build_transition_counts(corpus, network.size()),
        train_cfg.transition_threshold);
  }

  const std::string rst_path = cfg.get("paths.rst_weights");
  if (!rst_path.empty()) {
    require_input(rst_path, "RS-T weights");
    inputs.rst = load_rst_weights(rst_path, network.size());
    if (inputs.rst.size() != corpus.size()) {
      throw ValidationError(cat("RS-T file holds ", inputs.rst.size(),
                                " vectors, corpus has ", corpus.size()));
    }
  } else {
    inputs.rst = rst_weights_for_corpus(
        network, corpus, train_cfg.rst_threshold,
        std::max(1u, std::thread::hardware_concurrency()));
  }
  return inputs;
}

int cmd_train(const PipelineConfig& cfg) {
  const RoadNetwork network = load_network(cfg);
  const TrajectoryCorpus corpus =
      filter_trajectories(load_corpus(cfg, network));
  TrainConfig train_cfg = cfg.train_config();
  train_cfg.hyper.num_segments = static_cast<std::uint32_t>(network.size());
  const TrainInputs inputs =
      prepare_train_inputs(cfg, network, corpus, train_cfg);

  const TrainResult result =
      train(network, corpus, inputs.rst, inputs.transitions, train_cfg);
  save_checkpoint(result.params, cfg.get("paths.checkpoint"));
  save_loss_log(result.steps, cfg.get("paths.loss_log"));
  for (std::size_t e = 0; e < result.epoch_mean_loss.size(); ++e) {
    std::cout << "epoch " << e << " mean loss " << result.epoch_mean_loss[e]
              << '\n';
  }
  std::cout << "checkpoint written to " << cfg.get("paths.checkpoint") << '\n';
  return 0;
}

int cmd_embed(const PipelineConfig& cfg) {
  const RoadNetwork network = load_network(cfg);
  const ModelParams params = load_model(cfg, network);
  const Matrix h_s = gat_forward(params, network);

  std::vector<std::string> seg_ids(network.size());
  std::vector<std::vector<double>> seg_rows(network.size());
  for (std::size_t i = 0; i < network.size(); ++i) {
    seg_ids[i] = cat(i);
    seg_rows[i].assign(h_s.row(i).begin(), h_s.row(i).end());
  }
  save_embeddings_csv(seg_ids, seg_rows, cfg.get("paths.seg_embeddings"));
  std::cout << "segment embeddings -> " << cfg.get("paths.seg_embeddings") << '\n';

  const std::string traj_path = cfg.get("paths.trajectories");
  if (!traj_path.empty() && fs::exists(traj_path)) {
    const TrajectoryCorpus corpus = load_trajectories(traj_path, network);
    std::vector<std::string> ids(corpus.size());
    std::vector<std::vector<double>> rows(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      ids[i] = corpus.trajectories[i].id;
      const Vector h = encode_trajectory(params, h_s, corpus.trajectories[i]);
      rows[i].assign(h.begin(), h.end());
    }
    save_embeddings_csv(ids, rows, cfg.get("paths.traj_embeddings"));
    std::cout << "trajectory embeddings -> " << cfg.get("paths.traj_embeddings")
              << '\n';
  }
  return 0;
}

int cmd_eval_road_clf(const PipelineConfig& cfg) {
  const RoadNetwork network = load_network(cfg);
  const ModelParams params = load_model(cfg, network);
  const Matrix h_s = gat_forward(params, network);
  std::vector<std::optional<int>> labels(network.size());
  for (std::size_t i = 0; i < network.size(); ++i) {
    labels[i] = network.meta(static_cast<SegmentId>(i)).label;
  }
  EvalReport report = eval_road_classification(
      h_s, labels, cfg.get_int("eval.folds"), cfg.get_u64("eval.seed"));
  append_report(cfg, report);
  return 0;
}

int cmd_eval_speed(const PipelineConfig& cfg) {
  const RoadNetwork network = load_network(cfg);
  const ModelParams params = load_model(cfg, network);
  const Matrix h_s = gat_forward(params, network);
  std::vector<std::optional<double>> speeds(network.size());
  if (cfg.get_bool("eval.derive_speeds")) {
    const TrajectoryCorpus corpus = load_corpus(cfg, network);
    speeds = derive_avg_speeds(network, corpus);
  } else {
    for (std::size_t i = 0; i < network.size(); ++i) {
      speeds[i] = network.meta(static_cast<SegmentId>(i)).avg_speed;
    }
  }
  EvalReport report = eval_speed_inference(h_s, speeds, cfg.get_int("eval.folds"),
                                           cfg.get_u64("eval.seed"));
  append_report(cfg, report);
  return 0;
}

SimMetric sim_metric_from(const PipelineConfig& cfg) {
  const std::string& name = cfg.get("eval.sim_metric");
  if (name == "dot") return SimMetric::kDot;
  if (name == "cosine") return SimMetric::kCosine;
  throw ConfigError(cat("eval.sim_metric must be dot or cosine, got '", name, "'"));
}

int cmd_eval_sim_search(const PipelineConfig& cfg) {
  const RoadNetwork network = load_network(cfg);
  const ModelParams params = load_model(cfg, network);
  const TrajectoryCorpus corpus = load_corpus(cfg, network);
  EvalReport report = eval_similarity_search(
      params, network, corpus, cfg.get_int("eval.num_queries"),
      cfg.augment_config(), cfg.get_u64("eval.seed"), cfg.get_int("eval.hr_k"),
      sim_metric_from(cfg));
  append_report(cfg, report);
  return 0;
}

int cmd_eval_tte(const PipelineConfig& cfg) {
  const RoadNetwork network = load_network(cfg);
  const ModelParams params = load_model(cfg, network);
  const TrajectoryCorpus corpus = load_corpus(cfg, network);
  EvalReport report =
      eval_travel_time(params, network, corpus,
                       cfg.get_double("eval.tte_train_frac"),
                       cfg.get_u64("eval.seed"));
  append_report(cfg, report);
  return 0;
}

int cmd_grad_check(const PipelineConfig& cfg) {
  TrainConfig train_cfg = cfg.train_config();
  train_cfg.hyper.dim = cfg.get_int("gradcheck.dim");
  const int seeds = cfg.get_int("gradcheck.seeds");
  const double tol = cfg.get_double("gradcheck.tolerance");
  const std::uint64_t base = cfg.get_u64("train.seed");

  double worst = 0.0;
  std::string worst_tensor;
  int checked = 0;
  for (std::uint64_t s = base; checked < seeds && s < base + 8 * seeds + 16; ++s) {
    const GradCheckReport report = grad_check(train_cfg, s);
    if (report.skipped) {
      std::cout << "seed " << s << ": skipped, an activation sits "
                << report.kink_margin
                << " from a kink (finite differences undefined there)\n";
      continue;
    }
    ++checked;
    std::cout << "seed " << s << ": max rel err " << report.max_rel_err
              << " (" << report.worst_tensor << ")\n";
    if (report.max_rel_err > worst) {
      worst = report.max_rel_err;
      worst_tensor = report.worst_tensor;
    }
  }
  std::cout << (worst < tol && checked == seeds ? "PASS" : "FAIL")
            << ": max rel err " << worst << " over " << checked
            << " seeds (tolerance " << tol << ", worst " << worst_tensor
            << ")\n";
  return 0;  // a failing check is a reported result, not a process error
}

int cmd_sweep_lambda(const PipelineConfig& cfg) {
  const RoadNetwork network = load_network(cfg);
  const TrajectoryCorpus corpus =
      filter_trajectories(load_corpus(cfg, network));
  const std::vector<double> lambdas = cfg.get_double_list("sweep.lambda_st");
  if (lambdas.empty()) throw ConfigError("sweep.lambda_st is empty");

  std::ofstream out(cfg.get("sweep.out"));
  if (!out) throw IoError(cat("cannot write ", cfg.get("sweep.out")));
  out << "lambda_st,mi_f1,ma_f1,mr,hr\n";
  for (double lambda_st : lambdas) {
    TrainConfig train_cfg = cfg.train_config();
    train_cfg.hyper.num_segments = static_cast<std::uint32_t>(network.size());
    train_cfg.loss_weights.st = lambda_st;
    train_cfg.loss_weights.ss = (1.0 - lambda_st) / 2.0;
    train_cfg.loss_weights.tt = (1.0 - lambda_st) / 2.0;
    const TrainInputs inputs =
        prepare_train_inputs(cfg, network, corpus, train_cfg);
    const TrainResult result =
        train(network, corpus, inputs.rst, inputs.transitions, train_cfg);

    const Matrix h_s = gat_forward(result.params, network);
    std::vector<std::optional<int>> labels(network.size());
    for (std::size_t i = 0; i < network.size(); ++i) {
      labels[i] = network.meta(static_cast<SegmentId>(i)).label;
    }
    const EvalReport clf = eval_road_classification(
        h_s, labels, cfg.get_int("eval.folds"), cfg.get_u64("eval.seed"));
    const EvalReport sim = eval_similarity_search(
        result.params, network, corpus, cfg.get_int("eval.num_queries"),
        cfg.augment_config(), cfg.get_u64("eval.seed"), cfg.get_int("eval.hr_k"),
        sim_metric_from(cfg));

    out << lambda_st << ',' << clf.metric("mi_f1") << ',' << clf.metric("ma_f1")
        << ',' << sim.metric("mr") << ','
        << sim.metric(cat("hr@", cfg.get_int("eval.hr_k"))) << '\n';
    std::cout << "lambda_st " << lambda_st << ": mi_f1 " << clf.metric("mi_f1")
              << ", hr@" << cfg.get_int("eval.hr_k") << " "
              << sim.metric(cat("hr@", cfg.get_int("eval.hr_k"))) << '\n';
  }
  std::cout << "sweep written to " << cfg.get("sweep.out") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"road-network + trajectory contrastive embedding pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-city", "generate a synthetic grid city (network + trajectories)"},
      {"build-transition", "build and persist the transition matrices"},
      {"compute-rst", "precompute RS-T weight vectors"},
      {"train", "train embeddings on the contrastive objective"},
      {"embed", "export segment and trajectory embeddings as CSV"},
      {"eval-road-clf", "road-type classification probe"},
      {"eval-speed", "average-speed regression probe"},
      {"eval-sim-search", "detour-twin similarity search"},
      {"eval-tte", "travel-time estimation probe"},
      {"grad-check", "finite-difference gradient verification"},
      {"sweep-lambda", "rerun train+eval over a list of lambda_st values"},
  };
  for (const auto& [name, desc] : commands) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("-c,--config", config_path, "configuration file");
    sub->add_option("overrides", overrides, "key=value configuration overrides");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const PipelineConfig cfg = make_config(config_path, overrides);
    if (app.got_subcommand("gen-city")) return cmd_gen_city(cfg);
    if (app.got_subcommand("build-transition")) return cmd_build_transition(cfg);
    if (app.got_subcommand("compute-rst")) return cmd_compute_rst(cfg);
    if (app.got_subcommand("train")) return cmd_train(cfg);
    if (app.got_subcommand("embed")) return cmd_embed(cfg);
    if (app.got_subcommand("eval-road-clf")) return cmd_eval_road_clf(cfg);
    if (app.got_subcommand("eval-speed")) return cmd_eval_speed(cfg);
    if (app.got_subcommand("eval-sim-search")) return cmd_eval_sim_search(cfg);
    if (app.got_subcommand("eval-tte")) return cmd_eval_tte(cfg);
    if (app.got_subcommand("grad-check")) return cmd_grad_check(cfg);
    if (app.got_subcommand("sweep-lambda")) return cmd_sweep_lambda(cfg);
    std::cerr << "error: no command selected\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
