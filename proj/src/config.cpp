#include "jclr/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace jclr {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

PipelineConfig::PipelineConfig() {
  defaults_ = {
      // Input and output paths; empty means "not set".
      {"paths.network", "network.jsonl"},
      {"paths.trajectories", "trajectories.jsonl"},
      {"paths.transition_counts", ""},
      {"paths.transition_adjacency", ""},
      {"paths.rst_weights", ""},
      {"paths.checkpoint", "model.jclr"},
      {"paths.loss_log", "loss_log.csv"},
      {"paths.seg_embeddings", "segment_embeddings.csv"},
      {"paths.traj_embeddings", "trajectory_embeddings.csv"},
      {"paths.reports", "eval_reports.jsonl"},

      // Synthetic city.
      {"city.rows", "8"},
      {"city.cols", "8"},
      {"city.num_road_types", "5"},
      {"city.speed_by_type", ""},  // comma list; empty selects built-in defaults
      {"city.num_trajectories", "2000"},
      {"city.od_policy", "far"},
      {"city.route_noise", "0.1"},
      {"city.seed", "7"},

      // Model and training.
      {"train.dim", "128"},
      {"train.heads", "4"},
      {"train.gat_layers", "2"},
      {"train.trans_layers", "4"},
      {"train.ffn_dim", "0"},
      {"train.max_seq_len", "128"},
      {"train.dropout", "0.1"},
      {"train.batch_size", "256"},
      {"train.epochs", "10"},
      {"train.learning_rate", "0.001"},
      {"train.lambda_ss", "0.1"},
      {"train.lambda_tt", "0.1"},
      {"train.lambda_st", "0.8"},
      {"train.seed", "42"},
      {"train.transition_threshold", "0.02"},
      {"train.rst_threshold", "0.5"},
      {"train.neg_pool", "0"},
      {"train.max_batch_segments", "512"},
      {"train.grad_clip", "5.0"},
      {"train.literal_st_norm", "false"},
      {"train.precision", "f64"},

      // Augmentation.
      {"augment.detour_frac", "0.1"},
      {"augment.mask_prob", "0.15"},
      {"augment.replace_prob", "0.15"},

      // Evaluation.
      {"eval.folds", "5"},
      {"eval.seed", "1"},
      {"eval.num_queries", "200"},
      {"eval.hr_k", "10"},
      {"eval.tte_train_frac", "0.8"},
      {"eval.derive_speeds", "false"},
      {"eval.sim_metric", "dot"},

      // Lambda sweep.
      {"sweep.lambda_st", "0.0,0.2,0.4,0.6,0.8,1.0"},
      {"sweep.out", "lambda_sweep.csv"},

      // Gradient check.
      {"gradcheck.seeds", "20"},
      {"gradcheck.tolerance", "1e-5"},
      {"gradcheck.dim", "8"},
  };
  values_ = defaults_;
}

void PipelineConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(cat("cannot open config ", path.string()));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(cat(path.string(), ":", lineno,
                            ": expected 'key = value'"));
    }
    set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

void PipelineConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError(cat("override '", assignment, "' is not key=value"));
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (!defaults_.contains(key)) {
    throw ConfigError(cat("unknown configuration key '", key, "'"));
  }
  values_[key] = value;
}

const std::string& PipelineConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError(cat("unknown configuration key '", key, "'"));
  }
  return it->second;
}

double PipelineConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  const double parsed = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError(cat("key '", key, "': '", v, "' is not a number"));
  }
  return parsed;
}

int PipelineConfig::get_int(const std::string& key) const {
  const double v = get_double(key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ConfigError(cat("key '", key, "': '", get(key), "' is not an integer"));
  }
  return i;
}

std::uint64_t PipelineConfig::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError(cat("key '", key, "': '", v, "' is not an unsigned integer"));
  }
  return parsed;
}

bool PipelineConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(cat("key '", key, "': '", v, "' is not a boolean"));
}

std::vector<double> PipelineConfig::get_double_list(const std::string& key) const {
  const std::string& v = get(key);
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < v.size()) {
    auto comma = v.find(',', pos);
    if (comma == std::string::npos) comma = v.size();
    const std::string item = trim(v.substr(pos, comma - pos));
    if (!item.empty()) {
      char* end = nullptr;
      const double parsed = std::strtod(item.c_str(), &end);
      if (end == item.c_str() || *end != '\0') {
        throw ConfigError(cat("key '", key, "': '", item, "' is not a number"));
      }
      out.push_back(parsed);
    }
    pos = comma + 1;
  }
  return out;
}

std::string PipelineConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

std::string PipelineConfig::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(dump())));
  return buf;
}

CityConfig PipelineConfig::city_config() const {
  CityConfig cfg;
  cfg.grid_rows = get_int("city.rows");
  cfg.grid_cols = get_int("city.cols");
  cfg.num_road_types = get_int("city.num_road_types");
  cfg.speed_by_type = get_double_list("city.speed_by_type");
  cfg.num_trajectories = get_int("city.num_trajectories");
  cfg.od_policy = get("city.od_policy");
  cfg.route_noise = get_double("city.route_noise");
  cfg.seed = get_u64("city.seed");
  cfg.validate();
  return cfg;
}

AugmentConfig PipelineConfig::augment_config() const {
  AugmentConfig cfg;
  cfg.detour_frac = get_double("augment.detour_frac");
  cfg.mask_prob = get_double("augment.mask_prob");
  cfg.replace_prob = get_double("augment.replace_prob");
  cfg.rng_seed = get_u64("train.seed");
  cfg.validate();
  return cfg;
}

TrainConfig PipelineConfig::train_config() const {
  TrainConfig cfg;
  cfg.hyper.dim = get_int("train.dim");
  cfg.hyper.heads = get_int("train.heads");
  cfg.hyper.gat_layers = get_int("train.gat_layers");
  cfg.hyper.trans_layers = get_int("train.trans_layers");
  cfg.hyper.ffn_dim = get_int("train.ffn_dim");
  cfg.hyper.max_seq_len = get_int("train.max_seq_len");
  cfg.hyper.dropout = get_double("train.dropout");
  cfg.batch_size = get_int("train.batch_size");
  cfg.epochs = get_int("train.epochs");
  cfg.learning_rate = get_double("train.learning_rate");
  cfg.loss_weights.ss = get_double("train.lambda_ss");
  cfg.loss_weights.tt = get_double("train.lambda_tt");
  cfg.loss_weights.st = get_double("train.lambda_st");
  cfg.seed = get_u64("train.seed");
  cfg.transition_threshold = get_double("train.transition_threshold");
  cfg.rst_threshold = get_double("train.rst_threshold");
  cfg.neg_pool = get_int("train.neg_pool");
  cfg.max_batch_segments = get_int("train.max_batch_segments");
  cfg.grad_clip = get_double("train.grad_clip");
  cfg.literal_st_norm = get_bool("train.literal_st_norm");
  cfg.precision = get("train.precision");
  cfg.augment = augment_config();
  return cfg;
}

}  // namespace jclr
