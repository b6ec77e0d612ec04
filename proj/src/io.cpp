#include "jclr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "jclr/rst.hpp"

namespace jclr {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(cat("cannot open ", path.string()));
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(cat("cannot write ", path.string()));
  return out;
}

json parse_line(const std::string& line, const std::filesystem::path& path,
                std::size_t lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ParseError(cat(path.string(), ":", lineno, ": malformed record"));
  }
  return j;
}

// Shortest decimal that round-trips a double.
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back = std::strtod(buf, nullptr);
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof probe, "%.*g", prec, v);
    if (std::strtod(probe, nullptr) == back) return probe;
  }
  return buf;
}

}  // namespace

RoadNetwork load_road_network(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<SegmentMeta> segments;
  std::vector<std::pair<SegmentId, SegmentId>> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, path, lineno);
    try {
      if (j.contains("seg")) {
        SegmentMeta meta;
        meta.id = j.at("seg").get<SegmentId>();
        meta.length_m = j.at("length_m").get<double>();
        if (j.contains("label") && !j.at("label").is_null()) {
          meta.label = j.at("label").get<int>();
        }
        if (j.contains("avg_speed") && !j.at("avg_speed").is_null()) {
          meta.avg_speed = j.at("avg_speed").get<double>();
        }
        segments.push_back(meta);
      } else if (j.contains("from")) {
        edges.emplace_back(j.at("from").get<SegmentId>(),
                           j.at("to").get<SegmentId>());
      } else {
        throw ParseError(cat(path.string(), ":", lineno,
                             ": record is neither a segment nor an edge"));
      }
    } catch (const json::exception& e) {
      throw ParseError(cat(path.string(), ":", lineno, ": ", e.what()));
    }
  }
  std::sort(segments.begin(), segments.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return RoadNetwork(std::move(segments), edges);
}

void save_road_network(const RoadNetwork& network,
                       const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const SegmentMeta& m : network.segments()) {
    json j{{"seg", m.id}, {"length_m", m.length_m}};
    j["label"] = m.label ? json(*m.label) : json(nullptr);
    j["avg_speed"] = m.avg_speed ? json(*m.avg_speed) : json(nullptr);
    out << j.dump() << '\n';
  }
  for (const auto& [from, to] : network.edges()) {
    out << json{{"from", from}, {"to", to}}.dump() << '\n';
  }
}

TrajectoryCorpus load_trajectories(const std::filesystem::path& path,
                                   const RoadNetwork& network) {
  auto in = open_input(path);
  TrajectoryCorpus corpus;
  std::string line;
  std::size_t lineno = 0;
  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, path, lineno);
    Trajectory traj;
    try {
      traj.id = j.at("id").get<std::string>();
      traj.segments = j.at("segments").get<std::vector<SegmentId>>();
      if (j.contains("timestamps") && !j.at("timestamps").is_null()) {
        traj.timestamps = j.at("timestamps").get<std::vector<double>>();
      }
    } catch (const json::exception& e) {
      throw ParseError(cat(path.string(), ":", lineno, ": ", e.what()));
    }
    validate_trajectory(traj, network);
    if (!seen.emplace(traj.id, lineno).second) {
      throw ValidationError(
          cat(path.string(), ":", lineno, ": duplicate trajectory id '",
              traj.id, "'"));
    }
    corpus.trajectories.push_back(std::move(traj));
  }
  return corpus;
}

void save_trajectories(const TrajectoryCorpus& corpus,
                       const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const Trajectory& t : corpus.trajectories) {
    json j{{"id", t.id}, {"segments", t.segments}};
    j["timestamps"] = t.has_timestamps() ? json(t.timestamps) : json(nullptr);
    out << j.dump() << '\n';
  }
}

SparseMatrixFile load_sparse_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(cat(path.string(), ": missing header"));
  }
  SparseMatrixFile m;
  std::size_t nnz = 0;
  if (std::sscanf(line.c_str(), "%u,%u,%zu", &m.rows, &m.cols, &nnz) != 3) {
    throw ParseError(cat(path.string(), ":1: expected rows,cols,nnz header"));
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    SparseEntry e;
    if (std::sscanf(line.c_str(), "%u,%u,%lf", &e.row, &e.col, &e.value) != 3) {
      throw ParseError(cat(path.string(), ":", lineno, ": expected row,col,value"));
    }
    if (e.row >= m.rows || e.col >= m.cols) {
      throw ValidationError(cat(path.string(), ":", lineno, ": entry (", e.row,
                                ",", e.col, ") outside ", m.rows, "x", m.cols));
    }
    m.entries.push_back(e);
  }
  if (m.entries.size() != nnz) {
    throw ParseError(cat(path.string(), ": header claims ", nnz,
                         " entries, file has ", m.entries.size()));
  }
  return m;
}

void save_sparse_matrix(const SparseMatrixFile& m,
                        const std::filesystem::path& path) {
  auto out = open_output(path);
  out << m.rows << ',' << m.cols << ',' << m.entries.size() << '\n';
  for (const SparseEntry& e : m.entries) {
    out << e.row << ',' << e.col << ',' << fmt_double(e.value) << '\n';
  }
}

void save_rst_weights(const std::vector<RSTWeightVector>& weights,
                      std::size_t num_segments,
                      const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const RSTWeightVector& w : weights) {
    if (w.weights.size() != num_segments) {
      throw ValidationError(cat("weight vector '", w.trajectory_id, "' has ",
                                w.weights.size(), " entries, expected ",
                                num_segments));
    }
    json nz = json::array();
    for (std::size_t i = 0; i < w.weights.size(); ++i) {
      if (w.weights[i] != 0.0) {
        nz.push_back({i, static_cast<std::int64_t>(std::llround(w.weights[i] * 1e6))});
      }
    }
    out << json{{"id", w.trajectory_id}, {"nz", std::move(nz)}}.dump() << '\n';
  }
}

std::vector<RSTWeightVector> load_rst_weights(const std::filesystem::path& path,
                                              std::size_t num_segments) {
  auto in = open_input(path);
  std::vector<RSTWeightVector> result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, path, lineno);
    RSTWeightVector w;
    w.weights.assign(num_segments, 0.0);
    try {
      w.trajectory_id = j.at("id").get<std::string>();
      for (const auto& pair : j.at("nz")) {
        auto seg = pair.at(0).get<std::size_t>();
        auto fixed = pair.at(1).get<std::int64_t>();
        if (seg >= num_segments) {
          throw ValidationError(cat(path.string(), ":", lineno,
                                    ": segment ", seg, " out of range"));
        }
        w.weights[seg] = static_cast<double>(fixed) / 1e6;
      }
    } catch (const json::exception& e) {
      throw ParseError(cat(path.string(), ":", lineno, ": ", e.what()));
    }
    result.push_back(std::move(w));
  }
  return result;
}

void save_embeddings_csv(const std::vector<std::string>& ids,
                         const std::vector<std::vector<double>>& rows,
                         const std::filesystem::path& path) {
  if (ids.size() != rows.size()) {
    throw ValidationError("embedding export: ids and rows differ in length");
  }
  auto out = open_output(path);
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  out << "id";
  for (std::size_t i = 0; i < dim; ++i) out << ",e" << i;
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << ids[r];
    for (double v : rows[r]) out << ',' << fmt_double(v);
    out << '\n';
  }
}

}  // namespace jclr
