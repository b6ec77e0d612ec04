#pragma once

#include <filesystem>
#include <vector>

#include "jclr/types.hpp"

namespace jclr {

struct RSTWeightVector;  // rst.hpp

/// Loads a road network from a line-delimited record file. Segment records
/// look like {"seg": 0, "length_m": 120.0, "label": 2, "avg_speed": 38.5}
/// (label/avg_speed may be null); edge records look like {"from": 0, "to": 1}.
RoadNetwork load_road_network(const std::filesystem::path& path);
void save_road_network(const RoadNetwork& network, const std::filesystem::path& path);

/// Loads trajectories from line-delimited records
/// {"id": "...", "segments": [...], "timestamps": [...]|null} and validates
/// each against the network. Record order is preserved.
TrajectoryCorpus load_trajectories(const std::filesystem::path& path,
                                   const RoadNetwork& network);
void save_trajectories(const TrajectoryCorpus& corpus,
                       const std::filesystem::path& path);

/// Sparse-matrix text format: one header line "rows,cols,nnz" followed by
/// one "row,col,value" line per nonzero.
struct SparseEntry {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  double value = 0.0;
};
struct SparseMatrixFile {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<SparseEntry> entries;
};
SparseMatrixFile load_sparse_matrix(const std::filesystem::path& path);
void save_sparse_matrix(const SparseMatrixFile& m, const std::filesystem::path& path);

/// RS-T weight vectors persist as line-delimited records
/// {"id": "...", "nz": [[segment, round(weight*1e6)], ...]} — fixed-point,
/// exact round-trip.
void save_rst_weights(const std::vector<RSTWeightVector>& weights,
                      std::size_t num_segments, const std::filesystem::path& path);
std::vector<RSTWeightVector> load_rst_weights(const std::filesystem::path& path,
                                              std::size_t num_segments);

/// Embedding export: header "id,e0,...,e{d-1}" then one CSV row per item.
void save_embeddings_csv(const std::vector<std::string>& ids,
                         const std::vector<std::vector<double>>& rows,
                         const std::filesystem::path& path);

}  // namespace jclr
