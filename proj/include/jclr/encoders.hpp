#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jclr/types.hpp"
#include "jclr/util.hpp"

namespace jclr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct HyperParams {
  int dim = 128;
  int heads = 4;
  int gat_layers = 2;
  int trans_layers = 4;
  int ffn_dim = 0;  // 0 selects 4*dim
  int max_seq_len = 128;
  double dropout = 0.1;
  std::uint32_t num_segments = 0;

  int head_dim() const { return dim / heads; }
  int ffn() const { return ffn_dim > 0 ? ffn_dim : 4 * dim; }
  void validate() const;

  bool operator==(const HyperParams&) const = default;
};

struct GatHeadParams {
  Matrix W;  // dim x dim projection
  Vector a;  // 2*dim attention weights, [source half | target half]
};
struct GatLayerParams {
  std::vector<GatHeadParams> heads;
};

struct TransLayerParams {
  std::vector<Matrix> wq, wk, wv;  // per head: dim x head_dim
  Matrix wo;                       // dim x dim
  Matrix w1;                       // dim x ffn
  Vector b1;                       // ffn
  Matrix w2;                       // ffn x dim
  Vector b2;                       // dim
  Vector ln1_g, ln1_b, ln2_g, ln2_b;  // dim
};

/// All learnable tensors. Also used as the gradient container (same shapes).
struct ModelParams {
  HyperParams hyper;
  Matrix seg_embed;  // |S| x dim
  std::vector<GatLayerParams> gat;
  std::vector<TransLayerParams> trans;

  static ModelParams zeros_like(const ModelParams& other);
};

/// Flat view over every tensor in a fixed, stable order. Rows/cols follow the
/// tensor's own shape (vectors report cols = 1).
struct TensorRef {
  std::string name;
  double* data;
  std::size_t rows, cols;
  std::size_t size() const { return rows * cols; }
};
std::vector<TensorRef> tensor_refs(ModelParams& params);

/// Uniform init scaled by 1/sqrt(fan_in); layer-norm gains 1, biases 0.
/// Deterministic per seed.
ModelParams init_params(std::uint64_t seed, const HyperParams& hyper);

/// GAT attention support: for each node, itself plus its out-neighbors.
struct GatGraph {
  std::vector<std::uint32_t> offsets;  // n+1
  std::vector<SegmentId> nbrs;
  static GatGraph build(const RoadNetwork& network);
  std::size_t size() const { return offsets.size() - 1; }
};

struct GatLayerCache {
  Matrix input;                       // n x dim
  std::vector<Matrix> projected;      // per head: n x dim (U = X W)
  std::vector<std::vector<double>> logits;  // per head, per support edge (pre-LeakyReLU)
  std::vector<std::vector<double>> alpha;   // per head, per support edge
  std::vector<Matrix> aggregate;      // per head: n x dim (pre-ELU)
};
struct GatCache {
  std::vector<GatLayerCache> layers;
  Matrix output;
};

/// Two-layer (configurable) multi-head graph attention over the structural
/// adjacency; per-head ELU outputs are summed across heads.
Matrix gat_forward(const ModelParams& params, const GatGraph& graph,
                   GatCache* cache = nullptr);
Matrix gat_forward(const ModelParams& params, const RoadNetwork& network);

/// Accumulates gradients of every GAT tensor and of seg_embed into `grads`
/// given dL/dH_S.
void gat_backward(const ModelParams& params, const GatGraph& graph,
                  const GatCache& cache, const Matrix& d_output,
                  ModelParams& grads);

/// Sinusoidal positional encoding: P[p,2i] = sin(p/w), P[p,2i+1] = cos(p/w),
/// w = 10000^(2i/d). Requires even d.
Matrix positional_encoding(int length, int dim);

struct LayerNormCache {
  Matrix xhat;
  Vector inv_std;
};
struct TransLayerCache {
  Matrix input;
  std::vector<Matrix> Q, K, V;  // per head: L x head_dim
  std::vector<Matrix> attn;     // per head: L x L row-softmax
  Matrix concat;                // L x dim
  Matrix mh_drop_mask;          // empty when dropout inactive
  LayerNormCache ln1;
  Matrix z;        // LN1 output
  Matrix ffn_pre;  // L x ffn, pre-ReLU
  Matrix ffn_drop_mask;
  LayerNormCache ln2;
};
struct TransCache {
  std::vector<TransLayerCache> layers;
  Matrix output;
  std::vector<std::uint8_t> pad;
};

/// Post-LN multi-head self-attention encoder stack. Padded key positions are
/// masked to -inf before the softmax. Dropout (on attention and FFN outputs)
/// is active only when `dropout_rng` is non-null.
Matrix transformer_forward(const ModelParams& params, const Matrix& X,
                           const std::vector<std::uint8_t>& pad_mask,
                           TransCache* cache = nullptr,
                           Rng* dropout_rng = nullptr);

void transformer_backward(const ModelParams& params, const TransCache& cache,
                          const Matrix& d_output, ModelParams& grads,
                          Matrix& d_input);

struct TrajEncodeCache {
  std::vector<SegmentId> segments;  // after truncation to max_seq_len
  TransCache trans;
};

/// h_tau = masked mean over transformer outputs of the gathered segment rows
/// plus positional encoding. Trajectories longer than max_seq_len keep their
/// first max_seq_len segments.
Vector encode_trajectory(const ModelParams& params, const Matrix& H_S,
                         const Trajectory& traj,
                         TrajEncodeCache* cache = nullptr,
                         Rng* dropout_rng = nullptr);

/// Propagates dL/dh_tau back through pooling, the transformer stack and the
/// gather, accumulating into `grads` and into dL/dH_S.
void encode_trajectory_backward(const ModelParams& params,
                                const TrajEncodeCache& cache, const Vector& dh,
                                ModelParams& grads, Matrix& d_hs);

}  // namespace jclr
