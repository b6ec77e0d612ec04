#include "jclr/encoders.hpp"

#include <algorithm>
#include <cmath>

namespace jclr {

namespace {

constexpr double kLeakySlope = 0.2;
constexpr double kLnEps = 1e-5;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double leaky_relu(double x) { return x > 0.0 ? x : kLeakySlope * x; }
double leaky_relu_grad(double x) { return x > 0.0 ? 1.0 : kLeakySlope; }
double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

Matrix uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols, double bound) {
  Matrix m(rows, cols);
  // Row-major fill order so the draw sequence is shape-stable.
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = (2.0 * uniform01(rng) - 1.0) * bound;
    }
  }
  return m;
}

Matrix dropout_mask(Rng& rng, std::size_t rows, std::size_t cols, double p) {
  Matrix mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      mask(r, c) = uniform01(rng) < p ? 0.0 : keep_scale;
    }
  }
  return mask;
}

/// y = g .* (x - mu) / sqrt(var + eps) + b, row-wise.
Matrix layer_norm(const Matrix& x, const Vector& gain, const Vector& bias,
                  LayerNormCache& cache) {
  const auto rows = x.rows();
  const auto cols = x.cols();
  cache.xhat.resize(rows, cols);
  cache.inv_std.resize(rows);
  Matrix y(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLnEps);
    cache.inv_std(r) = inv;
    cache.xhat.row(r) = (x.row(r).array() - mu) * inv;
    y.row(r) = cache.xhat.row(r).cwiseProduct(gain.transpose()) + bias.transpose();
  }
  return y;
}

void layer_norm_backward(const LayerNormCache& cache, const Vector& gain,
                         const Matrix& dy, Vector& d_gain, Vector& d_bias,
                         Matrix& dx) {
  const auto rows = dy.rows();
  const auto cols = dy.cols();
  dx.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    d_bias += dy.row(r).transpose();
    d_gain += dy.row(r).cwiseProduct(cache.xhat.row(r)).transpose();
    const Eigen::RowVectorXd dxhat = dy.row(r).cwiseProduct(gain.transpose());
    const double mean_dxhat = dxhat.mean();
    const double mean_dxhat_xhat = dxhat.cwiseProduct(cache.xhat.row(r)).mean();
    dx.row(r) = cache.inv_std(r) *
                (dxhat.array() - mean_dxhat -
                 cache.xhat.row(r).array() * mean_dxhat_xhat);
  }
  (void)cols;
}

}  // namespace

void HyperParams::validate() const {
  if (dim <= 0 || heads <= 0 || gat_layers <= 0 || trans_layers <= 0) {
    throw ValidationError("hyperparameters must be positive");
  }
  if (dim % heads != 0) {
    throw ValidationError(cat("dim ", dim, " not divisible by heads ", heads));
  }
  if (dim % 2 != 0) {
    throw ValidationError("dim must be even for sinusoidal positions");
  }
  if (max_seq_len <= 0) throw ValidationError("max_seq_len must be positive");
  if (dropout < 0.0 || dropout >= 1.0) {
    throw ValidationError("dropout must lie in [0,1)");
  }
}

ModelParams ModelParams::zeros_like(const ModelParams& other) {
  ModelParams z;
  z.hyper = other.hyper;
  z.seg_embed = Matrix::Zero(other.seg_embed.rows(), other.seg_embed.cols());
  z.gat.resize(other.gat.size());
  for (std::size_t l = 0; l < other.gat.size(); ++l) {
    z.gat[l].heads.resize(other.gat[l].heads.size());
    for (std::size_t h = 0; h < other.gat[l].heads.size(); ++h) {
      const auto& src = other.gat[l].heads[h];
      z.gat[l].heads[h].W = Matrix::Zero(src.W.rows(), src.W.cols());
      z.gat[l].heads[h].a = Vector::Zero(src.a.size());
    }
  }
  z.trans.resize(other.trans.size());
  for (std::size_t l = 0; l < other.trans.size(); ++l) {
    const auto& src = other.trans[l];
    auto& dst = z.trans[l];
    auto zero_all = [](const std::vector<Matrix>& in, std::vector<Matrix>& out) {
      out.resize(in.size());
      for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = Matrix::Zero(in[i].rows(), in[i].cols());
      }
    };
    zero_all(src.wq, dst.wq);
    zero_all(src.wk, dst.wk);
    zero_all(src.wv, dst.wv);
    dst.wo = Matrix::Zero(src.wo.rows(), src.wo.cols());
    dst.w1 = Matrix::Zero(src.w1.rows(), src.w1.cols());
    dst.b1 = Vector::Zero(src.b1.size());
    dst.w2 = Matrix::Zero(src.w2.rows(), src.w2.cols());
    dst.b2 = Vector::Zero(src.b2.size());
    dst.ln1_g = Vector::Zero(src.ln1_g.size());
    dst.ln1_b = Vector::Zero(src.ln1_b.size());
    dst.ln2_g = Vector::Zero(src.ln2_g.size());
    dst.ln2_b = Vector::Zero(src.ln2_b.size());
  }
  return z;
}

std::vector<TensorRef> tensor_refs(ModelParams& params) {
  std::vector<TensorRef> refs;
  auto add_m = [&](std::string name, Matrix& m) {
    refs.push_back({std::move(name), m.data(), static_cast<std::size_t>(m.rows()),
                    static_cast<std::size_t>(m.cols())});
  };
  auto add_v = [&](std::string name, Vector& v) {
    refs.push_back({std::move(name), v.data(), static_cast<std::size_t>(v.size()), 1});
  };
  add_m("seg_embed", params.seg_embed);
  for (std::size_t l = 0; l < params.gat.size(); ++l) {
    for (std::size_t h = 0; h < params.gat[l].heads.size(); ++h) {
      add_m(cat("gat.", l, ".h", h, ".W"), params.gat[l].heads[h].W);
      add_v(cat("gat.", l, ".h", h, ".a"), params.gat[l].heads[h].a);
    }
  }
  for (std::size_t l = 0; l < params.trans.size(); ++l) {
    auto& t = params.trans[l];
    for (std::size_t h = 0; h < t.wq.size(); ++h) {
      add_m(cat("trans.", l, ".wq", h), t.wq[h]);
      add_m(cat("trans.", l, ".wk", h), t.wk[h]);
      add_m(cat("trans.", l, ".wv", h), t.wv[h]);
    }
    add_m(cat("trans.", l, ".wo"), t.wo);
    add_m(cat("trans.", l, ".w1"), t.w1);
    add_v(cat("trans.", l, ".b1"), t.b1);
    add_m(cat("trans.", l, ".w2"), t.w2);
    add_v(cat("trans.", l, ".b2"), t.b2);
    add_v(cat("trans.", l, ".ln1_g"), t.ln1_g);
    add_v(cat("trans.", l, ".ln1_b"), t.ln1_b);
    add_v(cat("trans.", l, ".ln2_g"), t.ln2_g);
    add_v(cat("trans.", l, ".ln2_b"), t.ln2_b);
  }
  return refs;
}

ModelParams init_params(std::uint64_t seed, const HyperParams& hyper) {
  hyper.validate();
  if (hyper.num_segments == 0) {
    throw ValidationError("init_params: num_segments must be set");
  }
  Rng rng(seed);
  const int d = hyper.dim;
  const int dk = hyper.head_dim();
  const int dff = hyper.ffn();

  ModelParams p;
  p.hyper = hyper;
  p.seg_embed = uniform_matrix(rng, hyper.num_segments, d, 1.0 / std::sqrt(d));
  p.gat.resize(hyper.gat_layers);
  for (auto& layer : p.gat) {
    layer.heads.resize(hyper.heads);
    for (auto& head : layer.heads) {
      head.W = uniform_matrix(rng, d, d, 1.0 / std::sqrt(d));
      head.a = uniform_matrix(rng, 2 * d, 1, 1.0 / std::sqrt(2.0 * d));
    }
  }
  p.trans.resize(hyper.trans_layers);
  for (auto& layer : p.trans) {
    layer.wq.resize(hyper.heads);
    layer.wk.resize(hyper.heads);
    layer.wv.resize(hyper.heads);
    for (int h = 0; h < hyper.heads; ++h) {
      layer.wq[h] = uniform_matrix(rng, d, dk, 1.0 / std::sqrt(d));
      layer.wk[h] = uniform_matrix(rng, d, dk, 1.0 / std::sqrt(d));
      layer.wv[h] = uniform_matrix(rng, d, dk, 1.0 / std::sqrt(d));
    }
    layer.wo = uniform_matrix(rng, d, d, 1.0 / std::sqrt(d));
    layer.w1 = uniform_matrix(rng, d, dff, 1.0 / std::sqrt(d));
    layer.b1 = Vector::Zero(dff);
    layer.w2 = uniform_matrix(rng, dff, d, 1.0 / std::sqrt(dff));
    layer.b2 = Vector::Zero(d);
    layer.ln1_g = Vector::Ones(d);
    layer.ln1_b = Vector::Zero(d);
    layer.ln2_g = Vector::Ones(d);
    layer.ln2_b = Vector::Zero(d);
  }
  return p;
}

GatGraph GatGraph::build(const RoadNetwork& network) {
  GatGraph g;
  const std::size_t n = network.size();
  g.offsets.assign(n + 1, 0);
  for (SegmentId i = 0; i < n; ++i) {
    g.offsets[i + 1] = g.offsets[i] +
                       static_cast<std::uint32_t>(network.out_neighbors(i).size()) + 1;
  }
  g.nbrs.resize(g.offsets.back());
  for (SegmentId i = 0; i < n; ++i) {
    std::uint32_t k = g.offsets[i];
    g.nbrs[k++] = i;  // self first
    for (SegmentId j : network.out_neighbors(i)) g.nbrs[k++] = j;
  }
  return g;
}

Matrix gat_forward(const ModelParams& params, const GatGraph& graph,
                   GatCache* cache) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  const int d = params.hyper.dim;
  if (params.seg_embed.rows() != n) {
    throw ValidationError(cat("gat_forward: network has ", n,
                              " segments, params hold ", params.seg_embed.rows()));
  }
  if (cache) cache->layers.assign(params.gat.size(), {});

  Matrix x = params.seg_embed;
  for (std::size_t l = 0; l < params.gat.size(); ++l) {
    const auto& layer = params.gat[l];
    GatLayerCache* lc = cache ? &cache->layers[l] : nullptr;
    if (lc) {
      lc->input = x;
      lc->projected.resize(layer.heads.size());
      lc->logits.resize(layer.heads.size());
      lc->alpha.resize(layer.heads.size());
      lc->aggregate.resize(layer.heads.size());
    }
    Matrix out = Matrix::Zero(n, d);
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      const auto& head = layer.heads[h];
      const Matrix u = x * head.W;
      const Vector src_score = u * head.a.head(d);
      const Vector dst_score = u * head.a.tail(d);

      std::vector<double> logits(graph.nbrs.size());
      std::vector<double> alpha(graph.nbrs.size());
      Matrix agg = Matrix::Zero(n, d);
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::uint32_t begin = graph.offsets[i];
        const std::uint32_t end = graph.offsets[i + 1];
        double max_logit = kNegInf;
        for (std::uint32_t e = begin; e < end; ++e) {
          logits[e] = src_score(i) + dst_score(graph.nbrs[e]);
          max_logit = std::max(max_logit, leaky_relu(logits[e]));
        }
        double sum = 0.0;
        for (std::uint32_t e = begin; e < end; ++e) {
          alpha[e] = std::exp(leaky_relu(logits[e]) - max_logit);
          sum += alpha[e];
        }
        for (std::uint32_t e = begin; e < end; ++e) {
          alpha[e] /= sum;
          agg.row(i) += alpha[e] * u.row(graph.nbrs[e]);
        }
      }
      out += agg.unaryExpr([](double v) { return elu(v); });
      if (lc) {
        lc->projected[h] = u;
        lc->logits[h] = std::move(logits);
        lc->alpha[h] = std::move(alpha);
        lc->aggregate[h] = std::move(agg);
      }
    }
    x = std::move(out);
  }
  if (cache) cache->output = x;
  return x;
}

Matrix gat_forward(const ModelParams& params, const RoadNetwork& network) {
  if (network.size() == 0) throw ValidationError("gat_forward: empty network");
  return gat_forward(params, GatGraph::build(network));
}

void gat_backward(const ModelParams& params, const GatGraph& graph,
                  const GatCache& cache, const Matrix& d_output,
                  ModelParams& grads) {
  const auto n = static_cast<Eigen::Index>(graph.size());
  const int d = params.hyper.dim;

  Matrix dx = d_output;
  for (std::size_t l = params.gat.size(); l-- > 0;) {
    const auto& layer = params.gat[l];
    const auto& lc = cache.layers[l];
    Matrix dx_prev = Matrix::Zero(n, d);
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      const auto& head = layer.heads[h];
      const Matrix& u = lc.projected[h];
      const auto& alpha = lc.alpha[h];
      const auto& logits = lc.logits[h];

      // dL/d(aggregate) through the ELU.
      const Matrix d_agg =
          dx.cwiseProduct(lc.aggregate[h].unaryExpr([](double v) { return elu_grad(v); }));

      Matrix du = Matrix::Zero(n, d);
      Vector d_src = Vector::Zero(n);
      Vector d_dst = Vector::Zero(n);
      std::vector<double> d_alpha(graph.nbrs.size());
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::uint32_t begin = graph.offsets[i];
        const std::uint32_t end = graph.offsets[i + 1];
        double dot = 0.0;
        for (std::uint32_t e = begin; e < end; ++e) {
          const SegmentId j = graph.nbrs[e];
          d_alpha[e] = d_agg.row(i).dot(u.row(j));
          du.row(j) += alpha[e] * d_agg.row(i);
          dot += alpha[e] * d_alpha[e];
        }
        for (std::uint32_t e = begin; e < end; ++e) {
          const SegmentId j = graph.nbrs[e];
          const double dz = alpha[e] * (d_alpha[e] - dot) * leaky_relu_grad(logits[e]);
          d_src(i) += dz;
          d_dst(j) += dz;
        }
      }
      du.noalias() += d_src * head.a.head(d).transpose();
      du.noalias() += d_dst * head.a.tail(d).transpose();

      auto& ghead = grads.gat[l].heads[h];
      ghead.a.head(d).noalias() += u.transpose() * d_src;
      ghead.a.tail(d).noalias() += u.transpose() * d_dst;
      ghead.W.noalias() += lc.input.transpose() * du;
      dx_prev.noalias() += du * head.W.transpose();
    }
    dx = std::move(dx_prev);
  }
  grads.seg_embed += dx;
}

Matrix positional_encoding(int length, int dim) {
  if (dim % 2 != 0) throw ValidationError("positional encoding needs even dim");
  Matrix p(length, dim);
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; 2 * i < dim; ++i) {
      const double omega = std::pow(10000.0, 2.0 * i / dim);
      p(pos, 2 * i) = std::sin(pos / omega);
      p(pos, 2 * i + 1) = std::cos(pos / omega);
    }
  }
  return p;
}

Matrix transformer_forward(const ModelParams& params, const Matrix& X,
                           const std::vector<std::uint8_t>& pad_mask,
                           TransCache* cache, Rng* dropout_rng) {
  const auto len = X.rows();
  const int d = params.hyper.dim;
  const int heads = params.hyper.heads;
  const int dk = params.hyper.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  if (!pad_mask.empty() && pad_mask.size() != static_cast<std::size_t>(len)) {
    throw ValidationError("pad mask length does not match sequence length");
  }
  const bool use_dropout = dropout_rng != nullptr && params.hyper.dropout > 0.0;

  if (cache) {
    cache->layers.assign(params.trans.size(), {});
    cache->pad = pad_mask;
  }

  Matrix x = X;
  for (std::size_t l = 0; l < params.trans.size(); ++l) {
    const auto& layer = params.trans[l];
    TransLayerCache* lc = cache ? &cache->layers[l] : nullptr;
    if (lc) {
      lc->input = x;
      lc->Q.resize(heads);
      lc->K.resize(heads);
      lc->V.resize(heads);
      lc->attn.resize(heads);
    }

    Matrix concat(len, d);
    for (int h = 0; h < heads; ++h) {
      Matrix q = x * layer.wq[h];
      Matrix k = x * layer.wk[h];
      Matrix v = x * layer.wv[h];
      Matrix scores = (q * k.transpose()) * scale;
      for (std::size_t j = 0; j < pad_mask.size(); ++j) {
        if (pad_mask[j]) scores.col(static_cast<Eigen::Index>(j)).setConstant(kNegInf);
      }
      Matrix attn(len, len);
      for (Eigen::Index r = 0; r < len; ++r) {
        const double m = scores.row(r).maxCoeff();
        attn.row(r) = (scores.row(r).array() - m).exp();
        attn.row(r) /= attn.row(r).sum();
      }
      concat.middleCols(static_cast<Eigen::Index>(h) * dk, dk) = attn * v;
      if (lc) {
        lc->Q[h] = std::move(q);
        lc->K[h] = std::move(k);
        lc->V[h] = std::move(v);
        lc->attn[h] = std::move(attn);
      }
    }
    Matrix mh = concat * layer.wo;
    if (use_dropout) {
      const Matrix mask = dropout_mask(*dropout_rng, len, d, params.hyper.dropout);
      mh = mh.cwiseProduct(mask);
      if (lc) lc->mh_drop_mask = mask;
    }

    LayerNormCache ln1;
    Matrix z = layer_norm(x + mh, layer.ln1_g, layer.ln1_b, ln1);

    Matrix f1 = (z * layer.w1).rowwise() + layer.b1.transpose();
    Matrix relu = f1.cwiseMax(0.0);
    Matrix f2 = (relu * layer.w2).rowwise() + layer.b2.transpose();
    if (use_dropout) {
      const Matrix mask = dropout_mask(*dropout_rng, len, d, params.hyper.dropout);
      f2 = f2.cwiseProduct(mask);
      if (lc) lc->ffn_drop_mask = mask;
    }

    LayerNormCache ln2;
    Matrix y = layer_norm(z + f2, layer.ln2_g, layer.ln2_b, ln2);

    if (lc) {
      lc->concat = std::move(concat);
      lc->ln1 = std::move(ln1);
      lc->z = z;
      lc->ffn_pre = std::move(f1);
      lc->ln2 = std::move(ln2);
    }
    x = std::move(y);
  }
  if (cache) cache->output = x;
  return x;
}

void transformer_backward(const ModelParams& params, const TransCache& cache,
                          const Matrix& d_output, ModelParams& grads,
                          Matrix& d_input) {
  const int heads = params.hyper.heads;
  const int dk = params.hyper.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  Matrix dy = d_output;
  for (std::size_t l = params.trans.size(); l-- > 0;) {
    const auto& layer = params.trans[l];
    const auto& lc = cache.layers[l];
    auto& gl = grads.trans[l];
    const auto len = lc.input.rows();

    // LN2 backward: input was z + f2.
    Matrix d_z2;
    layer_norm_backward(lc.ln2, layer.ln2_g, dy, gl.ln2_g, gl.ln2_b, d_z2);

    // FFN backward.
    Matrix d_f2 = d_z2;
    if (lc.ffn_drop_mask.size() > 0) d_f2 = d_f2.cwiseProduct(lc.ffn_drop_mask);
    const Matrix relu = lc.ffn_pre.cwiseMax(0.0);
    gl.w2.noalias() += relu.transpose() * d_f2;
    gl.b2 += d_f2.colwise().sum().transpose();
    Matrix d_relu = d_f2 * layer.w2.transpose();
    d_relu = d_relu.cwiseProduct(
        lc.ffn_pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    gl.w1.noalias() += lc.z.transpose() * d_relu;
    gl.b1 += d_relu.colwise().sum().transpose();
    Matrix d_z = d_z2 + d_relu * layer.w1.transpose();

    // LN1 backward: input was x + mh.
    Matrix d_z1;
    layer_norm_backward(lc.ln1, layer.ln1_g, d_z, gl.ln1_g, gl.ln1_b, d_z1);

    Matrix d_mh = d_z1;
    if (lc.mh_drop_mask.size() > 0) d_mh = d_mh.cwiseProduct(lc.mh_drop_mask);
    gl.wo.noalias() += lc.concat.transpose() * d_mh;
    const Matrix d_concat = d_mh * layer.wo.transpose();

    Matrix dx = d_z1;  // residual path
    for (int h = 0; h < heads; ++h) {
      const Matrix d_head = d_concat.middleCols(static_cast<Eigen::Index>(h) * dk, dk);
      const Matrix& attn = lc.attn[h];
      Matrix d_attn = d_head * lc.V[h].transpose();
      Matrix d_v = attn.transpose() * d_head;
      // Row-softmax backward; masked columns have attn == 0 so they stay 0.
      Matrix d_scores(len, len);
      for (Eigen::Index r = 0; r < len; ++r) {
        const double dot = d_attn.row(r).dot(attn.row(r));
        d_scores.row(r) = attn.row(r).array() * (d_attn.row(r).array() - dot);
      }
      d_scores *= scale;
      const Matrix d_q = d_scores * lc.K[h];
      const Matrix d_k = d_scores.transpose() * lc.Q[h];
      gl.wq[h].noalias() += lc.input.transpose() * d_q;
      gl.wk[h].noalias() += lc.input.transpose() * d_k;
      gl.wv[h].noalias() += lc.input.transpose() * d_v;
      dx.noalias() += d_q * layer.wq[h].transpose();
      dx.noalias() += d_k * layer.wk[h].transpose();
      dx.noalias() += d_v * layer.wv[h].transpose();
    }
    dy = std::move(dx);
  }
  d_input = std::move(dy);
}

Vector encode_trajectory(const ModelParams& params, const Matrix& H_S,
                         const Trajectory& traj, TrajEncodeCache* cache,
                         Rng* dropout_rng) {
  if (traj.segments.empty()) {
    throw ValidationError(cat("encode_trajectory: trajectory '", traj.id,
                              "' is empty"));
  }
  const int d = params.hyper.dim;
  const auto len = std::min<std::size_t>(traj.segments.size(),
                                         params.hyper.max_seq_len);
  Matrix x(len, d);
  for (std::size_t i = 0; i < len; ++i) {
    const SegmentId s = traj.segments[i];
    if (s >= H_S.rows()) {
      throw ValidationError(cat("encode_trajectory: segment ", s,
                                " outside embedding matrix"));
    }
    x.row(static_cast<Eigen::Index>(i)) = H_S.row(s);
  }
  x += positional_encoding(static_cast<int>(len), d);

  const std::vector<std::uint8_t> pad(len, 0);
  TransCache local;
  TransCache* tc = cache ? &cache->trans : &local;
  const Matrix out = transformer_forward(params, x, pad, tc, dropout_rng);
  if (cache) {
    cache->segments.assign(traj.segments.begin(), traj.segments.begin() + len);
  }
  return out.colwise().mean().transpose();
}

void encode_trajectory_backward(const ModelParams& params,
                                const TrajEncodeCache& cache, const Vector& dh,
                                ModelParams& grads, Matrix& d_hs) {
  const auto len = static_cast<Eigen::Index>(cache.segments.size());
  Matrix d_out(len, params.hyper.dim);
  const double inv_len = 1.0 / static_cast<double>(len);
  for (Eigen::Index r = 0; r < len; ++r) d_out.row(r) = dh.transpose() * inv_len;

  Matrix d_x;
  transformer_backward(params, cache.trans, d_out, grads, d_x);
  for (Eigen::Index r = 0; r < len; ++r) {
    d_hs.row(cache.segments[static_cast<std::size_t>(r)]) += d_x.row(r);
  }
}

}  // namespace jclr
