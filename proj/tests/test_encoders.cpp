#include <doctest.h>

#include <cmath>

#include "jclr/encoders.hpp"
#include "support.hpp"

using namespace jclr;

namespace {

HyperParams small_hyper(std::uint32_t num_segments, int dim = 8, int heads = 2,
                        int gat_layers = 2, int trans_layers = 2) {
  HyperParams h;
  h.dim = dim;
  h.heads = heads;
  h.gat_layers = gat_layers;
  h.trans_layers = trans_layers;
  h.dropout = 0.0;
  h.num_segments = num_segments;
  return h;
}

// ---------------------------------------------------------------------------
// Straight-line re-implementations used as dual-route oracles. These follow
// the formulas directly with scalar loops and stay independent of the library
// code paths they check.

double oracle_lrelu(double x) { return x > 0 ? x : 0.2 * x; }
double oracle_elu(double x) { return x > 0 ? x : std::exp(x) - 1.0; }

Matrix oracle_gat(const ModelParams& p, const RoadNetwork& net) {
  const int d = p.hyper.dim;
  const auto n = static_cast<Eigen::Index>(net.size());
  Matrix x = p.seg_embed;
  for (const auto& layer : p.gat) {
    Matrix next = Matrix::Zero(n, d);
    for (const auto& head : layer.heads) {
      for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<SegmentId> support{static_cast<SegmentId>(i)};
        for (SegmentId j : net.out_neighbors(static_cast<SegmentId>(i))) {
          support.push_back(j);
        }
        std::vector<double> weight(support.size());
        double total = 0.0;
        for (std::size_t k = 0; k < support.size(); ++k) {
          Vector ui = (x.row(i) * head.W).transpose();
          Vector uj = (x.row(support[k]) * head.W).transpose();
          double logit = 0.0;
          for (int c = 0; c < d; ++c) {
            logit += head.a(c) * ui(c) + head.a(d + c) * uj(c);
          }
          weight[k] = std::exp(oracle_lrelu(logit));
          total += weight[k];
        }
        for (int c = 0; c < d; ++c) {
          double agg = 0.0;
          for (std::size_t k = 0; k < support.size(); ++k) {
            const Vector uj = (x.row(support[k]) * head.W).transpose();
            agg += weight[k] / total * uj(c);
          }
          next(i, c) += oracle_elu(agg);
        }
      }
    }
    x = next;
  }
  return x;
}

Matrix oracle_softmax_rows(Matrix scores) {
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    const double m = scores.row(r).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
      scores(r, c) = std::exp(scores(r, c) - m);
      total += scores(r, c);
    }
    scores.row(r) /= total;
  }
  return scores;
}

Matrix oracle_layer_norm(const Matrix& x, const Vector& g, const Vector& b) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mean = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) mean += x(r, c);
    mean /= static_cast<double>(x.cols());
    double var = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      var += (x(r, c) - mean) * (x(r, c) - mean);
    }
    var /= static_cast<double>(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      y(r, c) = g(c) * (x(r, c) - mean) / std::sqrt(var + 1e-5) + b(c);
    }
  }
  return y;
}

Matrix oracle_transformer(const ModelParams& p, Matrix x) {
  const int dk = p.hyper.head_dim();
  for (const auto& layer : p.trans) {
    Matrix concat(x.rows(), p.hyper.dim);
    for (std::size_t h = 0; h < layer.wq.size(); ++h) {
      const Matrix q = x * layer.wq[h];
      const Matrix k = x * layer.wk[h];
      const Matrix v = x * layer.wv[h];
      const Matrix attn =
          oracle_softmax_rows(q * k.transpose() / std::sqrt(static_cast<double>(dk)));
      concat.middleCols(static_cast<Eigen::Index>(h) * dk, dk) = attn * v;
    }
    const Matrix mh = concat * layer.wo;
    const Matrix z = oracle_layer_norm(x + mh, layer.ln1_g, layer.ln1_b);
    Matrix f = (z * layer.w1).rowwise() + layer.b1.transpose();
    f = f.cwiseMax(0.0);
    const Matrix ffn = (f * layer.w2).rowwise() + layer.b2.transpose();
    x = oracle_layer_norm(z + ffn, layer.ln2_g, layer.ln2_b);
  }
  return x;
}

}  // namespace

TEST_CASE("init_params is deterministic and respects the fan-in bound") {
  const auto hyper = small_hyper(10);
  ModelParams a = init_params(91, hyper);
  ModelParams b = init_params(91, hyper);
  auto ra = tensor_refs(a);
  auto rb = tensor_refs(b);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t t = 0; t < ra.size(); ++t) {
    for (std::size_t k = 0; k < ra[t].size(); ++k) {
      CHECK(ra[t].data[k] == rb[t].data[k]);
    }
  }
  // seg_embed: fan_in = dim = 8.
  const double bound = 1.0 / std::sqrt(8.0);
  for (Eigen::Index i = 0; i < a.seg_embed.size(); ++i) {
    CHECK(std::abs(a.seg_embed.data()[i]) <= bound);
  }
  // layer norm gains start at one, biases at zero
  for (const auto& layer : a.trans) {
    CHECK(layer.ln1_g.isOnes());
    CHECK(layer.ln1_b.isZero());
    CHECK(layer.b1.isZero());
  }
  ModelParams c = init_params(92, hyper);
  CHECK(a.seg_embed != c.seg_embed);
}

TEST_CASE("gat attention normalizes over the support") {
  Rng rng(3);
  const RoadNetwork net = test::random_network(rng, 12);
  const auto hyper = small_hyper(12);
  const ModelParams params = init_params(7, hyper);
  const GatGraph graph = GatGraph::build(net);
  GatCache cache;
  gat_forward(params, graph, &cache);
  for (const auto& layer : cache.layers) {
    for (const auto& alpha : layer.alpha) {
      for (std::size_t i = 0; i < graph.size(); ++i) {
        double row = 0.0;
        for (std::uint32_t e = graph.offsets[i]; e < graph.offsets[i + 1]; ++e) {
          row += alpha[e];
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("two identical neighbors share attention equally") {
  // Node 0 attends over {self, 1, 2}; nodes 1 and 2 carry identical rows.
  std::vector<SegmentMeta> metas{{0, 1, {}, {}}, {1, 1, {}, {}}, {2, 1, {}, {}}};
  RoadNetwork net(std::move(metas), {{0, 1}, {0, 2}});
  auto hyper = small_hyper(3, 4, 1, 1);
  ModelParams params = init_params(5, hyper);
  params.seg_embed.row(2) = params.seg_embed.row(1);
  const GatGraph graph = GatGraph::build(net);
  GatCache cache;
  gat_forward(params, graph, &cache);
  const auto& alpha = cache.layers[0].alpha[0];
  // support order: self, then sorted neighbors
  CHECK(alpha[graph.offsets[0] + 1] == doctest::Approx(alpha[graph.offsets[0] + 2]));
}

TEST_CASE("gat matches the straight-line oracle") {
  Rng rng(17);
  const RoadNetwork net = test::random_network(rng, 10);
  const auto hyper = small_hyper(10, 4, 2, 2);
  const ModelParams params = init_params(3, hyper);
  const Matrix got = gat_forward(params, net);
  const Matrix expected = oracle_gat(params, net);
  REQUIRE(got.rows() == expected.rows());
  for (Eigen::Index i = 0; i < got.rows(); ++i) {
    for (Eigen::Index j = 0; j < got.cols(); ++j) {
      CHECK(got(i, j) == doctest::Approx(expected(i, j)).epsilon(1e-10));
    }
  }
}

TEST_CASE("positional encoding matches the sinusoid formula") {
  const Matrix p = positional_encoding(6, 8);
  for (int i = 0; 2 * i < 8; ++i) {
    CHECK(p(0, 2 * i) == 0.0);
    CHECK(p(0, 2 * i + 1) == 1.0);
  }
  CHECK(p(1, 0) == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
  CHECK(p(1, 0) == doctest::Approx(0.841471).epsilon(1e-6));
  CHECK(p(3, 2) == doctest::Approx(std::sin(3.0 / std::pow(10000.0, 2.0 / 8.0))));
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      CHECK(p(r, c) >= -1.0);
      CHECK(p(r, c) <= 1.0);
    }
  }
  CHECK_THROWS_AS(positional_encoding(4, 7), ValidationError);
}

TEST_CASE("transformer attention rows sum to one and singletons self-attend") {
  const auto hyper = small_hyper(4, 8, 4, 1, 3);
  const ModelParams params = init_params(11, hyper);
  Rng rng(5);
  Matrix x(5, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * uniform01(rng) - 1.0;

  TransCache cache;
  transformer_forward(params, x, std::vector<std::uint8_t>(5, 0), &cache);
  for (const auto& layer : cache.layers) {
    for (const auto& attn : layer.attn) {
      for (Eigen::Index r = 0; r < attn.rows(); ++r) {
        CHECK(attn.row(r).sum() == doctest::Approx(1.0).epsilon(1e-6));
      }
    }
  }

  Matrix one = x.topRows(1);
  TransCache single;
  transformer_forward(params, one, {0}, &single);
  for (const auto& layer : single.layers) {
    for (const auto& attn : layer.attn) {
      CHECK(attn(0, 0) == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("transformer matches the straight-line oracle") {
  const auto hyper = small_hyper(4, 8, 4, 1, 4);
  const ModelParams params = init_params(29, hyper);
  Rng rng(31);
  Matrix x(5, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * uniform01(rng) - 1.0;
  const Matrix got = transformer_forward(params, x, std::vector<std::uint8_t>(5, 0));
  const Matrix expected = oracle_transformer(params, x);
  for (Eigen::Index i = 0; i < got.rows(); ++i) {
    for (Eigen::Index j = 0; j < got.cols(); ++j) {
      CHECK(got(i, j) == doctest::Approx(expected(i, j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("padded and unpadded encodings agree on real positions") {
  const auto hyper = small_hyper(4, 8, 2, 1, 2);
  const ModelParams params = init_params(13, hyper);
  Rng rng(41);
  const int real = 4, padded = 7;
  Matrix x(padded, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 2.0 * uniform01(rng) - 1.0;

  std::vector<std::uint8_t> mask(padded, 0);
  for (int i = real; i < padded; ++i) mask[i] = 1;
  const Matrix with_pad = transformer_forward(params, x, mask);
  const Matrix without =
      transformer_forward(params, x.topRows(real), std::vector<std::uint8_t>(real, 0));
  for (Eigen::Index i = 0; i < real; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) {
      CHECK(with_pad(i, j) == doctest::Approx(without(i, j)).epsilon(1e-6));
    }
  }
  // Pooling over real rows gives the padding-equivalent trajectory embedding.
  const Vector pooled_pad =
      with_pad.topRows(real).colwise().mean().transpose();
  const Vector pooled = without.colwise().mean().transpose();
  for (Eigen::Index j = 0; j < 8; ++j) {
    CHECK(pooled_pad(j) == doctest::Approx(pooled(j)).epsilon(1e-6));
  }
}

TEST_CASE("encode_trajectory output has dim entries and pools identical rows") {
  Rng rng(2);
  const RoadNetwork net = test::random_network(rng, 6);
  auto hyper = small_hyper(6, 8, 2, 1, 1);
  ModelParams params = init_params(3, hyper);
  const Matrix h_s = gat_forward(params, net);
  const Trajectory traj = test::random_walk(rng, net, "t", 5);
  const Vector h = encode_trajectory(params, h_s, traj);
  CHECK(h.size() == 8);
  CHECK(h.allFinite());
}

TEST_CASE("mean pooling is permutation invariant") {
  Rng rng(8);
  Matrix rows(6, 8);
  for (Eigen::Index i = 0; i < rows.size(); ++i) {
    rows.data()[i] = uniform01(rng);
  }
  const Vector pooled = rows.colwise().mean().transpose();
  Matrix shuffled = rows;
  shuffled.row(0).swap(shuffled.row(5));
  shuffled.row(2).swap(shuffled.row(3));
  const Vector pooled2 = shuffled.colwise().mean().transpose();
  for (Eigen::Index j = 0; j < 8; ++j) {
    CHECK(pooled(j) == doctest::Approx(pooled2(j)).epsilon(1e-12));
  }
}

TEST_CASE("trajectories beyond max_seq_len are truncated from the tail") {
  Rng rng(12);
  const RoadNetwork net = test::random_network(rng, 10);
  auto hyper = small_hyper(10, 8, 2, 1, 1);
  hyper.max_seq_len = 4;
  const ModelParams params = init_params(3, hyper);
  const Matrix h_s = gat_forward(params, net);
  const Trajectory long_traj = test::random_walk(rng, net, "t", 9);
  Trajectory head = long_traj;
  head.segments.resize(4);
  const Vector full = encode_trajectory(params, h_s, long_traj);
  const Vector truncated = encode_trajectory(params, h_s, head);
  for (Eigen::Index j = 0; j < 8; ++j) {
    CHECK(full(j) == doctest::Approx(truncated(j)).epsilon(1e-12));
  }
}

namespace {

/// Scalar objective over the full encoder stack for finite differencing:
/// a fixed random projection of H_S plus the encodings of a few trajectories.
double encoder_objective(const ModelParams& params, const GatGraph& graph,
                         const std::vector<Trajectory>& trajs,
                         const Matrix& hs_weights, const Matrix& traj_weights,
                         ModelParams* grads) {
  GatCache gat_cache;
  const Matrix h_s = gat_forward(params, graph, grads ? &gat_cache : nullptr);
  double value = h_s.cwiseProduct(hs_weights).sum();
  Matrix d_hs = grads ? hs_weights : Matrix();

  std::vector<TrajEncodeCache> caches(grads ? trajs.size() : 0);
  for (std::size_t t = 0; t < trajs.size(); ++t) {
    const Vector h = encode_trajectory(params, h_s, trajs[t],
                                       grads ? &caches[t] : nullptr);
    value += h.dot(traj_weights.row(static_cast<Eigen::Index>(t)).transpose());
  }
  if (grads) {
    for (std::size_t t = 0; t < trajs.size(); ++t) {
      encode_trajectory_backward(
          params, caches[t],
          traj_weights.row(static_cast<Eigen::Index>(t)).transpose(), *grads,
          d_hs);
    }
    gat_backward(params, graph, gat_cache, d_hs, *grads);
  }
  return value;
}

}  // namespace

TEST_CASE("analytic encoder gradients match central finite differences") {
  Rng rng(1);
  const RoadNetwork net = test::random_network(rng, 12);
  const auto hyper = small_hyper(12, 8, 4, 2, 2);
  ModelParams params = init_params(77, hyper);
  const GatGraph graph = GatGraph::build(net);

  std::vector<Trajectory> trajs;
  for (int t = 0; t < 2; ++t) {
    trajs.push_back(test::random_walk(rng, net, cat("t", t), 5));
  }
  Matrix hs_w(12, 8), traj_w(2, 8);
  for (Eigen::Index i = 0; i < hs_w.size(); ++i) {
    hs_w.data()[i] = 2.0 * uniform01(rng) - 1.0;
  }
  for (Eigen::Index i = 0; i < traj_w.size(); ++i) {
    traj_w.data()[i] = 2.0 * uniform01(rng) - 1.0;
  }

  ModelParams grads = ModelParams::zeros_like(params);
  encoder_objective(params, graph, trajs, hs_w, traj_w, &grads);

  auto prefs = tensor_refs(params);
  auto grefs = tensor_refs(grads);
  const double step = 1e-6;
  double max_rel = 0.0;
  for (std::size_t t = 0; t < prefs.size(); ++t) {
    // Spot-check a handful of entries per tensor to keep the test quick; the
    // exhaustive sweep lives in the acceptance suite.
    const std::size_t stride = std::max<std::size_t>(1, prefs[t].size() / 7);
    for (std::size_t k = 0; k < prefs[t].size(); k += stride) {
      double& value = prefs[t].data[k];
      const double saved = value;
      value = saved + step;
      const double up = encoder_objective(params, graph, trajs, hs_w, traj_w, nullptr);
      value = saved - step;
      const double down = encoder_objective(params, graph, trajs, hs_w, traj_w, nullptr);
      value = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = grefs[t].data[k];
      const double rel = std::abs(numeric - analytic) /
                         std::max({std::abs(numeric), std::abs(analytic), 1e-3});
      max_rel = std::max(max_rel, rel);
    }
  }
  CHECK(max_rel < 1e-5);
}

TEST_CASE("zero output gradient produces zero parameter gradients") {
  Rng rng(6);
  const RoadNetwork net = test::random_network(rng, 8);
  const auto hyper = small_hyper(8, 8, 2, 1, 1);
  const ModelParams params = init_params(5, hyper);
  const GatGraph graph = GatGraph::build(net);
  GatCache cache;
  gat_forward(params, graph, &cache);
  ModelParams grads = ModelParams::zeros_like(params);
  gat_backward(params, graph, cache, Matrix::Zero(8, 8), grads);
  auto refs = tensor_refs(grads);
  for (const auto& ref : refs) {
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK(ref.data[k] == 0.0);
  }
}

TEST_CASE("segments outside the receptive field keep zero embedding gradient") {
  // Segment 4 is isolated: no edges in or out, not used downstream.
  std::vector<SegmentMeta> metas(5);
  for (SegmentId i = 0; i < 5; ++i) metas[i] = {i, 1.0, {}, {}};
  RoadNetwork net(std::move(metas), {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  const auto hyper = small_hyper(5, 8, 2, 2, 1);
  const ModelParams params = init_params(9, hyper);
  const GatGraph graph = GatGraph::build(net);
  GatCache cache;
  gat_forward(params, graph, &cache);

  Matrix d_out = Matrix::Zero(5, 8);
  d_out.row(0).setOnes();  // gradient only on segment 0's output
  ModelParams grads = ModelParams::zeros_like(params);
  gat_backward(params, graph, cache, d_out, grads);
  CHECK(grads.seg_embed.row(4).isZero());
  CHECK_FALSE(grads.seg_embed.row(0).isZero());
}

TEST_CASE("forward passes are bitwise deterministic") {
  Rng rng(10);
  const RoadNetwork net = test::random_network(rng, 10);
  const auto hyper = small_hyper(10, 8, 2, 2, 2);
  const ModelParams params = init_params(21, hyper);
  const Matrix a = gat_forward(params, net);
  const Matrix b = gat_forward(params, net);
  CHECK(a == b);
  const Trajectory traj = test::random_walk(rng, net, "t", 6);
  const Vector ha = encode_trajectory(params, a, traj);
  const Vector hb = encode_trajectory(params, b, traj);
  CHECK(ha == hb);
}
