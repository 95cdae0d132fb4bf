#include "bgcn/model.hpp"

#include <cmath>
#include <string>
#include <tuple>
#include <utility>

#include "bgcn/scalar.hpp"

namespace bgcn {

namespace {

DenseMatrix glorot(index_t rows, index_t cols, double bound, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (auto& v : m.data) v = rng.uniform(-bound, bound);
  return m;
}

DenseMatrix affine(const DenseMatrix& x, const DenseMatrix& w,
                   const DenseMatrix& bias) {
  DenseMatrix out = matmul(x, w);
  add_bias_inplace(out, bias);
  return out;
}

void axpy_row(DenseMatrix& y, index_t yi, double a, const DenseMatrix& x,
              index_t xi) {
  double* dst = y.data.data() + yi * y.cols;
  const double* src = x.data.data() + xi * x.cols;
  for (index_t k = 0; k < y.cols; ++k) dst[k] += a * src[k];
}

void named_check(const DenseMatrix& m, const std::string& name) {
  if (runtime_checks()) check_finite(m, name);
}

}  // namespace

ModelParams ModelParams::zeros_like(const ModelParams& other) {
  ModelParams z;
  z.d = other.d;
  z.layers = other.layers;
  z.P = DenseMatrix(other.P.rows, other.P.cols);
  z.Q = DenseMatrix(other.Q.rows, other.Q.cols);
  z.R = DenseMatrix(other.R.rows, other.R.cols);
  for (int l = 0; l < other.layers; ++l) {
    z.W1.emplace_back(other.W1[l].rows, other.W1[l].cols);
    z.b1.emplace_back(other.b1[l].rows, other.b1[l].cols);
    z.W2.emplace_back(other.W2[l].rows, other.W2[l].cols);
    z.b2.emplace_back(other.b2[l].rows, other.b2[l].cols);
  }
  return z;
}

std::vector<TensorRef> tensor_refs(ModelParams& p) {
  std::vector<TensorRef> refs;
  refs.push_back({"P", &p.P});
  refs.push_back({"Q", &p.Q});
  refs.push_back({"R", &p.R});
  for (int l = 0; l < p.layers; ++l) {
    const std::string suffix = "_" + std::to_string(l + 1);
    refs.push_back({"W1" + suffix, &p.W1[l]});
    refs.push_back({"b1" + suffix, &p.b1[l]});
    refs.push_back({"W2" + suffix, &p.W2[l]});
    refs.push_back({"b2" + suffix, &p.b2[l]});
  }
  return refs;
}

std::vector<ConstTensorRef> tensor_refs(const ModelParams& p) {
  auto mut = tensor_refs(const_cast<ModelParams&>(p));
  std::vector<ConstTensorRef> refs;
  refs.reserve(mut.size());
  for (auto& r : mut) refs.push_back({std::move(r.name), r.tensor});
  return refs;
}

double params_norm_sq(const ModelParams& p) {
  double acc = 0.0;
  for (const auto& r : tensor_refs(p)) acc += norm_sq(*r.tensor);
  return acc;
}

ModelParams init_params(index_t num_users, index_t num_bundles,
                        index_t num_items, index_t d, int layers,
                        std::uint64_t seed) {
  if (num_users <= 0 || num_bundles <= 0 || num_items <= 0 || d <= 0 ||
      layers < 0) {
    throw ConfigError("init_params: counts must be positive, layers >= 0");
  }
  Rng rng(seed);
  const double bound = std::sqrt(6.0 / static_cast<double>(d + d));
  ModelParams p;
  p.d = d;
  p.layers = layers;
  p.P = glorot(num_users, d, bound, rng);
  p.Q = glorot(num_items, d, bound, rng);
  p.R = glorot(num_bundles, d, bound, rng);
  for (int l = 0; l < layers; ++l) {
    p.W1.push_back(glorot(d, d, bound, rng));
    p.b1.emplace_back(1, d);
    p.W2.push_back(glorot(d, d, bound, rng));
    p.b2.emplace_back(1, d);
  }
  return p;
}

EpochAdjacency epoch_adjacency(const TripartiteGraph& graph,
                               const OverlapWeights* overlap,
                               const AblationSwitches& sw, double node_rate,
                               Rng* rng) {
  if (node_rate < 0.0 || node_rate >= 1.0) {
    throw ConfigError("node dropout rate must be in [0, 1)");
  }
  EpochAdjacency a;
  const bool drop = node_rate > 0.0 && rng != nullptr;
  a.owned.reserve(12);

  auto pick = [&](const SparseMatrix& m, const SparseMatrix& mt)
      -> std::pair<const SparseMatrix*, const SparseMatrix*> {
    if (!drop) return {&m, &mt};
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(m.rows));
    for (auto& x : mask) x = rng->bernoulli(node_rate) ? 1 : 0;
    a.owned.push_back(drop_rows(m, mask));
    const SparseMatrix* dropped = &a.owned.back();
    a.owned.push_back(transpose(*dropped));
    return {dropped, &a.owned.back()};
  };

  if (sw.item_level) {
    std::tie(a.ui, a.ui_t) = pick(graph.norm_ui, graph.norm_ui_t);
    std::tie(a.iu, a.iu_t) = pick(graph.norm_iu, graph.norm_iu_t);
    a.bi_pool = &graph.norm_bi_pool;
    a.bi_pool_t = &graph.norm_bi_pool_t;
  }
  if (sw.bundle_level) {
    std::tie(a.ub, a.ub_t) = pick(graph.norm_ub, graph.norm_ub_t);
    std::tie(a.bu, a.bu_t) = pick(graph.norm_bu, graph.norm_bu_t);
    if (sw.b2b != B2BMode::None) {
      if (overlap == nullptr) {
        throw ConfigError("b2b propagation requires overlap weights");
      }
      const bool weighted = sw.b2b == B2BMode::Weighted;
      std::tie(a.b2b, a.b2b_t) =
          pick(weighted ? overlap->weighted : overlap->uniform,
               weighted ? overlap->weighted_t : overlap->uniform_t);
    }
  }
  return a;
}

MessageMasks make_message_masks(index_t num_users, index_t num_bundles,
                                index_t num_items, index_t d, int layers,
                                const AblationSwitches& sw, double rate,
                                Rng& rng) {
  MessageMasks m;
  if (rate == 0.0) return m;
  for (int l = 0; l < layers; ++l) {
    if (sw.item_level) {
      m.item_p.push_back(make_dropout_mask(num_users, d, rate, rng));
      m.item_q.push_back(make_dropout_mask(num_items, d, rate, rng));
    }
    if (sw.bundle_level) {
      m.bl_p.push_back(make_dropout_mask(num_users, d, rate, rng));
      m.bl_r.push_back(make_dropout_mask(num_bundles, d, rate, rng));
      if (sw.b2b != B2BMode::None) {
        m.b2b.push_back(make_dropout_mask(num_bundles, d, rate, rng));
      }
    }
  }
  return m;
}

ForwardResult bgcn_forward(const EpochAdjacency& adj, const ModelParams& params,
                           const AblationSwitches& sw,
                           const MessageMasks& masks, double leaky_slope) {
  if (!sw.item_level && !sw.bundle_level) {
    throw ConfigError("at least one propagation level must be enabled");
  }
  const int L = params.layers;
  ForwardResult res;
  auto& e = res.emb;
  auto& c = res.cache;

  if (sw.item_level) {
    e.p1.resize(L + 1);
    e.q1.resize(L + 1);
    e.r1.resize(L + 1);
    c.x_p1.resize(L);
    c.x_q1.resize(L);
    c.pre_p1.resize(L);
    c.pre_q1.resize(L);
    e.p1[0] = params.P;
    e.q1[0] = params.Q;
    // Layer-0 bundle representation is the pooling of raw item embeddings.
    e.r1[0] = spmm(*adj.bi_pool, e.q1[0]);
    for (int l = 0; l < L; ++l) {
      DenseMatrix agg_p = spmm(*adj.ui, e.q1[l]);
      if (!masks.item_p.empty()) hadamard_inplace(agg_p, masks.item_p[l]);
      add_inplace(agg_p, e.p1[l]);
      c.x_p1[l] = std::move(agg_p);
      c.pre_p1[l] = affine(c.x_p1[l], params.W1[l], params.b1[l]);
      named_check(c.pre_p1[l],
                  "item-level user preactivation, layer " + std::to_string(l + 1));
      e.p1[l + 1] = leaky_relu(c.pre_p1[l], leaky_slope);

      DenseMatrix agg_q = spmm(*adj.iu, e.p1[l]);
      if (!masks.item_q.empty()) hadamard_inplace(agg_q, masks.item_q[l]);
      add_inplace(agg_q, e.q1[l]);
      c.x_q1[l] = std::move(agg_q);
      c.pre_q1[l] = affine(c.x_q1[l], params.W1[l], params.b1[l]);
      named_check(c.pre_q1[l],
                  "item-level item preactivation, layer " + std::to_string(l + 1));
      e.q1[l + 1] = leaky_relu(c.pre_q1[l], leaky_slope);
      // Pooling carries no transform or activation.
      e.r1[l + 1] = spmm(*adj.bi_pool, e.q1[l + 1]);
    }
    e.p1s = concat_rows(e.p1);
    e.r1s = concat_rows(e.r1);
  }

  if (sw.bundle_level) {
    e.p2.resize(L + 1);
    e.r2.resize(L + 1);
    c.x_p2.resize(L);
    c.x_r2.resize(L);
    c.pre_p2.resize(L);
    c.pre_r2.resize(L);
    e.p2[0] = params.P;
    e.r2[0] = params.R;
    for (int l = 0; l < L; ++l) {
      DenseMatrix agg_p = spmm(*adj.ub, e.r2[l]);
      if (!masks.bl_p.empty()) hadamard_inplace(agg_p, masks.bl_p[l]);
      add_inplace(agg_p, e.p2[l]);
      c.x_p2[l] = std::move(agg_p);
      c.pre_p2[l] = affine(c.x_p2[l], params.W2[l], params.b2[l]);
      named_check(c.pre_p2[l], "bundle-level user preactivation, layer " +
                                   std::to_string(l + 1));
      e.p2[l + 1] = leaky_relu(c.pre_p2[l], leaky_slope);

      DenseMatrix agg_r = spmm(*adj.bu, e.p2[l]);
      if (!masks.bl_r.empty()) hadamard_inplace(agg_r, masks.bl_r[l]);
      add_inplace(agg_r, e.r2[l]);
      if (adj.b2b != nullptr) {
        DenseMatrix b2b_term = spmm(*adj.b2b, e.r2[l]);
        if (!masks.b2b.empty()) hadamard_inplace(b2b_term, masks.b2b[l]);
        add_inplace(agg_r, b2b_term);
      }
      c.x_r2[l] = std::move(agg_r);
      c.pre_r2[l] = affine(c.x_r2[l], params.W2[l], params.b2[l]);
      named_check(c.pre_r2[l], "bundle-level bundle preactivation, layer " +
                                   std::to_string(l + 1));
      e.r2[l + 1] = leaky_relu(c.pre_r2[l], leaky_slope);
    }
    e.p2s = concat_rows(e.p2);
    e.r2s = concat_rows(e.r2);
  }

  std::vector<DenseMatrix> us, bs;
  if (sw.item_level) {
    us.push_back(e.p1s);
    bs.push_back(e.r1s);
  }
  if (sw.bundle_level) {
    us.push_back(e.p2s);
    bs.push_back(e.r2s);
  }
  e.user_repr = us.size() == 1 ? us[0] : concat_rows(us);
  e.bundle_repr = bs.size() == 1 ? bs[0] : concat_rows(bs);
  return res;
}

ForwardResult bgcn_forward(const TripartiteGraph& graph,
                           const OverlapWeights* overlap,
                           const ModelParams& params,
                           const AblationSwitches& sw, double leaky_slope) {
  const EpochAdjacency adj = epoch_adjacency(graph, overlap, sw, 0.0, nullptr);
  return bgcn_forward(adj, params, sw, MessageMasks{}, leaky_slope);
}

double predict(const PropagatedEmbeddings& emb, index_t user, index_t bundle) {
  return dot_rows(emb.user_repr, user, emb.bundle_repr, bundle);
}

ScoreTable score_table(const PropagatedEmbeddings& emb) {
  return {emb.user_repr, emb.bundle_repr};
}

BackwardResult bgcn_backward(const EpochAdjacency& adj,
                             const ModelParams& params,
                             const AblationSwitches& sw,
                             const MessageMasks& masks,
                             const ForwardResult& fwd,
                             std::span<const TrainTriple> batch, double lambda,
                             double leaky_slope) {
  const int L = params.layers;
  const index_t d = params.d;
  const auto& e = fwd.emb;
  const auto& c = fwd.cache;

  BackwardResult out;
  out.grads = ModelParams::zeros_like(params);
  auto& g = out.grads;

  std::vector<DenseMatrix> gp1, gq1, gr1, gp2, gr2;
  if (sw.item_level) {
    gp1.assign(L + 1, DenseMatrix(params.P.rows, d));
    gq1.assign(L + 1, DenseMatrix(params.Q.rows, d));
    gr1.assign(L + 1, DenseMatrix(params.R.rows, d));
  }
  if (sw.bundle_level) {
    gp2.assign(L + 1, DenseMatrix(params.P.rows, d));
    gr2.assign(L + 1, DenseMatrix(params.R.rows, d));
  }

  double data_loss = 0.0;
  for (const TrainTriple& t : batch) {
    const double margin = dot_rows(e.user_repr, t.user, e.bundle_repr, t.pos) -
                          dot_rows(e.user_repr, t.user, e.bundle_repr, t.neg);
    const double s = sigmoid(-margin);  // -dLoss/dmargin
    data_loss += neg_log_sigmoid(margin);
    if (sw.item_level) {
      for (int l = 0; l <= L; ++l) {
        axpy_row(gp1[l], t.user, -s, e.r1[l], t.pos);
        axpy_row(gp1[l], t.user, s, e.r1[l], t.neg);
        axpy_row(gr1[l], t.pos, -s, e.p1[l], t.user);
        axpy_row(gr1[l], t.neg, s, e.p1[l], t.user);
      }
    }
    if (sw.bundle_level) {
      for (int l = 0; l <= L; ++l) {
        axpy_row(gp2[l], t.user, -s, e.r2[l], t.pos);
        axpy_row(gp2[l], t.user, s, e.r2[l], t.neg);
        axpy_row(gr2[l], t.pos, -s, e.p2[l], t.user);
        axpy_row(gr2[l], t.neg, s, e.p2[l], t.user);
      }
    }
  }

  if (sw.item_level) {
    for (int l = L; l >= 1; --l) {
      add_inplace(gq1[l], spmm(*adj.bi_pool_t, gr1[l]));

      DenseMatrix dpre = leaky_relu_backward(c.pre_p1[l - 1], gp1[l], leaky_slope);
      add_inplace(g.W1[l - 1], matmul(c.x_p1[l - 1], Trans::T, dpre, Trans::N));
      add_inplace(g.b1[l - 1], col_sums(dpre));
      DenseMatrix dx = matmul(dpre, Trans::N, params.W1[l - 1], Trans::T);
      add_inplace(gp1[l - 1], dx);
      if (!masks.item_p.empty()) hadamard_inplace(dx, masks.item_p[l - 1]);
      add_inplace(gq1[l - 1], spmm(*adj.ui_t, dx));

      DenseMatrix dpre_q =
          leaky_relu_backward(c.pre_q1[l - 1], gq1[l], leaky_slope);
      add_inplace(g.W1[l - 1], matmul(c.x_q1[l - 1], Trans::T, dpre_q, Trans::N));
      add_inplace(g.b1[l - 1], col_sums(dpre_q));
      DenseMatrix dxq = matmul(dpre_q, Trans::N, params.W1[l - 1], Trans::T);
      add_inplace(gq1[l - 1], dxq);
      if (!masks.item_q.empty()) hadamard_inplace(dxq, masks.item_q[l - 1]);
      add_inplace(gp1[l - 1], spmm(*adj.iu_t, dxq));
    }
    add_inplace(gq1[0], spmm(*adj.bi_pool_t, gr1[0]));
    add_inplace(g.P, gp1[0]);
    add_inplace(g.Q, gq1[0]);
  }

  if (sw.bundle_level) {
    for (int l = L; l >= 1; --l) {
      DenseMatrix dpre = leaky_relu_backward(c.pre_p2[l - 1], gp2[l], leaky_slope);
      add_inplace(g.W2[l - 1], matmul(c.x_p2[l - 1], Trans::T, dpre, Trans::N));
      add_inplace(g.b2[l - 1], col_sums(dpre));
      DenseMatrix dx = matmul(dpre, Trans::N, params.W2[l - 1], Trans::T);
      add_inplace(gp2[l - 1], dx);
      if (!masks.bl_p.empty()) hadamard_inplace(dx, masks.bl_p[l - 1]);
      add_inplace(gr2[l - 1], spmm(*adj.ub_t, dx));

      DenseMatrix dpre_r =
          leaky_relu_backward(c.pre_r2[l - 1], gr2[l], leaky_slope);
      add_inplace(g.W2[l - 1], matmul(c.x_r2[l - 1], Trans::T, dpre_r, Trans::N));
      add_inplace(g.b2[l - 1], col_sums(dpre_r));
      DenseMatrix dxr = matmul(dpre_r, Trans::N, params.W2[l - 1], Trans::T);
      add_inplace(gr2[l - 1], dxr);
      DenseMatrix dxr_bu = dxr;
      if (!masks.bl_r.empty()) hadamard_inplace(dxr_bu, masks.bl_r[l - 1]);
      add_inplace(gp2[l - 1], spmm(*adj.bu_t, dxr_bu));
      if (adj.b2b != nullptr) {
        DenseMatrix dxr_b2b = std::move(dxr);
        if (!masks.b2b.empty()) hadamard_inplace(dxr_b2b, masks.b2b[l - 1]);
        add_inplace(gr2[l - 1], spmm(*adj.b2b_t, dxr_b2b));
      }
    }
    add_inplace(g.P, gp2[0]);
    add_inplace(g.R, gr2[0]);
  }

  // L2 regularization covers every tensor in Theta, used or not.
  if (lambda != 0.0) {
    auto grefs = tensor_refs(g);
    auto prefs = tensor_refs(params);
    for (std::size_t i = 0; i < grefs.size(); ++i) {
      axpy_inplace(*grefs[i].tensor, 2.0 * lambda, *prefs[i].tensor);
    }
  }

  out.data_loss = data_loss;
  out.total_loss = data_loss + lambda * params_norm_sq(params);
  return out;
}

MfParams MfParams::zeros_like(const MfParams& other) {
  MfParams z;
  z.d = other.d;
  z.P = DenseMatrix(other.P.rows, other.P.cols);
  z.R = DenseMatrix(other.R.rows, other.R.cols);
  return z;
}

std::vector<TensorRef> tensor_refs(MfParams& p) {
  return {{"P", &p.P}, {"R", &p.R}};
}

std::vector<ConstTensorRef> tensor_refs(const MfParams& p) {
  return {{"P", &p.P}, {"R", &p.R}};
}

double params_norm_sq(const MfParams& p) {
  return norm_sq(p.P) + norm_sq(p.R);
}

MfParams init_mf_params(index_t num_users, index_t num_bundles, index_t d,
                        std::uint64_t seed) {
  Rng rng(seed);
  const double bound = std::sqrt(6.0 / static_cast<double>(d + d));
  MfParams p;
  p.d = d;
  p.P = glorot(num_users, d, bound, rng);
  p.R = glorot(num_bundles, d, bound, rng);
  return p;
}

double mf_score(const MfParams& p, index_t user, index_t bundle) {
  return dot_rows(p.P, user, p.R, bundle);
}

ScoreTable mf_score_table(const MfParams& p) { return {p.P, p.R}; }

MfBackwardResult mf_backward(const MfParams& params,
                             std::span<const TrainTriple> batch,
                             double lambda) {
  MfBackwardResult out;
  out.grads = MfParams::zeros_like(params);
  double data_loss = 0.0;
  for (const TrainTriple& t : batch) {
    const double margin =
        mf_score(params, t.user, t.pos) - mf_score(params, t.user, t.neg);
    const double s = sigmoid(-margin);
    data_loss += neg_log_sigmoid(margin);
    axpy_row(out.grads.P, t.user, -s, params.R, t.pos);
    axpy_row(out.grads.P, t.user, s, params.R, t.neg);
    axpy_row(out.grads.R, t.pos, -s, params.P, t.user);
    axpy_row(out.grads.R, t.neg, s, params.P, t.user);
  }
  if (lambda != 0.0) {
    axpy_inplace(out.grads.P, 2.0 * lambda, params.P);
    axpy_inplace(out.grads.R, 2.0 * lambda, params.R);
  }
  out.data_loss = data_loss;
  out.total_loss = data_loss + lambda * params_norm_sq(params);
  return out;
}

}  // namespace bgcn
