#pragma once

#include <string>
#include <vector>

#include "bgcn/graph.hpp"
#include "bgcn/matrix.hpp"
#include "bgcn/rng.hpp"

namespace bgcn {

// One pairwise training example: positive bundle b, negative bundle c.
struct TrainTriple {
  index_t user = 0;
  index_t pos = 0;
  index_t neg = 0;
  bool hard = false;
};

enum class B2BMode { None, Unweighted, Weighted };

struct AblationSwitches {
  bool item_level = true;
  bool bundle_level = true;
  B2BMode b2b = B2BMode::Weighted;
};

// Learned tensors. W1/b1 are shared between the user and item updates of a
// layer; W2/b2 between the user and bundle updates. Biases are stored 1 x d.
struct ModelParams {
  index_t d = 0;
  int layers = 0;  // L
  DenseMatrix P;   // M x d user embeddings
  DenseMatrix Q;   // O x d item embeddings
  DenseMatrix R;   // N x d bundle embeddings
  std::vector<DenseMatrix> W1, b1;  // item level, one per layer
  std::vector<DenseMatrix> W2, b2;  // bundle level, one per layer

  static ModelParams zeros_like(const ModelParams& other);
};

struct TensorRef {
  std::string name;
  DenseMatrix* tensor;
};
struct ConstTensorRef {
  std::string name;
  const DenseMatrix* tensor;
};

// Canonical tensor order: P, Q, R, then W1_l, b1_l, W2_l, b2_l per layer.
std::vector<TensorRef> tensor_refs(ModelParams& p);
std::vector<ConstTensorRef> tensor_refs(const ModelParams& p);
double params_norm_sq(const ModelParams& p);

// Glorot-uniform initialization with bound sqrt(6/(d+d)); biases zero.
ModelParams init_params(index_t num_users, index_t num_bundles,
                        index_t num_items, index_t d, int layers,
                        std::uint64_t seed);

// Effective adjacencies for one epoch. With node dropout the propagation
// matrices are copies with dropped rows zeroed; otherwise the pointers alias
// the graph (and overlap) directly. The pooling matrix is never dropped.
struct EpochAdjacency {
  const SparseMatrix* ui = nullptr;
  const SparseMatrix* iu = nullptr;
  const SparseMatrix* bi_pool = nullptr;
  const SparseMatrix* ub = nullptr;
  const SparseMatrix* bu = nullptr;
  const SparseMatrix* b2b = nullptr;  // null when B2BMode::None
  const SparseMatrix* ui_t = nullptr;
  const SparseMatrix* iu_t = nullptr;
  const SparseMatrix* bi_pool_t = nullptr;
  const SparseMatrix* ub_t = nullptr;
  const SparseMatrix* bu_t = nullptr;
  const SparseMatrix* b2b_t = nullptr;

  std::vector<SparseMatrix> owned;  // storage for node-dropped copies

  // Moves keep the pointers into `owned` valid; copies would not.
  EpochAdjacency() = default;
  EpochAdjacency(EpochAdjacency&&) = default;
  EpochAdjacency& operator=(EpochAdjacency&&) = default;
  EpochAdjacency(const EpochAdjacency&) = delete;
  EpochAdjacency& operator=(const EpochAdjacency&) = delete;
};

EpochAdjacency epoch_adjacency(const TripartiteGraph& graph,
                               const OverlapWeights* overlap,
                               const AblationSwitches& sw, double node_rate,
                               Rng* rng);

// Message-dropout masks, one per aggregate feeding a transform, per layer.
// All vectors are empty when the rate is zero.
struct MessageMasks {
  std::vector<DenseMatrix> item_p;  // M x d, layer 1..L
  std::vector<DenseMatrix> item_q;  // O x d
  std::vector<DenseMatrix> bl_p;    // M x d
  std::vector<DenseMatrix> bl_r;    // N x d
  std::vector<DenseMatrix> b2b;     // N x d
  bool active() const { return !item_p.empty() || !bl_p.empty(); }
};

MessageMasks make_message_masks(index_t num_users, index_t num_bundles,
                                index_t num_items, index_t d, int layers,
                                const AblationSwitches& sw, double rate,
                                Rng& rng);

// Per-layer embeddings at both levels, their concatenations, and the final
// scoring representations (active levels concatenated side by side).
struct PropagatedEmbeddings {
  std::vector<DenseMatrix> p1, q1, r1;  // item level, layers 0..L
  std::vector<DenseMatrix> p2, r2;      // bundle level, layers 0..L
  DenseMatrix p1s, r1s, p2s, r2s;       // layer concatenations
  DenseMatrix user_repr, bundle_repr;
};

// Intermediates needed by the analytic backward pass; index l holds layer
// l+1's transform input X and preactivation.
struct ForwardCache {
  std::vector<DenseMatrix> x_p1, x_q1, pre_p1, pre_q1;
  std::vector<DenseMatrix> x_p2, x_r2, pre_p2, pre_r2;
};

struct ForwardResult {
  PropagatedEmbeddings emb;
  ForwardCache cache;
};

ForwardResult bgcn_forward(const EpochAdjacency& adj, const ModelParams& params,
                           const AblationSwitches& sw,
                           const MessageMasks& masks, double leaky_slope);

// Inference-time forward: no dropout, graph adjacencies as-is.
ForwardResult bgcn_forward(const TripartiteGraph& graph,
                           const OverlapWeights* overlap,
                           const ModelParams& params,
                           const AblationSwitches& sw, double leaky_slope);

double predict(const PropagatedEmbeddings& emb, index_t user, index_t bundle);

struct BackwardResult {
  double data_loss = 0.0;   // sum of -ln sigmoid(margin) over the batch
  double total_loss = 0.0;  // data_loss + lambda * ||Theta||^2
  ModelParams grads;
};

// Exact gradients of the mini-batch BPR loss plus L2 regularization for every
// tensor. Must be handed the same masks and adjacencies as the paired
// forward.
BackwardResult bgcn_backward(const EpochAdjacency& adj,
                             const ModelParams& params,
                             const AblationSwitches& sw,
                             const MessageMasks& masks,
                             const ForwardResult& fwd,
                             std::span<const TrainTriple> batch, double lambda,
                             double leaky_slope);

// Plain inner-product scorer over frozen representations.
struct ScoreTable {
  DenseMatrix users;
  DenseMatrix bundles;
  double score(index_t u, index_t b) const {
    return dot_rows(users, u, bundles, b);
  }
};

ScoreTable score_table(const PropagatedEmbeddings& emb);

// MF-BPR baseline: separate user/bundle factor tables, plain inner product.
struct MfParams {
  index_t d = 0;
  DenseMatrix P;  // M x d
  DenseMatrix R;  // N x d

  static MfParams zeros_like(const MfParams& other);
};

std::vector<TensorRef> tensor_refs(MfParams& p);
std::vector<ConstTensorRef> tensor_refs(const MfParams& p);
double params_norm_sq(const MfParams& p);

MfParams init_mf_params(index_t num_users, index_t num_bundles, index_t d,
                        std::uint64_t seed);

double mf_score(const MfParams& p, index_t user, index_t bundle);
ScoreTable mf_score_table(const MfParams& p);

struct MfBackwardResult {
  double data_loss = 0.0;
  double total_loss = 0.0;
  MfParams grads;
};

MfBackwardResult mf_backward(const MfParams& params,
                             std::span<const TrainTriple> batch, double lambda);

}  // namespace bgcn
