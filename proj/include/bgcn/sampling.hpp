#pragma once

#include <vector>

#include "bgcn/graph.hpp"
#include "bgcn/model.hpp"
#include "bgcn/rng.hpp"

namespace bgcn {

// Per-user positive bundle lists for one split of the user-bundle pairs.
struct UserPositives {
  index_t num_users = 0;
  index_t num_bundles = 0;
  std::vector<std::vector<index_t>> by_user;  // sorted ids per user
  std::vector<IdPair> pairs;                  // sorted flat (user, bundle)

  bool contains(index_t u, index_t b) const;
  static UserPositives build(index_t num_users, index_t num_bundles,
                             std::span<const IdPair> ub_pairs);
};

// Sum over the batch of -ln sigmoid(pos - neg); stable for any margin.
double bpr_loss(std::span<const double> pos, std::span<const double> neg);
// Full objective: data term + lambda * ||Theta||^2.
double bpr_loss(std::span<const double> pos, std::span<const double> neg,
                double theta_norm_sq, double lambda);

// Which hard-candidate families the sampler may draw from.
enum class HardMode { None, Item, Bundle, Both };

// Precomputed hard-negative candidates. coverage_by_user[u] holds bundles
// (not positives of u) whose items u has covered at ratio >= tau, using the
// training user-item interactions. overlap_by_bundle[b] holds bundles sharing
// at least min_overlap items with b; positives of the sampled user are
// filtered out at draw time.
struct HardCandidateIndex {
  double tau = 0.5;
  double min_overlap = 1.0;
  std::vector<std::vector<index_t>> coverage_by_user;
  std::vector<std::vector<index_t>> overlap_by_bundle;
};

HardCandidateIndex build_hard_index(const TripartiteGraph& graph,
                                    const OverlapWeights& overlap,
                                    const UserPositives& train, double tau,
                                    double min_overlap = 1.0);

// Uniform negative for user u, or -1 when every bundle is a positive of u.
index_t draw_uniform_negative(const UserPositives& train, index_t u, Rng& rng);

// Positives drawn uniformly from the training pairs, one uniform negative
// each. Users whose positives span all bundles are resampled; `resamples`,
// when given, is incremented per resample so the caller can log the first.
std::vector<TrainTriple> sample_uniform_batch(const UserPositives& train,
                                              index_t size, Rng& rng,
                                              index_t* resamples = nullptr);

// Negative for positive pair (u, b): with probability p_hard a uniform draw
// from the allowed candidate families minus u's positives, falling back to a
// uniform negative when the union is empty.
std::pair<index_t, bool> sample_hard_negative(index_t u, index_t b,
                                              const HardCandidateIndex& index,
                                              const UserPositives& train,
                                              HardMode mode, double p_hard,
                                              Rng& rng);

std::vector<TrainTriple> sample_hard_batch(const UserPositives& train,
                                           const HardCandidateIndex& index,
                                           HardMode mode, double p_hard,
                                           index_t size, Rng& rng,
                                           index_t* resamples = nullptr);

}  // namespace bgcn
