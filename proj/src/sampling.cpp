#include "bgcn/sampling.hpp"

#include <algorithm>

#include "bgcn/scalar.hpp"

namespace bgcn {

bool UserPositives::contains(index_t u, index_t b) const {
  const auto& v = by_user[u];
  return std::binary_search(v.begin(), v.end(), b);
}

UserPositives UserPositives::build(index_t num_users, index_t num_bundles,
                                   std::span<const IdPair> ub_pairs) {
  UserPositives up;
  up.num_users = num_users;
  up.num_bundles = num_bundles;
  up.by_user.resize(static_cast<std::size_t>(num_users));
  up.pairs.assign(ub_pairs.begin(), ub_pairs.end());
  std::sort(up.pairs.begin(), up.pairs.end());
  for (const auto& [u, b] : up.pairs) {
    if (u < 0 || u >= num_users || b < 0 || b >= num_bundles) {
      throw IndexError("user-bundle pair (" + std::to_string(u) + ", " +
                       std::to_string(b) + ") out of range");
    }
    up.by_user[u].push_back(b);
  }
  return up;
}

double bpr_loss(std::span<const double> pos, std::span<const double> neg) {
  if (pos.size() != neg.size()) {
    throw ShapeError("bpr_loss: score vectors differ in length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    acc += neg_log_sigmoid(pos[i] - neg[i]);
  }
  return acc;
}

double bpr_loss(std::span<const double> pos, std::span<const double> neg,
                double theta_norm_sq, double lambda) {
  return bpr_loss(pos, neg) + lambda * theta_norm_sq;
}

HardCandidateIndex build_hard_index(const TripartiteGraph& graph,
                                    const OverlapWeights& overlap,
                                    const UserPositives& train, double tau,
                                    double min_overlap) {
  if (tau <= 0.0 || tau > 1.0) {
    throw ConfigError("hard index: tau must lie in (0, 1]");
  }
  HardCandidateIndex idx;
  idx.tau = tau;
  idx.min_overlap = min_overlap;

  // Item-level family: bundles whose items the user has mostly interacted
  // with. Hit counts accumulated through the item->bundle incidence.
  idx.coverage_by_user.resize(static_cast<std::size_t>(graph.num_users));
  std::vector<double> hits(static_cast<std::size_t>(graph.num_bundles), 0.0);
  std::vector<index_t> touched;
  for (index_t u = 0; u < graph.num_users; ++u) {
    touched.clear();
    for (index_t i : graph.ui.row_cols(u)) {
      for (index_t b : graph.ib.row_cols(i)) {
        if (hits[b] == 0.0) touched.push_back(b);
        hits[b] += 1.0;
      }
    }
    std::sort(touched.begin(), touched.end());
    auto& cands = idx.coverage_by_user[u];
    for (index_t b : touched) {
      const double coverage =
          hits[b] / static_cast<double>(graph.bi.row_degree(b));
      if (coverage >= tau && !train.contains(u, b)) cands.push_back(b);
      hits[b] = 0.0;
    }
  }

  // Bundle-level family: support of the overlap matrix at the threshold.
  idx.overlap_by_bundle.resize(static_cast<std::size_t>(graph.num_bundles));
  for (index_t b = 0; b < graph.num_bundles; ++b) {
    const auto cols = overlap.counts.row_cols(b);
    const auto vals = overlap.counts.row_vals(b);
    auto& cands = idx.overlap_by_bundle[b];
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (vals[k] >= min_overlap) cands.push_back(cols[k]);
    }
  }
  return idx;
}

index_t draw_uniform_negative(const UserPositives& train, index_t u, Rng& rng) {
  const auto& pos = train.by_user[u];
  const index_t n = train.num_bundles;
  if (static_cast<index_t>(pos.size()) >= n) return -1;
  for (int attempt = 0; attempt < 64; ++attempt) {
    const index_t c = rng.uniform_int(n);
    if (!std::binary_search(pos.begin(), pos.end(), c)) return c;
  }
  // Dense positive set: index directly into the complement.
  index_t k = rng.uniform_int(n - static_cast<index_t>(pos.size()));
  std::size_t pi = 0;
  for (index_t c = 0; c < n; ++c) {
    if (pi < pos.size() && pos[pi] == c) {
      ++pi;
      continue;
    }
    if (k == 0) return c;
    --k;
  }
  return -1;  // unreachable
}

namespace {

IdPair draw_positive(const UserPositives& train, Rng& rng, index_t* resamples) {
  if (train.pairs.empty()) throw TrainError("training split has no positives");
  const index_t max_attempts =
      static_cast<index_t>(train.pairs.size()) * 10 + 100;
  for (index_t attempt = 0; attempt < max_attempts; ++attempt) {
    const IdPair pair =
        train.pairs[rng.uniform_int(static_cast<index_t>(train.pairs.size()))];
    if (static_cast<index_t>(train.by_user[pair.first].size()) <
        train.num_bundles) {
      return pair;
    }
    if (resamples != nullptr) ++(*resamples);
  }
  throw TrainError("every sampled user interacts with all bundles");
}

}  // namespace

std::vector<TrainTriple> sample_uniform_batch(const UserPositives& train,
                                              index_t size, Rng& rng,
                                              index_t* resamples) {
  std::vector<TrainTriple> batch;
  batch.reserve(static_cast<std::size_t>(size));
  for (index_t i = 0; i < size; ++i) {
    const auto [u, b] = draw_positive(train, rng, resamples);
    const index_t c = draw_uniform_negative(train, u, rng);
    batch.push_back({u, b, c, false});
  }
  return batch;
}

std::pair<index_t, bool> sample_hard_negative(index_t u, index_t b,
                                              const HardCandidateIndex& index,
                                              const UserPositives& train,
                                              HardMode mode, double p_hard,
                                              Rng& rng) {
  if (mode != HardMode::None && p_hard > 0.0 && rng.uniform() < p_hard) {
    std::vector<index_t> candidates;
    if (mode == HardMode::Item || mode == HardMode::Both) {
      const auto& cov = index.coverage_by_user[u];
      candidates.assign(cov.begin(), cov.end());  // already excludes positives
    }
    if (mode == HardMode::Bundle || mode == HardMode::Both) {
      for (index_t c : index.overlap_by_bundle[b]) {
        if (!train.contains(u, c)) candidates.push_back(c);
      }
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()),
                       candidates.end());
    }
    if (!candidates.empty()) {
      const index_t pick =
          candidates[rng.uniform_int(static_cast<index_t>(candidates.size()))];
      return {pick, true};
    }
  }
  return {draw_uniform_negative(train, u, rng), false};
}

std::vector<TrainTriple> sample_hard_batch(const UserPositives& train,
                                           const HardCandidateIndex& index,
                                           HardMode mode, double p_hard,
                                           index_t size, Rng& rng,
                                           index_t* resamples) {
  std::vector<TrainTriple> batch;
  batch.reserve(static_cast<std::size_t>(size));
  for (index_t i = 0; i < size; ++i) {
    const auto [u, b] = draw_positive(train, rng, resamples);
    const auto [c, hard] =
        sample_hard_negative(u, b, index, train, mode, p_hard, rng);
    batch.push_back({u, b, c, hard});
  }
  return batch;
}

}  // namespace bgcn
