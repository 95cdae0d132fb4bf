#pragma once

#include <string>
#include <vector>

#include "bgcn/model.hpp"
#include "bgcn/sampling.hpp"

namespace bgcn {

// All bundles except the excluded ones, ordered by descending score; ties
// break by ascending bundle id so rankings are reproducible.
std::vector<index_t> rank_bundles(const ScoreTable& table, index_t user,
                                  std::span<const index_t> exclude_sorted);

// |top-K intersect truth| / |truth|. truth must be nonempty and sorted.
double recall_at_k(std::span<const index_t> ranked,
                   std::span<const index_t> truth_sorted, int k);

// Binary-relevance NDCG: DCG over 1/log2(rank+1), normalized by the ideal
// prefix of length min(|truth|, K).
double ndcg_at_k(std::span<const index_t> ranked,
                 std::span<const index_t> truth_sorted, int k);

struct GroupMetrics {
  index_t users = 0;
  std::vector<double> recall;  // aligned with EvalReport::ks
  std::vector<double> ndcg;
};

struct EvalReport {
  std::vector<int> ks;
  std::vector<double> recall;
  std::vector<double> ndcg;
  index_t evaluated_users = 0;
  std::vector<GroupMetrics> groups;  // empty unless grouping was requested
};

// Mean per-user Recall@K / NDCG@K over users with nonempty truth sets. The
// exclusion lists are removed from the candidate ranking (training positives,
// plus validation positives when scoring test). Per-user work may fan out
// over `threads`; the report is identical for any thread count.
EvalReport evaluate(const ScoreTable& table, const UserPositives& truth,
                    const UserPositives& exclusions, std::span<const int> ks,
                    const std::vector<int>* user_groups = nullptr,
                    int threads = 1);

std::string format_report(const EvalReport& report);
// One line per (metric, K, group): "recall@20 all 0.234700".
std::string report_kv(const EvalReport& report);

}  // namespace bgcn
