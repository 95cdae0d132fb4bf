#pragma once

#include <vector>

#include "bgcn/matrix.hpp"

namespace bgcn {

enum class Relation {
  UserBundle,
  BundleUser,
  UserItem,
  ItemUser,
  BundleItem,
  ItemBundle,
};

// Unified heterogeneous graph over users, bundles and items. All interaction
// matrices are binary; the norm_* variants are row-normalized so that a
// sparse product realizes mean aggregation (zero-degree rows aggregate to
// zero). Transposes of the normalized adjacencies are cached for backward
// passes. Immutable after construction.
struct TripartiteGraph {
  index_t num_users = 0;    // M
  index_t num_bundles = 0;  // N
  index_t num_items = 0;    // O

  SparseMatrix ub, bu;  // user-bundle interactions and transpose
  SparseMatrix ui, iu;  // user-item interactions and transpose
  SparseMatrix bi, ib;  // bundle-item affiliation and transpose

  SparseMatrix norm_ub, norm_bu, norm_ui, norm_iu, norm_bi_pool;
  SparseMatrix norm_ub_t, norm_bu_t, norm_ui_t, norm_iu_t, norm_bi_pool_t;
};

// Bundle-bundle meta-path weights. counts holds the raw shared-item counts
// o(b, b') with zero diagonal; weighted holds the row-normalized beta values;
// uniform holds 1/|M_b| on the same support (the unweighted ablation).
struct OverlapWeights {
  SparseMatrix counts;
  SparseMatrix weighted;
  SparseMatrix uniform;
  SparseMatrix weighted_t;
  SparseMatrix uniform_t;
};

// Builds the graph from deduplicable pair lists. Throws IndexError on
// out-of-range ids and LoadError when a bundle has no items.
TripartiteGraph build_graph(std::span<const IdPair> ub_pairs,
                            std::span<const IdPair> ui_pairs,
                            std::span<const IdPair> bi_pairs, index_t num_users,
                            index_t num_bundles, index_t num_items);

// Computes shared-item overlaps via sparse row merging (never densifies).
// With jaccard=true the raw weights are |intersection|/|union| instead of the
// shared-item count; rows are normalized to sum to 1 either way.
OverlapWeights build_overlap(const TripartiteGraph& graph,
                             bool jaccard = false);

// Sorted, deduplicated neighbor ids under the requested relation.
std::vector<index_t> neighbors(const TripartiteGraph& graph, Relation rel,
                               index_t id);

// Group index per user keyed by training user-bundle degree. boundaries must
// be strictly increasing; a user with degree deg lands in the first group g
// with deg < boundaries[g], else in the last group.
std::vector<int> sparsity_groups(const TripartiteGraph& graph,
                                 std::span<const index_t> boundaries);

}  // namespace bgcn
