#include "bgcn/graph.hpp"

#include <algorithm>
#include <string>

namespace bgcn {

TripartiteGraph build_graph(std::span<const IdPair> ub_pairs,
                            std::span<const IdPair> ui_pairs,
                            std::span<const IdPair> bi_pairs, index_t num_users,
                            index_t num_bundles, index_t num_items) {
  if (num_users <= 0 || num_bundles <= 0 || num_items <= 0) {
    throw LoadError("graph: all node counts must be positive");
  }
  TripartiteGraph g;
  g.num_users = num_users;
  g.num_bundles = num_bundles;
  g.num_items = num_items;

  g.ub = SparseMatrix::from_pairs(num_users, num_bundles, ub_pairs);
  g.ui = SparseMatrix::from_pairs(num_users, num_items, ui_pairs);
  g.bi = SparseMatrix::from_pairs(num_bundles, num_items, bi_pairs);
  for (index_t b = 0; b < num_bundles; ++b) {
    if (g.bi.row_degree(b) == 0) {
      throw LoadError("bundle " + std::to_string(b) + " has no items");
    }
  }
  g.bu = transpose(g.ub);
  g.iu = transpose(g.ui);
  g.ib = transpose(g.bi);

  g.norm_ub = row_normalized(g.ub);
  g.norm_bu = row_normalized(g.bu);
  g.norm_ui = row_normalized(g.ui);
  g.norm_iu = row_normalized(g.iu);
  g.norm_bi_pool = row_normalized(g.bi);

  g.norm_ub_t = transpose(g.norm_ub);
  g.norm_bu_t = transpose(g.norm_bu);
  g.norm_ui_t = transpose(g.norm_ui);
  g.norm_iu_t = transpose(g.norm_iu);
  g.norm_bi_pool_t = transpose(g.norm_bi_pool);
  return g;
}

OverlapWeights build_overlap(const TripartiteGraph& graph, bool jaccard) {
  const index_t n = graph.num_bundles;
  OverlapWeights ow;
  ow.counts = SparseMatrix(n, n);

  // Z * Z^T row by row through the item incidence lists, with a dense
  // accumulator recycled across rows.
  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
  std::vector<index_t> touched;
  for (index_t b = 0; b < n; ++b) {
    touched.clear();
    for (index_t i : graph.bi.row_cols(b)) {
      for (index_t other : graph.ib.row_cols(i)) {
        if (other == b) continue;
        if (acc[other] == 0.0) touched.push_back(other);
        acc[other] += 1.0;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (index_t other : touched) {
      double w = acc[other];
      if (jaccard) {
        const double union_size =
            static_cast<double>(graph.bi.row_degree(b) +
                                graph.bi.row_degree(other)) -
            w;
        w /= union_size;
      }
      ow.counts.col_idx.push_back(other);
      ow.counts.values.push_back(w);
      acc[other] = 0.0;
    }
    ow.counts.row_ptr[b + 1] = static_cast<index_t>(ow.counts.col_idx.size());
  }

  ow.weighted = row_normalized(ow.counts);
  ow.uniform = ow.counts;
  for (index_t b = 0; b < n; ++b) {
    const index_t deg = ow.uniform.row_degree(b);
    if (deg == 0) continue;
    const double w = 1.0 / static_cast<double>(deg);
    for (index_t k = ow.uniform.row_ptr[b]; k < ow.uniform.row_ptr[b + 1]; ++k) {
      ow.uniform.values[k] = w;
    }
  }
  ow.weighted_t = transpose(ow.weighted);
  ow.uniform_t = transpose(ow.uniform);
  return ow;
}

std::vector<index_t> neighbors(const TripartiteGraph& graph, Relation rel,
                               index_t id) {
  const SparseMatrix* m = nullptr;
  switch (rel) {
    case Relation::UserBundle: m = &graph.ub; break;
    case Relation::BundleUser: m = &graph.bu; break;
    case Relation::UserItem: m = &graph.ui; break;
    case Relation::ItemUser: m = &graph.iu; break;
    case Relation::BundleItem: m = &graph.bi; break;
    case Relation::ItemBundle: m = &graph.ib; break;
  }
  if (id < 0 || id >= m->rows) {
    throw IndexError("neighbors: id " + std::to_string(id) +
                     " out of range for " + std::to_string(m->rows) + " nodes");
  }
  const auto cols = m->row_cols(id);
  return {cols.begin(), cols.end()};
}

std::vector<int> sparsity_groups(const TripartiteGraph& graph,
                                 std::span<const index_t> boundaries) {
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] <= boundaries[i - 1]) {
      throw ConfigError("sparsity_groups: boundaries must be strictly increasing");
    }
  }
  std::vector<int> groups(static_cast<std::size_t>(graph.num_users));
  for (index_t u = 0; u < graph.num_users; ++u) {
    const index_t deg = graph.ub.row_degree(u);
    int g = static_cast<int>(boundaries.size());
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
      if (deg < boundaries[i]) {
        g = static_cast<int>(i);
        break;
      }
    }
    groups[u] = g;
  }
  return groups;
}

}  // namespace bgcn
