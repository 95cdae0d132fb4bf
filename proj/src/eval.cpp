#include "bgcn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

namespace bgcn {

std::vector<index_t> rank_bundles(const ScoreTable& table, index_t user,
                                  std::span<const index_t> exclude_sorted) {
  if (user < 0 || user >= table.users.rows) {
    throw IndexError("rank_bundles: user " + std::to_string(user) +
                     " out of range");
  }
  const index_t n = table.bundles.rows;
  std::vector<std::pair<double, index_t>> scored;
  scored.reserve(static_cast<std::size_t>(n));
  for (index_t b = 0; b < n; ++b) {
    if (std::binary_search(exclude_sorted.begin(), exclude_sorted.end(), b)) {
      continue;
    }
    scored.emplace_back(table.score(user, b), b);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<index_t> ranked;
  ranked.reserve(scored.size());
  for (const auto& [s, b] : scored) ranked.push_back(b);
  return ranked;
}

double recall_at_k(std::span<const index_t> ranked,
                   std::span<const index_t> truth_sorted, int k) {
  if (truth_sorted.empty()) throw Error("recall_at_k: empty truth set");
  const std::size_t top = std::min<std::size_t>(ranked.size(), k);
  index_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) {
    if (std::binary_search(truth_sorted.begin(), truth_sorted.end(), ranked[i])) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(truth_sorted.size());
}

double ndcg_at_k(std::span<const index_t> ranked,
                 std::span<const index_t> truth_sorted, int k) {
  if (truth_sorted.empty()) throw Error("ndcg_at_k: empty truth set");
  const std::size_t top = std::min<std::size_t>(ranked.size(), k);
  double dcg = 0.0;
  for (std::size_t i = 0; i < top; ++i) {
    if (std::binary_search(truth_sorted.begin(), truth_sorted.end(), ranked[i])) {
      dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
  }
  const std::size_t ideal =
      std::min<std::size_t>(truth_sorted.size(), static_cast<std::size_t>(k));
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal; ++i) {
    idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  }
  return idcg == 0.0 ? 0.0 : dcg / idcg;
}

EvalReport evaluate(const ScoreTable& table, const UserPositives& truth,
                    const UserPositives& exclusions, std::span<const int> ks,
                    const std::vector<int>* user_groups, int threads) {
  const index_t num_users = table.users.rows;
  const std::size_t nk = ks.size();

  // Per-user metric rows, filled independently and reduced in id order so the
  // result does not depend on thread scheduling.
  std::vector<std::uint8_t> has_truth(static_cast<std::size_t>(num_users), 0);
  std::vector<double> per_user(static_cast<std::size_t>(num_users) * nk * 2, 0.0);

  auto eval_range = [&](index_t begin, index_t end) {
    for (index_t u = begin; u < end; ++u) {
      const auto& t = truth.by_user[u];
      if (t.empty()) continue;
      has_truth[u] = 1;
      const auto ranked = rank_bundles(table, u, exclusions.by_user[u]);
      double* row = per_user.data() + static_cast<std::size_t>(u) * nk * 2;
      for (std::size_t i = 0; i < nk; ++i) {
        row[2 * i] = recall_at_k(ranked, t, ks[i]);
        row[2 * i + 1] = ndcg_at_k(ranked, t, ks[i]);
      }
    }
  };

  if (threads <= 1 || num_users < 2) {
    eval_range(0, num_users);
  } else {
    const int n = std::min<int>(threads, static_cast<int>(num_users));
    std::vector<std::thread> pool;
    const index_t chunk = (num_users + n - 1) / n;
    for (int t = 0; t < n; ++t) {
      const index_t begin = t * chunk;
      const index_t end = std::min(num_users, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(eval_range, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  EvalReport report;
  report.ks.assign(ks.begin(), ks.end());
  report.recall.assign(nk, 0.0);
  report.ndcg.assign(nk, 0.0);

  int num_groups = 0;
  if (user_groups != nullptr) {
    for (int g : *user_groups) num_groups = std::max(num_groups, g + 1);
    report.groups.resize(static_cast<std::size_t>(num_groups));
    for (auto& g : report.groups) {
      g.recall.assign(nk, 0.0);
      g.ndcg.assign(nk, 0.0);
    }
  }

  for (index_t u = 0; u < num_users; ++u) {
    if (!has_truth[u]) continue;
    ++report.evaluated_users;
    const double* row = per_user.data() + static_cast<std::size_t>(u) * nk * 2;
    for (std::size_t i = 0; i < nk; ++i) {
      report.recall[i] += row[2 * i];
      report.ndcg[i] += row[2 * i + 1];
    }
    if (user_groups != nullptr) {
      auto& g = report.groups[(*user_groups)[u]];
      ++g.users;
      for (std::size_t i = 0; i < nk; ++i) {
        g.recall[i] += row[2 * i];
        g.ndcg[i] += row[2 * i + 1];
      }
    }
  }

  if (report.evaluated_users > 0) {
    for (std::size_t i = 0; i < nk; ++i) {
      report.recall[i] /= static_cast<double>(report.evaluated_users);
      report.ndcg[i] /= static_cast<double>(report.evaluated_users);
    }
  }
  for (auto& g : report.groups) {
    if (g.users == 0) continue;
    for (std::size_t i = 0; i < nk; ++i) {
      g.recall[i] /= static_cast<double>(g.users);
      g.ndcg[i] /= static_cast<double>(g.users);
    }
  }
  return report;
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}
}  // namespace

std::string format_report(const EvalReport& report) {
  std::string out;
  out += "evaluated users: " + std::to_string(report.evaluated_users) + "\n";
  out += "K        Recall    NDCG\n";
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    char line[64];
    std::snprintf(line, sizeof line, "%-8d %.6f  %.6f\n", report.ks[i],
                  report.recall[i], report.ndcg[i]);
    out += line;
  }
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    const auto& grp = report.groups[g];
    out += "group " + std::to_string(g) +
           " (users: " + std::to_string(grp.users) + ")\n";
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
      char line[64];
      std::snprintf(line, sizeof line, "%-8d %.6f  %.6f\n", report.ks[i],
                    grp.recall[i], grp.ndcg[i]);
      out += line;
    }
  }
  return out;
}

std::string report_kv(const EvalReport& report) {
  std::string out;
  for (std::size_t i = 0; i < report.ks.size(); ++i) {
    const std::string k = std::to_string(report.ks[i]);
    out += "recall@" + k + " all " + fmt(report.recall[i]) + "\n";
    out += "ndcg@" + k + " all " + fmt(report.ndcg[i]) + "\n";
  }
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    const auto& grp = report.groups[g];
    for (std::size_t i = 0; i < report.ks.size(); ++i) {
      const std::string k = std::to_string(report.ks[i]);
      out += "recall@" + k + " g" + std::to_string(g) + " " +
             fmt(grp.recall[i]) + "\n";
      out += "ndcg@" + k + " g" + std::to_string(g) + " " + fmt(grp.ndcg[i]) +
             "\n";
    }
  }
  return out;
}

}  // namespace bgcn
