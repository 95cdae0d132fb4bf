// Acceptance suite: one criterion per block, one PASS/FAIL line each.
// Run all criteria with no arguments or a single one with --only <name>.
// The youshu criterion needs BGCN_YOUSHU_DIR and is skipped (exit 77 when run
// alone) if the dataset is absent.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bgcn/data.hpp"
#include "bgcn/eval.hpp"
#include "bgcn/gradcheck.hpp"
#include "bgcn/graph.hpp"
#include "bgcn/sampling.hpp"
#include "bgcn/toy.hpp"
#include "bgcn/train.hpp"
#include "support/dense_oracle.hpp"

using namespace bgcn;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// criterion: gradients

bool check_gradients(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  GradCheckOptions opts;
  opts.d = 8;
  opts.layers = 2;
  const GradCheckReport report = run_gradcheck(opts);
  const double elapsed = seconds_since(start);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "max rel err %.3e over %d combos, %zu tensors, %.1fs",
                report.worst, report.combos_run, report.tensors.size(),
                elapsed);
  detail = buf;
  return report.worst < 1e-4 && elapsed < 60.0;
}

// ---------------------------------------------------------------------------
// criterion: dense-oracle

struct RandomInstance {
  std::vector<IdPair> ub, ui, bi;
  index_t m, n, o;
};

RandomInstance random_instance(Rng& rng) {
  RandomInstance inst;
  inst.m = 2 + rng.uniform_int(19);
  inst.n = 2 + rng.uniform_int(19);
  inst.o = 2 + rng.uniform_int(19);
  for (index_t b = 0; b < inst.n; ++b) {
    const index_t size = 1 + rng.uniform_int(std::min<index_t>(inst.o, 5));
    std::set<index_t> items;
    while (static_cast<index_t>(items.size()) < size) {
      items.insert(rng.uniform_int(inst.o));
    }
    for (index_t i : items) inst.bi.emplace_back(b, i);
  }
  for (index_t u = 0; u < inst.m; ++u) {
    for (index_t i = 0; i < inst.o; ++i) {
      if (rng.uniform() < 0.25) inst.ui.emplace_back(u, i);
    }
    for (index_t b = 0; b < inst.n; ++b) {
      if (rng.uniform() < 0.3) inst.ub.emplace_back(u, b);
    }
  }
  return inst;
}

bool check_dense_oracle(std::string& detail) {
  Rng rng(2024);
  const std::vector<AblationSwitches> combos = {
      {true, true, B2BMode::Weighted},  {true, true, B2BMode::Unweighted},
      {true, true, B2BMode::None},      {true, false, B2BMode::None},
      {false, true, B2BMode::Weighted}, {false, true, B2BMode::Unweighted},
  };
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const RandomInstance inst = random_instance(rng);
    const int layers = static_cast<int>(rng.uniform_int(4));  // L <= 3
    const AblationSwitches sw = combos[trial % combos.size()];

    const TripartiteGraph graph =
        build_graph(inst.ub, inst.ui, inst.bi, inst.m, inst.n, inst.o);
    const OverlapWeights overlap = build_overlap(graph);
    const ModelParams params =
        init_params(inst.m, inst.n, inst.o, 4, layers, 3000 + trial);
    const ForwardResult fwd = bgcn_forward(graph, &overlap, params, sw, 0.01);

    const auto og =
        test::oracle_graph(inst.ub, inst.ui, inst.bi, inst.m, inst.n, inst.o);
    const auto oe = test::oracle_forward(og, params, sw, 0.01);
    const auto [users, bundles] = test::oracle_reprs(og, oe, sw);
    for (index_t u = 0; u < inst.m; ++u) {
      for (index_t k = 0; k < fwd.emb.user_repr.cols; ++k) {
        worst =
            std::max(worst, std::fabs(fwd.emb.user_repr(u, k) - users[u][k]));
      }
    }
    for (index_t b = 0; b < inst.n; ++b) {
      for (index_t k = 0; k < fwd.emb.bundle_repr.cols; ++k) {
        worst = std::max(worst,
                         std::fabs(fwd.emb.bundle_repr(b, k) - bundles[b][k]));
      }
    }
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "max abs diff %.3e over 50 instances", worst);
  detail = buf;
  return worst < 1e-10;
}

// ---------------------------------------------------------------------------
// criterion: metrics

double ndcg_reference(std::span<const index_t> ranked,
                      std::span<const index_t> truth, int k) {
  double dcg = 0.0;
  for (index_t t : truth) {
    for (std::size_t pos = 0; pos < ranked.size() && pos < std::size_t(k);
         ++pos) {
      if (ranked[pos] == t) {
        dcg += std::log(2.0) / std::log(static_cast<double>(pos) + 2.0);
      }
    }
  }
  double idcg = 0.0;
  const std::size_t ideal = std::min<std::size_t>(truth.size(), k);
  for (std::size_t i = 0; i < ideal; ++i) {
    idcg += std::log(2.0) / std::log(static_cast<double>(i) + 2.0);
  }
  return dcg / idcg;
}

bool check_metrics(std::string& detail) {
  bool ok = true;

  // Hand-computed fixtures.
  const std::vector<index_t> ranked = {4, 7, 1, 9};
  ok &= recall_at_k(ranked, std::vector<index_t>{4, 7}, 2) == 1.0;
  ok &= recall_at_k(ranked, std::vector<index_t>{0, 2}, 4) == 0.0;
  ok &= std::fabs(recall_at_k(ranked, std::vector<index_t>{0, 2, 3, 7}, 4) -
                  0.25) < 1e-15;
  ok &= ndcg_at_k(ranked, std::vector<index_t>{4}, 4) == 1.0;
  const double rank2 = ndcg_at_k(ranked, std::vector<index_t>{7}, 4);
  ok &= std::fabs(rank2 - 1.0 / std::log2(3.0)) < 1e-12;
  ok &= std::fabs(rank2 - 0.6309) < 1e-4;

  // Independent reimplementation on random rankings.
  Rng rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const index_t n = 10 + rng.uniform_int(40);
    std::vector<index_t> order(n);
    for (index_t i = 0; i < n; ++i) order[i] = i;
    for (index_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[rng.uniform_int(i + 1)]);
    }
    std::vector<index_t> truth;
    for (index_t b = 0; b < n; ++b) {
      if (rng.uniform() < 0.25) truth.push_back(b);
    }
    if (truth.empty()) truth.push_back(order[0]);
    for (int k : {1, 3, 10, 25}) {
      worst = std::max(worst, std::fabs(ndcg_at_k(order, truth, k) -
                                        ndcg_reference(order, truth, k)));
    }
  }
  ok &= worst < 1e-12;
  char buf[80];
  std::snprintf(buf, sizeof buf, "fixtures exact, reimplementation diff %.3e",
                worst);
  detail = buf;
  return ok;
}

// ---------------------------------------------------------------------------
// criterion: hard-index

bool check_hard_index(std::string& detail) {
  Rng rng(555);
  index_t checked = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const index_t m = 5 + rng.uniform_int(4);
    const index_t n = 10 + rng.uniform_int(21);  // <= 30 bundles
    const index_t o = 12 + rng.uniform_int(8);
    std::vector<IdPair> ub, ui, bi;
    for (index_t b = 0; b < n; ++b) {
      std::set<index_t> items;
      const index_t size = 1 + rng.uniform_int(4);
      while (static_cast<index_t>(items.size()) < size) {
        items.insert(rng.uniform_int(o));
      }
      for (index_t i : items) bi.emplace_back(b, i);
    }
    for (index_t u = 0; u < m; ++u) {
      for (index_t i = 0; i < o; ++i) {
        if (rng.uniform() < 0.35) ui.emplace_back(u, i);
      }
      for (index_t b = 0; b < n; ++b) {
        if (rng.uniform() < 0.2) ub.emplace_back(u, b);
      }
    }
    const TripartiteGraph g = build_graph(ub, ui, bi, m, n, o);
    const OverlapWeights ow = build_overlap(g);
    const UserPositives train = UserPositives::build(m, n, ub);

    std::vector<std::set<index_t>> items(n), interacted(m);
    for (auto [b, i] : bi) items[b].insert(i);
    for (auto [u, i] : ui) interacted[u].insert(i);

    for (double tau : {0.3, 0.5, 0.8}) {
      const HardCandidateIndex idx = build_hard_index(g, ow, train, tau);
      for (index_t u = 0; u < m; ++u) {
        std::vector<index_t> want;
        for (index_t c = 0; c < n; ++c) {
          if (train.contains(u, c)) continue;
          index_t hit = 0;
          for (index_t i : items[c]) hit += interacted[u].count(i);
          if (static_cast<double>(hit) /
                  static_cast<double>(items[c].size()) >=
              tau) {
            want.push_back(c);
          }
        }
        if (idx.coverage_by_user[u] != want) {
          detail = "coverage mismatch at user " + std::to_string(u);
          return false;
        }
        ++checked;
      }
      for (index_t b = 0; b < n; ++b) {
        std::vector<index_t> want;
        for (index_t c = 0; c < n; ++c) {
          if (c == b) continue;
          index_t shared = 0;
          for (index_t i : items[c]) shared += items[b].count(i);
          if (shared >= 1) want.push_back(c);
        }
        if (idx.overlap_by_bundle[b] != want) {
          detail = "overlap mismatch at bundle " + std::to_string(b);
          return false;
        }
        ++checked;
      }
    }
  }
  detail = std::to_string(checked) + " candidate sets match brute force";
  return true;
}

// ---------------------------------------------------------------------------
// shared synthetic training runs for criteria 5 and 6

struct SynthEnv {
  SynthData synth;
  DataSplit split;
  TripartiteGraph graph;
  OverlapWeights overlap;
  UserPositives train_pos, val_truth, test_truth, trainval_pos;
};

// Two planted datasets: the fixed 200-user one for the effectiveness
// criterion, and a 500-user one that damps per-seed noise for the ablation
// direction checks.
const SynthEnv& synth_env(index_t users) {
  static std::map<index_t, SynthEnv*> envs;
  auto it = envs.find(users);
  if (it == envs.end()) {
    auto* e = new SynthEnv();
    SynthSpec spec;
    spec.users = users;
    e->synth = synth_generate(spec);
    e->split = split_dataset(e->synth.dataset, SplitSpec{});
    const Dataset& ds = e->synth.dataset;
    e->graph = build_graph(e->split.train, ds.ui, ds.bi, ds.num_users,
                           ds.num_bundles, ds.num_items);
    e->overlap = build_overlap(e->graph);
    e->train_pos = UserPositives::build(ds.num_users, ds.num_bundles,
                                        e->split.train);
    e->val_truth =
        UserPositives::build(ds.num_users, ds.num_bundles, e->split.val);
    e->test_truth =
        UserPositives::build(ds.num_users, ds.num_bundles, e->split.test);
    std::vector<IdPair> trainval = e->split.train;
    trainval.insert(trainval.end(), e->split.val.begin(), e->split.val.end());
    e->trainval_pos =
        UserPositives::build(ds.num_users, ds.num_bundles, trainval);
    it = envs.emplace(users, e).first;
  }
  return *it->second;
}

TrainConfig synth_config() {
  TrainConfig cfg;
  cfg.d = 32;
  cfg.layers = 2;
  cfg.lr = 1e-3;
  cfg.lambda = 1e-4;
  cfg.batch_size = 512;
  cfg.patience = 5;
  cfg.max_epochs = 150;
  cfg.eval_every = 1;
  cfg.conv_k = 20;
  cfg.eval_ks = {5};
  return cfg;
}

double test_recall5(const SynthEnv& env, const TrainResult& res,
                    const TrainConfig& cfg) {
  ScoreTable table;
  if (res.kind == ModelKind::Mf) {
    table = mf_score_table(res.mf_params);
  } else {
    const ForwardResult fwd = bgcn_forward(
        env.graph, &env.overlap, res.bgcn_params, cfg.switches, cfg.leaky_slope);
    table = score_table(fwd.emb);
  }
  const std::vector<int> ks = {5};
  const EvalReport report =
      evaluate(table, env.test_truth, env.trainval_pos, ks);
  return report.recall[0];
}

// Median test Recall@5 over three seeds, cached per (variant, dataset).
double variant_median(const std::string& name, index_t users) {
  static std::map<std::string, double> cache;
  const std::string key = name + "@" + std::to_string(users);
  const auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const SynthEnv& env = synth_env(users);
  TrainConfig cfg = synth_config();
  if (name == "mf") {
    cfg.model = ModelKind::Mf;
    cfg.hard_mode = HardMode::None;
  } else if (name == "full") {
    cfg.hard_mode = HardMode::Both;
  } else if (name == "ib-nohard") {
    cfg.hard_mode = HardMode::None;
  } else if (name == "item-only") {
    cfg.switches = {true, false, B2BMode::None};
    cfg.hard_mode = HardMode::None;
  } else if (name == "bundle-only") {
    cfg.switches = {false, true, B2BMode::Weighted};
    cfg.hard_mode = HardMode::None;
  } else if (name == "no-b2b") {
    cfg.switches = {true, true, B2BMode::None};
    cfg.hard_mode = HardMode::None;
  } else {
    throw Error("unknown variant " + name);
  }

  std::vector<double> recalls;
  for (std::uint64_t seed : {1, 2, 3}) {
    cfg.seed = seed;
    const TrainResult res =
        train(cfg, env.graph, &env.overlap, env.train_pos, env.val_truth);
    recalls.push_back(test_recall5(env, res, cfg));
  }
  std::sort(recalls.begin(), recalls.end());
  std::fprintf(stderr, "  variant %-11s (M=%lld) recall@5 seeds {%.4f %.4f %.4f}\n",
               name.c_str(), static_cast<long long>(users), recalls[0],
               recalls[1], recalls[2]);
  cache[key] = recalls[1];
  return recalls[1];
}

bool check_synthetic(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const double full = variant_median("full", 200);
  const double mf = variant_median("mf", 200);
  const double elapsed = seconds_since(start);
  const double improvement = (full - mf) / mf;
  detail = "bgcn=" + fmt(full) + " mf=" + fmt(mf) + " improvement=" +
           fmt(improvement * 100.0) + "% (need >= 10%), " + fmt(elapsed) + "s";
  return full >= mf * 1.10 && elapsed < 600.0;
}

bool check_ablation(std::string& detail) {
  const index_t users = 500;
  const double ib = variant_median("ib-nohard", users);
  const double bundle = variant_median("bundle-only", users);
  const double item = variant_median("item-only", users);
  const double nob2b = variant_median("no-b2b", users);
  const double hard = variant_median("full", users);

  // Middle pairs tolerate a 2% relative inversion; the end-to-end
  // inequalities are strict.
  const bool a1 = ib >= bundle * 0.98;
  const bool a2 = bundle >= item * 0.98;
  const bool a_strict = ib > item;
  const bool b = ib >= nob2b * 0.98;
  const bool c_strict = hard >= ib;

  detail = "ib=" + fmt(ib) + " bundle=" + fmt(bundle) + " item=" + fmt(item) +
           " no-b2b=" + fmt(nob2b) + " hard=" + fmt(hard);
  if (!a1) detail += " [inversion: ib < bundle beyond 2%]";
  if (!a2) detail += " [inversion: bundle < item beyond 2%]";
  if (!a_strict) detail += " [strict violation: ib <= item]";
  if (!b) detail += " [inversion: weighted < no-b2b beyond 2%]";
  if (!c_strict) detail += " [strict violation: hard < no-hard]";
  return a1 && a2 && a_strict && b && c_strict;
}

// ---------------------------------------------------------------------------
// criterion: determinism

bool check_determinism(std::string& detail) {
  const SynthEnv& env = synth_env(200);
  TrainConfig cfg = synth_config();
  cfg.max_epochs = 12;
  cfg.seed = 9;

  const TrainResult a =
      train(cfg, env.graph, &env.overlap, env.train_pos, env.val_truth);
  const TrainResult b =
      train(cfg, env.graph, &env.overlap, env.train_pos, env.val_truth);

  const std::string dir = std::string("/tmp/bgcn_acceptance_") +
                          std::to_string(::getpid());
  std::filesystem::create_directories(dir);
  save_checkpoint(dir + "/a.ckpt", a.best_tensor_refs(), "determinism=1\n");
  save_checkpoint(dir + "/b.ckpt", b.best_tensor_refs(), "determinism=1\n");
  std::ifstream fa(dir + "/a.ckpt", std::ios::binary);
  std::ifstream fb(dir + "/b.ckpt", std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  std::filesystem::remove_all(dir);

  const bool logs_equal = a.log == b.log;
  const bool ckpts_equal = sa.str() == sb.str() && !sa.str().empty();
  detail = std::string("checkpoints ") +
           (ckpts_equal ? "identical" : "DIFFER") + ", logs " +
           (logs_equal ? "identical" : "DIFFER");
  return logs_equal && ckpts_equal;
}

// ---------------------------------------------------------------------------
// criterion: youshu (optional tier)

bool check_youshu(std::string& detail, bool& skipped) {
  const char* dir = std::getenv("BGCN_YOUSHU_DIR");
  if (dir == nullptr || dir[0] == '\0') {
    skipped = true;
    detail = "BGCN_YOUSHU_DIR not set; dataset-dependent tier skipped";
    return true;
  }
  const Dataset ds = load_dataset(dir);
  const std::string stats = stats_line(ds);
  const std::string want =
      "#U=8039 #I=32770 #B=4771 #U-I=138515 #U-B=51377 AvgI/B=37.03";
  if (stats != want) {
    detail = "loader stats mismatch: " + stats;
    return false;
  }

  const DataSplit split = split_dataset(ds, SplitSpec{});
  const TripartiteGraph graph = build_graph(split.train, ds.ui, ds.bi,
                                            ds.num_users, ds.num_bundles,
                                            ds.num_items);
  const OverlapWeights overlap = build_overlap(graph);
  const UserPositives train_pos =
      UserPositives::build(ds.num_users, ds.num_bundles, split.train);
  const UserPositives val_truth =
      UserPositives::build(ds.num_users, ds.num_bundles, split.val);
  const UserPositives test_truth =
      UserPositives::build(ds.num_users, ds.num_bundles, split.test);
  std::vector<IdPair> trainval = split.train;
  trainval.insert(trainval.end(), split.val.begin(), split.val.end());
  const UserPositives trainval_pos =
      UserPositives::build(ds.num_users, ds.num_bundles, trainval);

  set_runtime_checks(false);
  TrainConfig cfg;
  cfg.lr = 3e-4;
  cfg.lambda = 1e-4;
  cfg.max_epochs = 60;
  cfg.patience = 5;
  cfg.threads = 8;
  cfg.eval_ks = {20, 40, 80};
  cfg.progress = [](const std::string& line) {
    std::fprintf(stderr, "  %s\n", line.c_str());
  };

  const TrainResult bgcn_res =
      train(cfg, graph, &overlap, train_pos, val_truth);
  TrainConfig mf_cfg = cfg;
  mf_cfg.model = ModelKind::Mf;
  mf_cfg.hard_mode = HardMode::None;
  const TrainResult mf_res =
      train(mf_cfg, graph, &overlap, train_pos, val_truth);
  set_runtime_checks(true);

  const ForwardResult fwd = bgcn_forward(graph, &overlap, bgcn_res.bgcn_params,
                                         cfg.switches, cfg.leaky_slope);
  const std::vector<int> ks = {20, 40, 80};
  const EvalReport bg =
      evaluate(score_table(fwd.emb), test_truth, trainval_pos, ks, nullptr, 8);
  const EvalReport mf = evaluate(mf_score_table(mf_res.mf_params), test_truth,
                                 trainval_pos, ks, nullptr, 8);

  bool beats = true;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    beats = beats && bg.recall[i] > mf.recall[i] && bg.ndcg[i] > mf.ndcg[i];
  }
  const bool in_band = std::fabs(bg.recall[0] - 0.2347) <= 0.15 * 0.2347;
  detail = "recall@20 bgcn=" + fmt(bg.recall[0]) + " (target 0.2347 +/-15%), " +
           "mf=" + fmt(mf.recall[0]) + (beats ? ", bgcn beats mf on all six" :
                                                ", mf wins somewhere");
  return in_band && beats;
}

struct Criterion {
  std::string name;
  std::function<bool(std::string&, bool&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = argv[++i];
  }

  auto plain = [](bool (*fn)(std::string&)) {
    return [fn](std::string& detail, bool&) { return fn(detail); };
  };
  const std::vector<Criterion> criteria = {
      {"gradient-correctness", plain(check_gradients)},
      {"dense-oracle-equivalence", plain(check_dense_oracle)},
      {"metric-correctness", plain(check_metrics)},
      {"hard-index-oracle", plain(check_hard_index)},
      {"synthetic-effectiveness", plain(check_synthetic)},
      {"ablation-directions", plain(check_ablation)},
      {"determinism", plain(check_determinism)},
      {"youshu-reproduction",
       [](std::string& detail, bool& skipped) {
         return check_youshu(detail, skipped);
       }},
  };

  int failures = 0;
  int ran = 0;
  int skips = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && c.name != only) continue;
    ++ran;
    std::string detail;
    bool skipped = false;
    bool ok = false;
    try {
      ok = c.run(detail, skipped);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
      ok = false;
    }
    if (skipped) {
      ++skips;
      std::printf("SKIP %s: %s\n", c.name.c_str(), detail.c_str());
      continue;
    }
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", c.name.c_str(),
                detail.c_str());
    if (!ok) ++failures;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
    return 2;
  }
  if (failures > 0) return 1;
  if (skips == ran) return 77;  // everything requested was skipped
  return 0;
}
