#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <utility>
#include <sys/wait.h>

#include "bgcn/data.hpp"
#include "bgcn/eval.hpp"
#include "support/test_util.hpp"

using namespace bgcn;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CmdResult run_cli(const test::TempDir& dir, const std::string& args) {
  const std::string out_path = dir.file("cmd.out");
  const std::string err_path = dir.file("cmd.err");
  const std::string cmd = std::string(BGCN_CLI_PATH) + " " + args + " >" +
                          out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = test::slurp(out_path);
  r.err = test::slurp(err_path);
  return r;
}

void write_synth_spec(const std::string& path) {
  test::spit(path,
             "users=50\nbundles=25\nitems=80\nlatent=6\n"
             "bundle_size_min=3\nbundle_size_max=8\n"
             "ui_min=10\nui_max=20\nub_min=4\nub_max=7\n"
             "noise=0.1\nitem_signal_weight=0.5\nseed=11\n");
}

}  // namespace

TEST_CASE("missing required flags is a usage error") {
  test::TempDir dir("cli_usage");
  const CmdResult r = run_cli(dir, "train --out x.ckpt");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("--data") != std::string::npos);

  const CmdResult unknown = run_cli(dir, "train --data d --out x --bogus 1");
  CHECK(unknown.exit_code == 2);
}

TEST_CASE("synth is deterministic and validates its spec") {
  test::TempDir dir("cli_synth");
  write_synth_spec(dir.file("spec.txt"));

  const CmdResult a =
      run_cli(dir, "synth --spec " + dir.file("spec.txt") + " --out " +
                       dir.file("data_a"));
  CHECK(a.exit_code == 0);
  CHECK(a.out.find("#U=50") != std::string::npos);

  const CmdResult b =
      run_cli(dir, "synth --spec " + dir.file("spec.txt") + " --out " +
                       dir.file("data_b"));
  CHECK(b.exit_code == 0);
  for (const char* name :
       {"sizes.txt", "user_bundle.txt", "user_item.txt", "bundle_item.txt",
        "truth_affinity.txt"}) {
    CHECK(test::slurp(dir.file("data_a/") + name) ==
          test::slurp(dir.file("data_b/") + name));
  }

  test::spit(dir.file("bad.txt"), "users=50\nbundles=25\nitems=80\nnoise=1.5\n");
  const CmdResult bad = run_cli(dir, "synth --spec " + dir.file("bad.txt") +
                                         " --out " + dir.file("nope"));
  CHECK(bad.exit_code == 2);
  CHECK(bad.err.find("noise") != std::string::npos);
}

TEST_CASE("the full pipeline runs: synth, train, evaluate, recommend") {
  test::TempDir dir("cli_pipe");
  write_synth_spec(dir.file("spec.txt"));
  REQUIRE(run_cli(dir, "synth --spec " + dir.file("spec.txt") + " --out " +
                           dir.file("data"))
              .exit_code == 0);

  const std::string train_flags =
      " --data " + dir.file("data") + " --d 8 --layers 1 --lr 3e-3" +
      " --lambda 1e-5 --batch-size 128 --max-epochs 4 --patience 2" +
      " --conv-k 5 --ks 5 --seed 9";

  SUBCASE("max-epochs 0 still writes a checkpoint") {
    const CmdResult r = run_cli(dir, "train --data " + dir.file("data") +
                                         " --out " + dir.file("init.ckpt") +
                                         " --max-epochs 0 --d 8 --layers 1");
    CHECK(r.exit_code == 0);
    const Checkpoint ckpt = load_checkpoint(dir.file("init.ckpt"));
    CHECK(ckpt.find("P") != nullptr);
    CHECK(ckpt.config_value("model") == "bgcn");
  }

  SUBCASE("same seed gives byte-identical checkpoints and logs") {
    REQUIRE(run_cli(dir, "train --out " + dir.file("a.ckpt") + train_flags)
                .exit_code == 0);
    REQUIRE(run_cli(dir, "train --out " + dir.file("b.ckpt") + train_flags)
                .exit_code == 0);
    CHECK(test::slurp(dir.file("a.ckpt")) == test::slurp(dir.file("b.ckpt")));
    CHECK(test::slurp(dir.file("a.ckpt.log")) ==
          test::slurp(dir.file("b.ckpt.log")));
    CHECK(!test::slurp(dir.file("a.ckpt.log")).empty());
  }

  SUBCASE("evaluate and recommend work against a trained checkpoint") {
    REQUIRE(run_cli(dir, "train --out " + dir.file("m.ckpt") + train_flags)
                .exit_code == 0);

    const CmdResult ev = run_cli(
        dir, "evaluate --data " + dir.file("data") + " --ckpt " +
                 dir.file("m.ckpt") + " --ks 5 --out " + dir.file("report.kv"));
    CHECK(ev.exit_code == 0);
    const std::string kv = test::slurp(dir.file("report.kv"));
    CHECK(kv.find("recall@5 all ") != std::string::npos);
    CHECK(kv.find("ndcg@5 all ") != std::string::npos);
    CHECK(kv.find("recall@20") == std::string::npos);

    const CmdResult grouped = run_cli(
        dir, "evaluate --data " + dir.file("data") + " --ckpt " +
                 dir.file("m.ckpt") + " --ks 5 --groups --out " +
                 dir.file("groups.kv"));
    CHECK(grouped.exit_code == 0);
    const std::string gkv = test::slurp(dir.file("groups.kv"));
    CHECK(gkv.find(" g0 ") != std::string::npos);
    // Weighted group mean reproduces the overall metric: parse the stdout
    // table for user counts and recall values.
    double overall = -1.0;
    std::vector<double> group_recall;
    std::vector<long> group_users;
    {
      std::stringstream ss(grouped.out);
      std::string line;
      bool in_group = false;
      while (std::getline(ss, line)) {
        long users = 0;
        double recall = 0.0, ndcg = 0.0;
        int k = 0;
        if (std::sscanf(line.c_str(), "group %*d (users: %ld)", &users) == 1) {
          group_users.push_back(users);
          in_group = true;
        } else if (std::sscanf(line.c_str(), "%d %lf %lf", &k, &recall,
                               &ndcg) == 3 &&
                   k == 5) {
          if (in_group) {
            group_recall.push_back(recall);
          } else if (overall < 0.0) {
            overall = recall;
          }
        }
      }
    }
    REQUIRE(overall >= 0.0);
    REQUIRE(group_recall.size() == group_users.size());
    REQUIRE(!group_recall.empty());
    double weighted = 0.0;
    long total = 0;
    for (std::size_t i = 0; i < group_recall.size(); ++i) {
      weighted += group_recall[i] * static_cast<double>(group_users[i]);
      total += group_users[i];
    }
    CHECK(weighted / static_cast<double>(total) ==
          doctest::Approx(overall).epsilon(1e-4));

    // recommend: scores nonincreasing, consistent with the ranking the
    // evaluator would produce, K larger than candidates lists everything.
    const CmdResult rec =
        run_cli(dir, "recommend --data " + dir.file("data") + " --ckpt " +
                         dir.file("m.ckpt") + " --user 3 --k 5");
    CHECK(rec.exit_code == 0);
    std::stringstream ss(rec.out);
    std::string line;
    double prev = 1e300;
    std::vector<index_t> listed;
    while (std::getline(ss, line)) {
      long rank = 0, bundle = 0;
      double score = 0.0;
      if (std::sscanf(line.c_str(), "%ld %ld %lf", &rank, &bundle, &score) == 3) {
        CHECK(score <= prev);
        prev = score;
        listed.push_back(bundle);
      }
    }
    CHECK(listed.size() == 5);

    // Cross-check the top entries against an in-process ranking.
    const Checkpoint ckpt = load_checkpoint(dir.file("m.ckpt"));
    const ModelParams params = bgcn_params_from_checkpoint(ckpt);
    const Dataset ds = load_dataset(dir.file("data"));
    SplitSpec split_spec;
    const DataSplit split = split_dataset(ds, split_spec);
    const TripartiteGraph graph = build_graph(split.train, ds.ui, ds.bi,
                                              ds.num_users, ds.num_bundles,
                                              ds.num_items);
    const OverlapWeights overlap = build_overlap(graph);
    const ForwardResult fwd =
        bgcn_forward(graph, &overlap, params, AblationSwitches{}, 0.01);
    const UserPositives train_pos =
        UserPositives::build(ds.num_users, ds.num_bundles, split.train);
    const auto ranked =
        rank_bundles(score_table(fwd.emb), 3, train_pos.by_user[3]);
    for (std::size_t i = 0; i < listed.size(); ++i) {
      CHECK(listed[i] == ranked[i]);
    }

    const CmdResult all = run_cli(
        dir, "recommend --data " + dir.file("data") + " --ckpt " +
                 dir.file("m.ckpt") + " --user 3 --k 99999");
    CHECK(all.exit_code == 0);
    std::size_t lines = 0;
    std::stringstream ss2(all.out);
    while (std::getline(ss2, line)) {
      if (line.find("resolved") == std::string::npos) ++lines;
    }
    CHECK(lines >= ranked.size());

    const CmdResult bad_user = run_cli(
        dir, "recommend --data " + dir.file("data") + " --ckpt " +
                 dir.file("m.ckpt") + " --user 5000 --k 3");
    CHECK(bad_user.exit_code == 2);
  }
}

TEST_CASE("evaluate scores a hand-built oracle checkpoint at recall 1") {
  test::TempDir dir("cli_oracle");
  // Tiny dataset: 2 users with 4 positives each over 8 bundles.
  Dataset ds;
  ds.num_users = 2;
  ds.num_bundles = 8;
  ds.num_items = 8;
  for (index_t b = 0; b < 8; ++b) ds.bi.emplace_back(b, b);
  for (index_t b = 0; b < 4; ++b) ds.ub.emplace_back(0, b);
  for (index_t b = 4; b < 8; ++b) ds.ub.emplace_back(1, b);
  ds.ui = {{0, 0}, {1, 4}};
  save_dataset(ds, dir.file("data"));

  // Find each user's test bundles under the default split, then build MF
  // factors whose scores are the test-truth indicator.
  const DataSplit split = split_dataset(ds, SplitSpec{});
  REQUIRE(!split.test.empty());
  MfParams params;
  params.d = 8;
  params.P = DenseMatrix(2, 8);
  params.R = DenseMatrix(8, 8);
  for (index_t b = 0; b < 8; ++b) params.R(b, b) = 1.0;
  for (auto [u, b] : split.test) params.P(u, b) = 1.0;
  save_checkpoint(dir.file("oracle.ckpt"), tensor_refs(std::as_const(params)),
                  "model=mf\nd=8\nsplit_seed=0\n");

  const CmdResult ev = run_cli(
      dir, "evaluate --data " + dir.file("data") + " --ckpt " +
               dir.file("oracle.ckpt") + " --ks 1,5 --out " + dir.file("r.kv"));
  CHECK(ev.exit_code == 0);
  const std::string kv = test::slurp(dir.file("r.kv"));
  CHECK(kv.find("recall@5 all 1.000000") != std::string::npos);
}

TEST_CASE("gradcheck subcommand exit codes and coverage") {
  test::TempDir dir("cli_gc");
  const CmdResult ok = run_cli(dir, "gradcheck --d 4 --layers 2");
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("PASS") != std::string::npos);
  // Every parameter tensor listed exactly once: P, Q, R + 4 per layer.
  std::size_t count = 0, pos = 0;
  while ((pos = ok.out.find("tensor ", pos)) != std::string::npos) {
    ++count;
    pos += 7;
  }
  CHECK(count == 11);

  const CmdResult bad = run_cli(dir, "gradcheck --d 4 --layers 1 --corrupt");
  CHECK(bad.exit_code == 1);
  CHECK(bad.out.find("FAIL") != std::string::npos);
}

TEST_CASE("train honours a key=value config file with flag precedence") {
  test::TempDir dir("cli_cfg");
  write_synth_spec(dir.file("spec.txt"));
  REQUIRE(run_cli(dir, "synth --spec " + dir.file("spec.txt") + " --out " +
                           dir.file("data"))
              .exit_code == 0);
  test::spit(dir.file("train.cfg"), "d=8\nlayers=1\nmax-epochs=0\nseed=77\n");
  const CmdResult r = run_cli(
      dir, "train --data " + dir.file("data") + " --out " + dir.file("c.ckpt") +
               " --config " + dir.file("train.cfg") + " --seed 5");
  CHECK(r.exit_code == 0);
  const Checkpoint ckpt = load_checkpoint(dir.file("c.ckpt"));
  CHECK(ckpt.config_value("d") == "8");        // from the file
  CHECK(ckpt.config_value("seed") == "5");     // flag wins over the file
  CHECK(ckpt.config_value("max_epochs") == "0");
}
