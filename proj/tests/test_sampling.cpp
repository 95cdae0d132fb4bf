#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "bgcn/adam.hpp"
#include "bgcn/sampling.hpp"
#include "bgcn/scalar.hpp"
#include "bgcn/toy.hpp"

using namespace bgcn;

TEST_CASE("bpr loss fixed points") {
  const std::vector<double> zeros = {0.0};
  CHECK(bpr_loss(zeros, zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const std::vector<double> pos = {20.0};
  const std::vector<double> neg = {0.0};
  CHECK(bpr_loss(pos, neg) < 1e-8);

  CHECK(bpr_loss({}, {}, 4.0, 1e-3) == doctest::Approx(0.004));
  CHECK_THROWS_AS(bpr_loss(pos, {}), ShapeError);
}

TEST_CASE("bpr loss is strictly decreasing in the margin") {
  double prev = bpr_loss(std::vector<double>{-5.0}, std::vector<double>{0.0});
  for (double margin = -4.5; margin <= 5.0; margin += 0.5) {
    const double cur =
        bpr_loss(std::vector<double>{margin}, std::vector<double>{0.0});
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("uniform sampling is forced with a single free negative") {
  const UserPositives train =
      UserPositives::build(1, 2, std::vector<IdPair>{{0, 0}});
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto batch = sample_uniform_batch(train, 1, rng);
    CHECK(batch[0].user == 0);
    CHECK(batch[0].pos == 0);
    CHECK(batch[0].neg == 1);
    CHECK_FALSE(batch[0].hard);
  }
}

TEST_CASE("uniform sampling hits equally interacted users equally often") {
  std::vector<IdPair> pairs;
  for (index_t u = 0; u < 10; ++u) {
    for (index_t b = 0; b < 4; ++b) pairs.emplace_back(u, b);
  }
  const UserPositives train = UserPositives::build(10, 20, pairs);
  Rng rng(5);
  std::vector<index_t> counts(10, 0);
  const auto batch = sample_uniform_batch(train, 100000, rng);
  for (const auto& t : batch) ++counts[t.user];
  for (index_t u = 0; u < 10; ++u) {
    CHECK(static_cast<double>(counts[u]) / 1e5 ==
          doctest::Approx(0.1).epsilon(0.1));
  }
}

TEST_CASE("every sampled triple satisfies the Q-set contract") {
  const ToyInstance toy = toy_instance();
  Rng rng(9);
  const auto batch = sample_uniform_batch(toy.train_pos, 2048, rng);
  for (const auto& t : batch) {
    CHECK(toy.train_pos.contains(t.user, t.pos));
    CHECK_FALSE(toy.train_pos.contains(t.user, t.neg));
    CHECK(t.pos != t.neg);
  }
}

TEST_CASE("full coverage puts a bundle in the candidates at any tau") {
  // User 0 interacted with every item of bundle 1 but never the bundle.
  std::vector<IdPair> ub = {{0, 0}};
  std::vector<IdPair> ui = {{0, 1}, {0, 2}};
  std::vector<IdPair> bi = {{0, 0}, {1, 1}, {1, 2}};
  const TripartiteGraph g = build_graph(ub, ui, bi, 1, 2, 3);
  const OverlapWeights ow = build_overlap(g);
  const UserPositives train = UserPositives::build(1, 2, ub);
  for (double tau : {0.3, 0.5, 1.0}) {
    const auto idx = build_hard_index(g, ow, train, tau);
    CHECK(idx.coverage_by_user[0] == std::vector<index_t>{1});
  }
}

TEST_CASE("disjoint bundles never appear in each other's overlap candidates") {
  std::vector<IdPair> bi = {{0, 0}, {1, 1}, {2, 0}, {2, 2}};
  const TripartiteGraph g = build_graph({}, {}, bi, 1, 3, 3);
  const OverlapWeights ow = build_overlap(g);
  const UserPositives train = UserPositives::build(1, 3, {});
  const auto idx = build_hard_index(g, ow, train, 0.5);
  CHECK(idx.overlap_by_bundle[0] == std::vector<index_t>{2});
  CHECK(idx.overlap_by_bundle[1].empty());
  CHECK(idx.overlap_by_bundle[2] == std::vector<index_t>{0});
}

TEST_CASE("coverage 2/3 passes tau = 0.5") {
  // u interacted with {i0, i1}; bundle 1 = {i0, i1, i2}.
  std::vector<IdPair> ub = {{0, 0}};
  std::vector<IdPair> ui = {{0, 0}, {0, 1}};
  std::vector<IdPair> bi = {{0, 3}, {1, 0}, {1, 1}, {1, 2}};
  const TripartiteGraph g = build_graph(ub, ui, bi, 1, 2, 4);
  const OverlapWeights ow = build_overlap(g);
  const UserPositives train = UserPositives::build(1, 2, ub);
  const auto idx = build_hard_index(g, ow, train, 0.5);
  CHECK(idx.coverage_by_user[0] == std::vector<index_t>{1});
  const auto strict = build_hard_index(g, ow, train, 0.7);
  CHECK(strict.coverage_by_user[0].empty());
}

TEST_CASE("hard index equals brute-force enumeration on random instances") {
  Rng rng(13);
  for (int trial = 0; trial < 4; ++trial) {
    const index_t m = 6, n = 25, o = 15;
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
        if (rng.uniform() < 0.3) ui.emplace_back(u, i);
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
      const auto idx = build_hard_index(g, ow, train, tau);
      for (index_t u = 0; u < m; ++u) {
        std::vector<index_t> want;
        for (index_t c = 0; c < n; ++c) {
          if (train.contains(u, c)) continue;
          index_t hit = 0;
          for (index_t i : items[c]) hit += interacted[u].count(i);
          const double coverage =
              static_cast<double>(hit) / static_cast<double>(items[c].size());
          if (coverage >= tau) want.push_back(c);
        }
        CHECK(idx.coverage_by_user[u] == want);
      }
      for (index_t b = 0; b < n; ++b) {
        std::vector<index_t> want;
        for (index_t c = 0; c < n; ++c) {
          if (c == b) continue;
          index_t shared = 0;
          for (index_t i : items[c]) shared += items[b].count(i);
          if (shared >= 1) want.push_back(c);
        }
        CHECK(idx.overlap_by_bundle[b] == want);
      }
    }
  }
}

TEST_CASE("p_hard = 0 behaves exactly like the uniform sampler") {
  const ToyInstance toy = toy_instance();
  const auto idx = build_hard_index(toy.graph, toy.overlap, toy.train_pos, 0.5);
  Rng a(77), b(77);
  for (int i = 0; i < 200; ++i) {
    const auto hard = sample_hard_batch(toy.train_pos, idx, HardMode::Both, 0.0,
                                        1, a);
    const auto uni = sample_uniform_batch(toy.train_pos, 1, b);
    CHECK(hard[0].user == uni[0].user);
    CHECK(hard[0].pos == uni[0].pos);
    CHECK_FALSE(hard[0].hard);
  }
}

TEST_CASE("empty candidate union falls back to a uniform negative") {
  // One user, two bundles, disjoint items, no coverage: candidates empty.
  std::vector<IdPair> ub = {{0, 0}};
  std::vector<IdPair> bi = {{0, 0}, {1, 1}};
  const TripartiteGraph g = build_graph(ub, {}, bi, 1, 2, 2);
  const OverlapWeights ow = build_overlap(g);
  const UserPositives train = UserPositives::build(1, 2, ub);
  const auto idx = build_hard_index(g, ow, train, 0.5);
  Rng rng(3);
  const auto [c, hard] =
      sample_hard_negative(0, 0, idx, train, HardMode::Both, 1.0, rng);
  CHECK(c == 1);
  CHECK_FALSE(hard);
}

TEST_CASE("hard fraction concentrates at p_hard") {
  const ToyInstance toy = toy_instance();
  const auto idx = build_hard_index(toy.graph, toy.overlap, toy.train_pos, 0.3);
  Rng rng(17);
  index_t hard_count = 0, total = 0;
  const auto batch = sample_hard_batch(toy.train_pos, idx, HardMode::Both, 0.8,
                                       100000, rng);
  for (const auto& t : batch) {
    // Only count draws whose candidate union is provably nonempty: coverage
    // candidates exist for the user or overlap candidates for the positive.
    bool has_union = !idx.coverage_by_user[t.user].empty();
    for (index_t c : idx.overlap_by_bundle[t.pos]) {
      has_union = has_union || !toy.train_pos.contains(t.user, c);
    }
    if (!has_union) continue;
    ++total;
    hard_count += t.hard ? 1 : 0;
  }
  REQUIRE(total > 1000);
  CHECK(static_cast<double>(hard_count) / static_cast<double>(total) ==
        doctest::Approx(0.8).epsilon(0.0125));
}

TEST_CASE("hard negatives respect the Q-set contract and the family modes") {
  const ToyInstance toy = toy_instance();
  const auto idx = build_hard_index(toy.graph, toy.overlap, toy.train_pos, 0.3);
  Rng rng(19);
  const auto batch = sample_hard_batch(toy.train_pos, idx, HardMode::Item, 1.0,
                                       5000, rng);
  for (const auto& t : batch) {
    CHECK(toy.train_pos.contains(t.user, t.pos));
    CHECK_FALSE(toy.train_pos.contains(t.user, t.neg));
    if (t.hard) {
      const auto& cov = idx.coverage_by_user[t.user];
      CHECK(std::binary_search(cov.begin(), cov.end(), t.neg));
    }
  }
}

TEST_CASE("one adam step on a single triple decreases its loss") {
  MfParams params = init_mf_params(3, 4, 4, 23);
  const std::vector<TrainTriple> batch = {{1, 2, 0, false}};
  const double before = mf_backward(params, batch, 0.0).data_loss;

  bool decreased = false;
  for (double lr : {1e-1, 1e-2, 1e-3, 1e-4}) {
    MfParams trial = params;
    const MfBackwardResult bw = mf_backward(trial, batch, 0.0);
    std::vector<AdamState> st = {AdamState::like(trial.P, lr),
                                 AdamState::like(trial.R, lr)};
    adam_step(trial.P, bw.grads.P, st[0], "P");
    adam_step(trial.R, bw.grads.R, st[1], "R");
    const double after = mf_backward(trial, batch, 0.0).data_loss;
    if (after < before) {
      decreased = true;
      break;
    }
  }
  CHECK(decreased);
}
