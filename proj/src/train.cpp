#include "bgcn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "bgcn/adam.hpp"

namespace bgcn {

void TrainConfig::validate() const {
  if (lr <= 0.0) throw ConfigError("lr must be positive");
  if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (d <= 0) throw ConfigError("d must be positive");
  if (layers < 0) throw ConfigError("layers must be nonnegative");
  if (message_dropout < 0.0 || message_dropout >= 1.0) {
    throw ConfigError("message_dropout must lie in [0, 1)");
  }
  if (node_dropout < 0.0 || node_dropout >= 1.0) {
    throw ConfigError("node_dropout must lie in [0, 1)");
  }
  if (p_hard < 0.0 || p_hard > 1.0) throw ConfigError("p_hard must lie in [0, 1]");
  if (tau <= 0.0 || tau > 1.0) throw ConfigError("tau must lie in (0, 1]");
  if (patience <= 0) throw ConfigError("patience must be positive");
  if (max_epochs < 0) throw ConfigError("max_epochs must be nonnegative");
  if (eval_every <= 0) throw ConfigError("eval_every must be positive");
  if (conv_k <= 0) throw ConfigError("conv_k must be positive");
  if (!switches.item_level && !switches.bundle_level) {
    throw ConfigError("at least one propagation level must be enabled");
  }
}

std::vector<ConstTensorRef> TrainResult::best_tensor_refs() const {
  if (kind == ModelKind::Bgcn) return tensor_refs(bgcn_params);
  return tensor_refs(mf_params);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

class Backend {
 public:
  virtual ~Backend() = default;
  virtual void epoch_begin(Rng& dropout_rng) = 0;
  virtual double step(std::span<const TrainTriple> batch, Rng& dropout_rng) = 0;
  virtual ScoreTable table() const = 0;
  virtual void snapshot(TrainResult& out) const = 0;
};

class BgcnBackend final : public Backend {
 public:
  BgcnBackend(const TrainConfig& cfg, const TripartiteGraph& graph,
              const OverlapWeights* overlap)
      : cfg_(cfg), graph_(graph), overlap_(overlap) {
    params_ = init_params(graph.num_users, graph.num_bundles, graph.num_items,
                          cfg.d, cfg.layers, cfg.seed);
    for (const auto& r : tensor_refs(params_)) {
      adam_.push_back(AdamState::like(*r.tensor, cfg.lr));
    }
    adj_ = epoch_adjacency(graph_, overlap_, cfg_.switches, 0.0, nullptr);
  }

  void epoch_begin(Rng& dropout_rng) override {
    if (cfg_.node_dropout > 0.0) {
      adj_ = epoch_adjacency(graph_, overlap_, cfg_.switches, cfg_.node_dropout,
                             &dropout_rng);
    }
  }

  double step(std::span<const TrainTriple> batch, Rng& dropout_rng) override {
    const MessageMasks masks = make_message_masks(
        graph_.num_users, graph_.num_bundles, graph_.num_items, cfg_.d,
        cfg_.layers, cfg_.switches, cfg_.message_dropout, dropout_rng);
    const ForwardResult fwd =
        bgcn_forward(adj_, params_, cfg_.switches, masks, cfg_.leaky_slope);
    BackwardResult bw = bgcn_backward(adj_, params_, cfg_.switches, masks, fwd,
                                      batch, cfg_.lambda, cfg_.leaky_slope);
    auto prefs = tensor_refs(params_);
    auto grefs = tensor_refs(bw.grads);
    for (std::size_t i = 0; i < prefs.size(); ++i) {
      adam_step(*prefs[i].tensor, *grefs[i].tensor, adam_[i], prefs[i].name);
    }
    return bw.total_loss;
  }

  ScoreTable table() const override {
    const ForwardResult fwd =
        bgcn_forward(graph_, overlap_, params_, cfg_.switches, cfg_.leaky_slope);
    return score_table(fwd.emb);
  }

  void snapshot(TrainResult& out) const override {
    out.kind = ModelKind::Bgcn;
    out.bgcn_params = params_;
  }

 private:
  TrainConfig cfg_;
  const TripartiteGraph& graph_;
  const OverlapWeights* overlap_;
  ModelParams params_;
  std::vector<AdamState> adam_;
  EpochAdjacency adj_;
};

class MfBackend final : public Backend {
 public:
  MfBackend(const TrainConfig& cfg, const TripartiteGraph& graph) : cfg_(cfg) {
    params_ = init_mf_params(graph.num_users, graph.num_bundles, cfg.d, cfg.seed);
    for (const auto& r : tensor_refs(params_)) {
      adam_.push_back(AdamState::like(*r.tensor, cfg.lr));
    }
  }

  void epoch_begin(Rng&) override {}

  double step(std::span<const TrainTriple> batch, Rng&) override {
    MfBackwardResult bw = mf_backward(params_, batch, cfg_.lambda);
    auto prefs = tensor_refs(params_);
    auto grefs = tensor_refs(bw.grads);
    for (std::size_t i = 0; i < prefs.size(); ++i) {
      adam_step(*prefs[i].tensor, *grefs[i].tensor, adam_[i], prefs[i].name);
    }
    return bw.total_loss;
  }

  ScoreTable table() const override { return mf_score_table(params_); }

  void snapshot(TrainResult& out) const override {
    out.kind = ModelKind::Mf;
    out.mf_params = params_;
  }

 private:
  TrainConfig cfg_;
  MfParams params_;
  std::vector<AdamState> adam_;
};

}  // namespace

TrainResult train(const TrainConfig& config, const TripartiteGraph& graph,
                  const OverlapWeights* overlap, const UserPositives& train_pos,
                  const UserPositives& val_truth) {
  config.validate();

  std::unique_ptr<Backend> backend;
  if (config.model == ModelKind::Bgcn) {
    backend = std::make_unique<BgcnBackend>(config, graph, overlap);
  } else {
    backend = std::make_unique<MfBackend>(config, graph);
  }

  const bool wants_hard =
      config.model == ModelKind::Bgcn && config.hard_mode != HardMode::None;
  HardCandidateIndex hard_index;
  if (wants_hard) {
    if (overlap == nullptr) {
      throw ConfigError("hard-negative sampling requires overlap weights");
    }
    hard_index = build_hard_index(graph, *overlap, train_pos, config.tau,
                                  config.min_overlap);
  }

  // Metric list for validation logs; the convergence K is always included.
  std::vector<int> ks = config.eval_ks;
  if (std::find(ks.begin(), ks.end(), config.conv_k) == ks.end()) {
    ks.push_back(config.conv_k);
  }
  const std::size_t conv_idx = static_cast<std::size_t>(
      std::find(ks.begin(), ks.end(), config.conv_k) - ks.begin());

  Rng rng_sample(derive_seed(config.seed, 1));
  Rng rng_dropout(derive_seed(config.seed, 2));

  TrainResult res;
  backend->snapshot(res);  // max_epochs == 0 returns the initialization
  std::string log;
  auto emit = [&](const std::string& line) {
    log += line + "\n";
    if (config.progress) config.progress(line);
  };

  double best = -1.0;
  int stall = 0;
  int phase = 1;
  index_t resamples = 0;
  bool resample_logged = false;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    backend->epoch_begin(rng_dropout);

    index_t remaining = static_cast<index_t>(train_pos.pairs.size());
    double loss_sum = 0.0;
    index_t batches = 0;
    bool bad = false;
    while (remaining > 0) {
      const index_t bs = std::min(config.batch_size, remaining);
      remaining -= bs;
      std::vector<TrainTriple> batch;
      if (phase == 2 && wants_hard) {
        batch = sample_hard_batch(train_pos, hard_index, config.hard_mode,
                                  config.p_hard, bs, rng_sample, &resamples);
      } else {
        batch = sample_uniform_batch(train_pos, bs, rng_sample, &resamples);
      }
      double loss = 0.0;
      try {
        loss = backend->step(batch, rng_dropout);
      } catch (const TrainError&) {
        bad = true;
      } catch (const Error&) {
        bad = true;
      }
      if (bad || !std::isfinite(loss)) {
        bad = true;
        break;
      }
      loss_sum += loss;
      ++batches;
    }
    if (resamples > 0 && !resample_logged) {
      emit("event=resample_positive");
      resample_logged = true;
    }
    if (bad) {
      emit("event=diverged epoch=" + std::to_string(epoch));
      res.diverged = true;
      break;
    }
    res.epochs_run = epoch;

    std::string line = "epoch=" + std::to_string(epoch) +
                       " phase=" + std::to_string(phase) +
                       " loss=" + fmt(loss_sum / static_cast<double>(batches));
    bool stop = false;
    if (epoch % config.eval_every == 0) {
      const ScoreTable t = backend->table();
      const EvalReport report =
          evaluate(t, val_truth, train_pos, ks, nullptr, config.threads);
      for (std::size_t i = 0; i < ks.size(); ++i) {
        line += " recall@" + std::to_string(ks[i]) + "=" + fmt(report.recall[i]);
        line += " ndcg@" + std::to_string(ks[i]) + "=" + fmt(report.ndcg[i]);
      }
      const double metric = report.recall[conv_idx];
      if (metric > best) {
        best = metric;
        stall = 0;
        res.best_epoch = epoch;
        backend->snapshot(res);
      } else {
        ++stall;
        if (stall >= config.patience) {
          if (phase == 1) {
            phase = 2;
            stall = 0;
            res.switch_epoch = epoch;
            emit(line);
            emit("event=phase_switch epoch=" + std::to_string(epoch));
            continue;
          }
          stop = true;
        }
      }
    }
    emit(line);
    if (stop) {
      emit("event=converged epoch=" + std::to_string(epoch));
      break;
    }
  }

  res.best_metric = best < 0.0 ? 0.0 : best;
  emit("event=done epochs=" + std::to_string(res.epochs_run) +
       " best_epoch=" + std::to_string(res.best_epoch) +
       " best_metric=" + fmt(res.best_metric) +
       " switch_epoch=" + std::to_string(res.switch_epoch));
  res.log = std::move(log);
  return res;
}

}  // namespace bgcn
