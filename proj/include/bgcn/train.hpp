#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bgcn/data.hpp"
#include "bgcn/eval.hpp"
#include "bgcn/graph.hpp"
#include "bgcn/model.hpp"
#include "bgcn/sampling.hpp"

namespace bgcn {

enum class ModelKind { Bgcn, Mf };

struct TrainConfig {
  ModelKind model = ModelKind::Bgcn;
  double lr = 3e-4;       // search grid {1e-5 .. 3e-3}
  double lambda = 1e-4;   // search grid {1e-7 .. 1e-2}
  index_t batch_size = 2048;
  index_t d = 64;
  int layers = 2;
  double message_dropout = 0.0;
  double node_dropout = 0.0;
  double leaky_slope = 0.01;
  double p_hard = 0.8;
  double tau = 0.5;
  double min_overlap = 1.0;
  int patience = 5;
  int max_epochs = 200;
  int eval_every = 1;
  int conv_k = 20;  // convergence / model-selection metric is Recall@conv_k
  std::uint64_t seed = 0;
  AblationSwitches switches;
  HardMode hard_mode = HardMode::Both;
  int threads = 1;  // evaluation fan-out during validation
  std::vector<int> eval_ks = {20, 40, 80};
  // Called with each log line as it is produced; not part of the run config.
  std::function<void(const std::string&)> progress;

  void validate() const;
};

struct TrainResult {
  ModelKind kind = ModelKind::Bgcn;
  ModelParams bgcn_params;  // best-validation snapshot when kind == Bgcn
  MfParams mf_params;       // likewise for the baseline
  std::string log;          // line-delimited training records
  int switch_epoch = -1;    // epoch of the uniform -> hard phase switch
  int best_epoch = 0;
  double best_metric = 0.0;
  int epochs_run = 0;
  bool diverged = false;

  std::vector<ConstTensorRef> best_tensor_refs() const;
};

// Two-phase BPR training: uniform negatives until validation Recall@conv_k
// stalls for `patience` evaluations, then hard negatives (or continued
// uniform sampling for HardMode::None) until a second stall or the epoch
// budget runs out. Returns the best-validation checkpoint; on divergence the
// last good checkpoint is returned with `diverged` set.
TrainResult train(const TrainConfig& config, const TripartiteGraph& graph,
                  const OverlapWeights* overlap, const UserPositives& train_pos,
                  const UserPositives& val_truth);

}  // namespace bgcn
