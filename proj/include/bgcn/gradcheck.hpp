#pragma once

#include <string>
#include <vector>

#include "bgcn/model.hpp"

namespace bgcn {

struct GradCheckOptions {
  index_t d = 8;
  int layers = 2;
  std::uint64_t seed = 42;
  double lambda = 1e-3;
  double eps = 1e-5;
  double leaky_slope = 0.01;
  double threshold = 1e-4;
  // Extra run of the full model with these dropout rates and fixed masks.
  double message_dropout = 0.3;
  double node_dropout = 0.3;
  bool corrupt = false;  // test hook: perturbs one analytic gradient entry
};

struct GradCheckReport {
  struct TensorError {
    std::string name;
    double max_rel_err = 0.0;
  };
  // One entry per parameter tensor, max relative error across all
  // ablation-switch combinations.
  std::vector<TensorError> tensors;
  double worst = 0.0;
  int combos_run = 0;

  bool pass(double threshold) const { return worst < threshold; }
};

// Compares the analytic backward pass against central finite differences on
// the built-in toy instance for every ablation-switch combination (plus one
// dropout run with frozen masks).
GradCheckReport run_gradcheck(const GradCheckOptions& opts);

}  // namespace bgcn
