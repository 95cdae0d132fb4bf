#pragma once

#include <functional>
#include <string_view>

#include "bgcn/matrix.hpp"

namespace bgcn {

// Per-tensor Adam accumulators. The step counter is shared convention: it is
// incremented at the start of every update.
struct AdamState {
  DenseMatrix m;
  DenseMatrix v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 1e-3;

  static AdamState like(const DenseMatrix& p, double lr_) {
    AdamState s;
    s.m = DenseMatrix(p.rows, p.cols);
    s.v = DenseMatrix(p.rows, p.cols);
    s.lr = lr_;
    return s;
  }
};

// Bias-corrected Adam update applied in place. Throws TrainError naming the
// parameter if the gradient contains non-finite values.
void adam_step(DenseMatrix& params, const DenseMatrix& grads, AdamState& state,
               std::string_view name);

// Central-difference gradient of `loss` with respect to every entry of
// `params`. The callback must read the current contents of `params`; entries
// are perturbed and restored one at a time.
DenseMatrix finite_diff_grad(const std::function<double()>& loss,
                             DenseMatrix& params, double eps = 1e-5);

}  // namespace bgcn
