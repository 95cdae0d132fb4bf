#include "bgcn/adam.hpp"

#include <cmath>
#include <string>

namespace bgcn {

void adam_step(DenseMatrix& params, const DenseMatrix& grads, AdamState& state,
               std::string_view name) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) ||
      !params.same_shape(state.v)) {
    throw ShapeError("adam_step: shape mismatch for " + std::string(name));
  }
  for (double g : grads.data) {
    if (!std::isfinite(g)) {
      throw TrainError("non-finite gradient for parameter " + std::string(name));
    }
  }
  state.step += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.data.size(); ++i) {
    const double g = grads.data[i];
    state.m.data[i] = b1 * state.m.data[i] + (1.0 - b1) * g;
    state.v.data[i] = b2 * state.v.data[i] + (1.0 - b2) * g * g;
    const double mhat = state.m.data[i] / corr1;
    const double vhat = state.v.data[i] / corr2;
    params.data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

DenseMatrix finite_diff_grad(const std::function<double()>& loss,
                             DenseMatrix& params, double eps) {
  if (eps <= 0.0) throw Error("finite_diff_grad: eps must be positive");
  DenseMatrix grad(params.rows, params.cols);
  for (std::size_t i = 0; i < params.data.size(); ++i) {
    const double saved = params.data[i];
    params.data[i] = saved + eps;
    const double up = loss();
    params.data[i] = saved - eps;
    const double down = loss();
    params.data[i] = saved;
    grad.data[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

}  // namespace bgcn
