#pragma once

#include <cmath>

namespace bgcn {

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// -ln \sigma(x) = softplus(-x); never returns inf for finite x.
inline double neg_log_sigmoid(double x) { return softplus(-x); }

}  // namespace bgcn
