#pragma once

#include <stdexcept>
#include <string>

namespace bgcn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dimension mismatches between matrices or between params and graph.
struct ShapeError : Error {
  using Error::Error;
};

// Dataset parsing and validation failures; messages carry file:line context.
struct LoadError : Error {
  using Error::Error;
};

// Bad magic, version, truncation or shape mismatch in a checkpoint file.
struct CheckpointError : Error {
  using Error::Error;
};

// Non-finite values or divergence while training.
struct TrainError : Error {
  using Error::Error;
};

// Out-of-range node ids.
struct IndexError : Error {
  using Error::Error;
};

// Invalid user-supplied configuration; the CLI maps this to exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace bgcn
