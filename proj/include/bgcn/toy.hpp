#pragma once

#include <vector>

#include "bgcn/graph.hpp"
#include "bgcn/model.hpp"
#include "bgcn/sampling.hpp"

namespace bgcn {

// Fixed small instance (5 users, 8 items, 4 bundles) with overlapping
// bundles, one user without item interactions, and a valid training batch.
// Used by the gradient checker and by tests.
struct ToyInstance {
  TripartiteGraph graph;
  OverlapWeights overlap;
  UserPositives train_pos;
  std::vector<TrainTriple> batch;
  std::vector<IdPair> ub, ui, bi;
};

ToyInstance toy_instance();

}  // namespace bgcn
