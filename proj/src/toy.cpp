#include "bgcn/toy.hpp"

namespace bgcn {

ToyInstance toy_instance() {
  ToyInstance toy;
  // Bundles: b0={0,1,2} b1={1,2,3} b2={4,5} b3={2,5,6,7}. b0/b1 share two
  // items, b0 and b2 share none, so the overlap matrix has varied weights.
  toy.bi = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {1, 3},
            {2, 4}, {2, 5}, {3, 2}, {3, 5}, {3, 6}, {3, 7}};
  // User 4 has no item interactions (empty item-level neighborhood).
  toy.ui = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 3}, {1, 4},
            {2, 5}, {2, 6}, {3, 0}, {3, 7}};
  toy.ub = {{0, 0}, {1, 1}, {2, 2}, {2, 3}, {3, 3}, {4, 1}};

  toy.graph = build_graph(toy.ub, toy.ui, toy.bi, 5, 4, 8);
  toy.overlap = build_overlap(toy.graph);
  toy.train_pos = UserPositives::build(5, 4, toy.ub);
  // Every triple satisfies the Q-set contract: pos observed, neg unobserved.
  toy.batch = {{0, 0, 2, false},
               {1, 1, 0, false},
               {2, 3, 1, false},
               {3, 3, 0, false},
               {4, 1, 3, false}};
  return toy;
}

}  // namespace bgcn
