#include "bgcn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "bgcn/adam.hpp"
#include "bgcn/sampling.hpp"
#include "bgcn/toy.hpp"

namespace bgcn {

namespace {

double rel_err(double a, double b) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-6});
  return std::fabs(a - b) / scale;
}

double toy_loss(const EpochAdjacency& adj, const ModelParams& params,
                const AblationSwitches& sw, const MessageMasks& masks,
                std::span<const TrainTriple> batch, double lambda,
                double slope) {
  const ForwardResult fwd = bgcn_forward(adj, params, sw, masks, slope);
  std::vector<double> pos, neg;
  for (const auto& t : batch) {
    pos.push_back(predict(fwd.emb, t.user, t.pos));
    neg.push_back(predict(fwd.emb, t.user, t.neg));
  }
  return bpr_loss(pos, neg, params_norm_sq(params), lambda);
}

}  // namespace

GradCheckReport run_gradcheck(const GradCheckOptions& opts) {
  const ToyInstance toy = toy_instance();

  struct Combo {
    AblationSwitches sw;
    double message_dropout;
    double node_dropout;
  };
  std::vector<Combo> combos;
  combos.push_back({{true, false, B2BMode::None}, 0.0, 0.0});
  for (B2BMode mode : {B2BMode::None, B2BMode::Unweighted, B2BMode::Weighted}) {
    combos.push_back({{false, true, mode}, 0.0, 0.0});
    combos.push_back({{true, true, mode}, 0.0, 0.0});
  }
  if (opts.message_dropout > 0.0 || opts.node_dropout > 0.0) {
    combos.push_back({{true, true, B2BMode::Weighted}, opts.message_dropout,
                      opts.node_dropout});
  }

  GradCheckReport report;
  bool corrupted = !opts.corrupt;  // flip exactly one entry when requested

  for (const Combo& combo : combos) {
    ModelParams params =
        init_params(toy.graph.num_users, toy.graph.num_bundles,
                    toy.graph.num_items, opts.d, opts.layers, opts.seed);

    Rng drop_rng(derive_seed(opts.seed, 77));
    const EpochAdjacency adj =
        epoch_adjacency(toy.graph, &toy.overlap, combo.sw, combo.node_dropout,
                        combo.node_dropout > 0.0 ? &drop_rng : nullptr);
    const MessageMasks masks = make_message_masks(
        toy.graph.num_users, toy.graph.num_bundles, toy.graph.num_items, opts.d,
        opts.layers, combo.sw, combo.message_dropout, drop_rng);

    const ForwardResult fwd =
        bgcn_forward(adj, params, combo.sw, masks, opts.leaky_slope);
    BackwardResult bw = bgcn_backward(adj, params, combo.sw, masks, fwd,
                                      toy.batch, opts.lambda, opts.leaky_slope);
    if (!corrupted) {
      bw.grads.P(0, 0) += 1e-2;
      corrupted = true;
    }

    auto analytic = tensor_refs(bw.grads);
    auto prefs = tensor_refs(params);
    for (std::size_t i = 0; i < prefs.size(); ++i) {
      const DenseMatrix fd = finite_diff_grad(
          [&] {
            return toy_loss(adj, params, combo.sw, masks, toy.batch,
                            opts.lambda, opts.leaky_slope);
          },
          *prefs[i].tensor, opts.eps);
      double worst = 0.0;
      for (std::size_t k = 0; k < fd.data.size(); ++k) {
        worst = std::max(worst, rel_err(analytic[i].tensor->data[k], fd.data[k]));
      }
      auto it = std::find_if(
          report.tensors.begin(), report.tensors.end(),
          [&](const auto& t) { return t.name == prefs[i].name; });
      if (it == report.tensors.end()) {
        report.tensors.push_back({prefs[i].name, worst});
      } else {
        it->max_rel_err = std::max(it->max_rel_err, worst);
      }
      report.worst = std::max(report.worst, worst);
    }
    ++report.combos_run;
  }
  return report;
}

}  // namespace bgcn
