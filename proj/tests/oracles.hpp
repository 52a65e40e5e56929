#pragma once

#include <algorithm>
#include <random>

#include "lwt/training.hpp"
#include "support.hpp"

namespace lwt::test {

// Per-sample length-wise objective with the branch weight held at `weight`.
// Holding it fixed is what the analytic gradient differentiates.
inline double detached_loss(const HierarchicalModel& m, const Tensor& window,
                            WordLabel label, double weight) {
  const HyperLabel group = hyper_label(label);
  const TrunkTrace trunk = trace_trunk(m.trunk, window);
  const LengthTrace length = trace_length(m.length, trunk.feature);
  const BranchTrace words = trace_branch(m.branch(group), trunk.feature);
  return cross_entropy(length.probs.values(), static_cast<std::size_t>(group)) +
         weight * cross_entropy(words.probs.values(), branch_index(label));
}

// Worst relative error between analytic and central-difference gradients of
// the full length-wise loss, over every parameter of a reduced model.
inline double lengthwise_gradient_error(std::uint64_t seed) {
  const ModelConfig c = reduced_config();
  HierarchicalModel m = build_model(c, seed);
  std::mt19937_64 rng(seed);
  const Tensor window = random_tensor({1, c.channels, c.samples}, rng);
  const WordLabel label = kAllWords[seed % kWordCount];

  const LossAndGradients lg = compute_loss(m, window, label);
  const LengthProbs p = forward_length(m, forward_trunk(m, window));
  const double weight = p.of(hyper_label(label));

  auto params = m.parameters();
  const auto grads = lg.gradients.parameters();
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    worst = std::max(worst, fd_check(*params[i].value, *grads[i].value, [&] {
                       return detached_loss(m, window, label, weight);
                     }));
  }
  return worst;
}

// Same check for the flat baseline's cross-entropy.
inline double flat_gradient_error(std::uint64_t seed) {
  const ModelConfig c = reduced_config();
  HierarchicalModel m = build_model(c, seed);
  std::mt19937_64 rng(seed + 1000);
  const Tensor window = random_tensor({1, c.channels, c.samples}, rng);
  const WordLabel label = kAllWords[seed % kWordCount];
  HierarchicalModel g = zeros_like(m);
  accumulate_flat_gradients(m, window, label, 1.0, g);
  auto params = m.parameters();
  const auto grads = g.parameters();
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    worst = std::max(worst, fd_check(*params[i].value, *grads[i].value, [&] {
                       return cross_entropy(
                           forward_flat(m, forward_trunk(m, window)).values(),
                           ordinal(label));
                     }));
  }
  return worst;
}

}  // namespace lwt::test
