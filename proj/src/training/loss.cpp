#include <algorithm>
#include <cmath>

#include "lwt/errors.hpp"
#include "lwt/training.hpp"

namespace lwt {

double weighted_branch_loss(double weight, std::span<const double> probs,
                            std::size_t true_index) {
  return weight * cross_entropy(probs, true_index);
}

LengthwiseLoss lengthwise_loss(const LengthProbs& length,
                               std::span<const double> branch_probs,
                               WordLabel label) {
  const HyperLabel group = hyper_label(label);
  if (branch_probs.size() != branch_words(group).size()) {
    throw DimensionError("branch distribution has " +
                         std::to_string(branch_probs.size()) +
                         " entries, the " + std::string(to_string(group)) +
                         " branch has " +
                         std::to_string(branch_words(group).size()));
  }
  const std::array<double, 2> length_probs{length.p_short, length.p_long};
  LengthwiseLoss loss;
  loss.l_length = cross_entropy(length_probs, static_cast<std::size_t>(group));
  const double branch = weighted_branch_loss(length.of(group), branch_probs,
                                             branch_index(label));
  if (group == HyperLabel::short_word) {
    loss.l_short = branch;
  } else {
    loss.l_long = branch;
  }
  loss.total = loss.l_length + loss.l_short + loss.l_long;
  return loss;
}

SampleOutcome accumulate_lengthwise_gradients(const HierarchicalModel& model,
                                              const Tensor& window,
                                              WordLabel label, double scale,
                                              HierarchicalModel& grads) {
  const HyperLabel group = hyper_label(label);
  const std::size_t word = branch_index(label);

  const TrunkTrace trunk = trace_trunk(model.trunk, window);
  const LengthTrace length = trace_length(model.length, trunk.feature);
  const WordBranch& branch = model.branch(group);
  const BranchTrace words = trace_branch(branch, trunk.feature);

  const LengthProbs p{length.probs[0], length.probs[1]};
  SampleOutcome outcome;
  outcome.loss = lengthwise_loss(p, words.probs.values(), label);
  if (!std::isfinite(outcome.loss.total)) {
    throw NumericError("non-finite length-wise loss");
  }
  // A routing mistake always lands in the other group, so the prediction is
  // right exactly when both the route and the in-branch argmax are right.
  const auto wp = words.probs.values();
  const auto best = std::max_element(wp.begin(), wp.end()) - wp.begin();
  outcome.correct =
      route(p) == group && static_cast<std::size_t>(best) == word;

  Tensor g_length(Shape{1, 2});
  softmax_cross_entropy_grad(length.probs.values(),
                             static_cast<std::size_t>(group), scale,
                             g_length.values());
  // p enters the branch term as a constant weight.
  Tensor g_words(Shape{1, wp.size()});
  softmax_cross_entropy_grad(wp, word, scale * p.of(group), g_words.values());

  Tensor g_feature = backward_length(model.length, trunk.feature, length,
                                     g_length, grads.length);
  g_feature += backward_branch(branch, trunk.feature, words, g_words,
                               grads.branch(group));
  backward_trunk(model.trunk, trunk, g_feature, grads.trunk);
  return outcome;
}

SampleOutcome accumulate_flat_gradients(const HierarchicalModel& model,
                                        const Tensor& window, WordLabel label,
                                        double scale,
                                        HierarchicalModel& grads) {
  const TrunkTrace trunk = trace_trunk(model.trunk, window);
  const LengthTrace length = trace_length(model.length, trunk.feature);
  const FlatTrace flat = trace_flat(model.flat, length);

  SampleOutcome outcome;
  outcome.loss.total = cross_entropy(flat.probs.values(), ordinal(label));
  if (!std::isfinite(outcome.loss.total)) {
    throw NumericError("non-finite flat loss");
  }
  const auto probs = flat.probs.values();
  const auto best = std::max_element(probs.begin(), probs.end()) - probs.begin();
  outcome.correct = static_cast<std::size_t>(best) == ordinal(label);

  Tensor g_logits(Shape{1, kWordCount});
  softmax_cross_entropy_grad(probs, ordinal(label), scale, g_logits.values());
  const Tensor g_feature =
      backward_flat(model, trunk.feature, length, g_logits, grads);
  backward_trunk(model.trunk, trunk, g_feature, grads.trunk);
  return outcome;
}

LossAndGradients compute_loss(const HierarchicalModel& model,
                              const Tensor& window, WordLabel label) {
  LossAndGradients out{{}, zeros_like(model)};
  out.loss =
      accumulate_lengthwise_gradients(model, window, label, 1.0, out.gradients)
          .loss;
  return out;
}

}  // namespace lwt
