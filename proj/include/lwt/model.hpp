#pragma once

// Length-wise hierarchical classifier: a shared temporal/spatial trunk, a
// length head that picks the word group, and one word branch per group.
//
//   window [1, C, T]
//     -> trunk: conv(1 x temporal) -> conv(C x 1) -> ELU -> avgpool(1 x 3)
//     -> feature [1, F, 1, W]
//          |-> length head: conv(1 x 16) -> ELU -> avgpool(1 x 15) -> FC(2)
//          |     `-> flat head: FC(5) on the same pooled length features
//          |-> short branch: 3 x [conv(1 x 10) -> ELU -> avgpool(1 x 3)] -> FC(2)
//          `-> long branch:  3 x [conv(1 x 10) -> ELU -> avgpool(1 x 3)] -> FC(3)

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lwt/data.hpp"
#include "lwt/kernel.hpp"

namespace lwt {

struct ModelConfig {
  std::size_t channels = 64;
  std::size_t samples = 512;
  std::size_t trunk_filters = 36;
  std::array<std::size_t, 3> word_filters{72, 144, 288};
  std::size_t temporal_kernel = 64;
  std::size_t word_kernel = 10;
  std::size_t length_kernel = 16;
  std::size_t length_pool = 15;
  std::size_t pool = 3;
  std::size_t n_short = 2;
  std::size_t n_long = 3;
};

/// Widths along the time axis at every stage, derived from the layer
/// extent formulas.
struct ShapePlan {
  std::size_t temporal_width = 0;  // after the temporal conv
  std::size_t feature_width = 0;   // after the trunk pool
  std::size_t length_conv_width = 0;
  std::size_t length_pooled_width = 0;
  std::array<std::size_t, 3> branch_conv_width{};
  std::array<std::size_t, 3> branch_pooled_width{};
};

/// Throws ConfigError naming the minimum sample count when any stage would
/// be empty.
ShapePlan plan_shapes(const ModelConfig& config);

/// Smallest window width for which every stage of `config`'s architecture
/// (ignoring config.samples) has a non-empty output.
std::size_t minimum_samples(const ModelConfig& config);

struct Trunk {
  ConvLayer temporal;
  ConvLayer spatial;
  AvgPoolLayer pool;
};

struct LengthHead {
  ConvLayer conv;
  AvgPoolLayer pool;
  FCLayer fc;
};

struct WordBranch {
  std::array<ConvLayer, 3> convs;
  AvgPoolLayer pool;
  FCLayer fc;
};

struct ParamRef {
  std::string name;
  Tensor* value;
};

struct ConstParamRef {
  std::string name;
  const Tensor* value;
};

struct HierarchicalModel {
  ModelConfig config;
  Trunk trunk;
  LengthHead length;
  WordBranch short_branch;
  WordBranch long_branch;
  FCLayer flat;

  WordBranch& branch(HyperLabel group) {
    return group == HyperLabel::short_word ? short_branch : long_branch;
  }
  const WordBranch& branch(HyperLabel group) const {
    return group == HyperLabel::short_word ? short_branch : long_branch;
  }

  /// Every weight and bias in a fixed order with dotted names such as
  /// "trunk.temporal.weight" or "long.conv2.bias".
  std::vector<ParamRef> parameters();
  std::vector<ConstParamRef> parameters() const;
};

/// Layers allocated for `config` with all parameters zero.
HierarchicalModel allocate_model(const ModelConfig& config);
/// Same layout as `model`, all parameters zero; used to hold gradients.
HierarchicalModel zeros_like(const HierarchicalModel& model);
/// Glorot-uniform weights and zero biases drawn from the seeded generator.
HierarchicalModel build_model(const ModelConfig& config, std::uint64_t seed);

struct LengthProbs {
  double p_short = 0.5;
  double p_long = 0.5;

  double of(HyperLabel group) const {
    return group == HyperLabel::short_word ? p_short : p_long;
  }
};

/// Accepts [1, C, T] or [1, 1, C, T]; returns the shared feature
/// [1, F, 1, W].
Tensor forward_trunk(const HierarchicalModel& model, const Tensor& window);
LengthProbs forward_length(const HierarchicalModel& model,
                           const Tensor& feature);
/// Softmax over the branch's own words, in branch_words() order.
Tensor forward_word(const HierarchicalModel& model, HyperLabel branch,
                    const Tensor& feature);
/// Five-way softmax from the length-head features, in kAllWords order.
Tensor forward_flat(const HierarchicalModel& model, const Tensor& feature);

/// Routing rule: short unless p_long is strictly larger.
HyperLabel route(const LengthProbs& probs);

struct Prediction {
  WordLabel label = WordLabel::hello;
  HyperLabel branch = HyperLabel::short_word;
  LengthProbs length;             // averaged over windows
  std::vector<double> word_probs; // averaged, chosen branch only
};

/// Cropped decoding: averages the length distribution over the windows,
/// routes, then averages the chosen branch's distribution and takes argmax.
Prediction predict(const HierarchicalModel& model,
                   std::span<const Tensor> windows);

struct FlatPrediction {
  WordLabel label = WordLabel::hello;
  std::vector<double> probs;  // averaged, kAllWords order
};

FlatPrediction predict_flat(const HierarchicalModel& model,
                            std::span<const Tensor> windows);

// Forward passes that keep every intermediate needed by the backward pass.

struct TrunkTrace {
  Tensor input;         // [1, 1, C, T]
  Tensor temporal_out;  // [1, F, C, T']
  Tensor spatial_out;   // [1, F, 1, T'] pre-activation
  Tensor activated;
  Tensor feature;       // [1, F, 1, W]
};

struct LengthTrace {
  Tensor conv_out;
  Tensor activated;
  Tensor pooled;
  Tensor logits;  // [1, 2]
  Tensor probs;
};

struct BranchTrace {
  std::array<Tensor, 3> inputs;
  std::array<Tensor, 3> conv_out;
  std::array<Tensor, 3> activated;
  Tensor pooled;
  Tensor logits;
  Tensor probs;
};

struct FlatTrace {
  Tensor logits;  // [1, 5]
  Tensor probs;
};

TrunkTrace trace_trunk(const Trunk& trunk, const Tensor& window);
LengthTrace trace_length(const LengthHead& head, const Tensor& feature);
BranchTrace trace_branch(const WordBranch& branch, const Tensor& feature);
/// Flat head on top of an existing length-head trace.
FlatTrace trace_flat(const FCLayer& flat, const LengthTrace& length);

// Backward passes accumulate parameter gradients into `grads` (same layout)
// and return the gradient with respect to their input feature.

void backward_trunk(const Trunk& trunk, const TrunkTrace& trace,
                    const Tensor& grad_feature, Trunk& grads);
Tensor backward_length(const LengthHead& head, const Tensor& feature,
                       const LengthTrace& trace, const Tensor& grad_logits,
                       LengthHead& grads);
Tensor backward_branch(const WordBranch& branch, const Tensor& feature,
                       const BranchTrace& trace, const Tensor& grad_logits,
                       WordBranch& grads);
/// Gradient through the flat head and the length-head conv/pool stack.
Tensor backward_flat(const HierarchicalModel& model, const Tensor& feature,
                     const LengthTrace& length, const Tensor& grad_logits,
                     HierarchicalModel& grads);

// Checkpoint: "LWM1", u32 manifest length, UTF-8 JSON manifest (config,
// variant, ordered parameter names and shapes), then every parameter as
// little-endian float64 in manifest order.

std::vector<std::uint8_t> encode_checkpoint(const HierarchicalModel& model,
                                            const std::string& variant);
struct Checkpoint {
  HierarchicalModel model;
  std::string variant;
};
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes,
                             const std::string& source);
void save_checkpoint(const HierarchicalModel& model, const std::string& variant,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lwt
