#include "lwt/model.hpp"

#include <algorithm>
#include <string>

#include "lwt/errors.hpp"
#include "lwt/random.hpp"

namespace lwt {

namespace {

void validate_config(const ModelConfig& c) {
  const std::array<std::size_t, 11> extents{
      c.channels,      c.samples,         c.trunk_filters,  c.word_filters[0],
      c.word_filters[1], c.word_filters[2], c.temporal_kernel, c.word_kernel,
      c.length_kernel, c.length_pool,     c.pool};
  if (std::any_of(extents.begin(), extents.end(),
                  [](std::size_t v) { return v == 0; })) {
    throw ConfigError("model extents, filter counts and kernels must be >= 1");
  }
  if (c.n_short != branch_words(HyperLabel::short_word).size() ||
      c.n_long != branch_words(HyperLabel::long_word).size()) {
    throw ConfigError("branch sizes must match the vocabulary (2 short, 3 long)");
  }
}

// Smallest input extent whose conv output is at least `out`.
std::size_t conv_input_for(std::size_t out, std::size_t kernel) {
  return out + kernel - 1;
}

// Smallest input extent whose pooled output is at least `out`.
std::size_t pool_input_for(std::size_t out, std::size_t pool,
                           std::size_t stride) {
  return (out - 1) * stride + pool;
}

AvgPoolLayer width_pool(std::size_t width) { return {1, width, 1, width}; }

Tensor as_trunk_input(const HierarchicalModel& model, const Tensor& window) {
  Tensor input = window;
  if (window.rank() == 3 && window.dim(0) == 1) {
    input.reshape({1, 1, window.dim(1), window.dim(2)});
  } else if (!(window.rank() == 4 && window.dim(0) == 1 &&
               window.dim(1) == 1)) {
    throw DimensionError("window must be [1,C,T] or [1,1,C,T], got " +
                         shape_to_string(window.shape()));
  }
  if (input.dim(2) != model.config.channels) {
    throw DimensionError("window channel axis: " +
                         std::to_string(input.dim(2)) +
                         " channels, model expects " +
                         std::to_string(model.config.channels));
  }
  return input;
}

void add_layer_params(std::vector<ParamRef>& out, const std::string& prefix,
                      ConvLayer& layer) {
  out.push_back({prefix + ".weight", &layer.weights});
  out.push_back({prefix + ".bias", &layer.bias});
}

void add_layer_params(std::vector<ParamRef>& out, const std::string& prefix,
                      FCLayer& layer) {
  out.push_back({prefix + ".weight", &layer.weights});
  out.push_back({prefix + ".bias", &layer.bias});
}

void add_branch_params(std::vector<ParamRef>& out, const std::string& prefix,
                       WordBranch& branch) {
  for (std::size_t i = 0; i < branch.convs.size(); ++i) {
    add_layer_params(out, prefix + ".conv" + std::to_string(i + 1),
                     branch.convs[i]);
  }
  add_layer_params(out, prefix + ".fc", branch.fc);
}

void accumulate(ConvLayer& into, const ConvGradients& grads) {
  into.weights += grads.weights;
  into.bias += grads.bias;
}

void accumulate(FCLayer& into, const FCGradients& grads) {
  into.weights += grads.weights;
  into.bias += grads.bias;
}

}  // namespace

ShapePlan plan_shapes(const ModelConfig& c) {
  validate_config(c);
  auto too_short = [&]() {
    return ConfigError("window of " + std::to_string(c.samples) +
                       " samples is too short for the architecture; minimum "
                       "width is " +
                       std::to_string(minimum_samples(c)) + " samples");
  };
  ShapePlan plan;
  plan.temporal_width = conv_extent(c.samples, c.temporal_kernel);
  plan.feature_width = pool_extent(plan.temporal_width, c.pool, c.pool);
  if (plan.feature_width == 0) throw too_short();
  plan.length_conv_width = conv_extent(plan.feature_width, c.length_kernel);
  plan.length_pooled_width =
      pool_extent(plan.length_conv_width, c.length_pool, c.length_pool);
  if (plan.length_pooled_width == 0) throw too_short();
  std::size_t width = plan.feature_width;
  for (std::size_t i = 0; i < 3; ++i) {
    plan.branch_conv_width[i] = conv_extent(width, c.word_kernel);
    plan.branch_pooled_width[i] =
        pool_extent(plan.branch_conv_width[i], c.pool, c.pool);
    if (plan.branch_pooled_width[i] == 0) throw too_short();
    width = plan.branch_pooled_width[i];
  }
  return plan;
}

std::size_t minimum_samples(const ModelConfig& c) {
  validate_config(c);
  std::size_t branch = 1;
  for (std::size_t i = 0; i < 3; ++i) {
    branch = conv_input_for(pool_input_for(branch, c.pool, c.pool),
                            c.word_kernel);
  }
  const std::size_t length = conv_input_for(
      pool_input_for(1, c.length_pool, c.length_pool), c.length_kernel);
  const std::size_t feature = std::max(branch, length);
  return conv_input_for(pool_input_for(feature, c.pool, c.pool),
                        c.temporal_kernel);
}

std::vector<ParamRef> HierarchicalModel::parameters() {
  std::vector<ParamRef> out;
  add_layer_params(out, "trunk.temporal", trunk.temporal);
  add_layer_params(out, "trunk.spatial", trunk.spatial);
  add_layer_params(out, "length.conv", length.conv);
  add_layer_params(out, "length.fc", length.fc);
  add_branch_params(out, "short", short_branch);
  add_branch_params(out, "long", long_branch);
  add_layer_params(out, "flat.fc", flat);
  return out;
}

std::vector<ConstParamRef> HierarchicalModel::parameters() const {
  std::vector<ConstParamRef> out;
  for (auto& p : const_cast<HierarchicalModel*>(this)->parameters()) {
    out.push_back({std::move(p.name), p.value});
  }
  return out;
}

HierarchicalModel allocate_model(const ModelConfig& c) {
  const ShapePlan plan = plan_shapes(c);
  HierarchicalModel m;
  m.config = c;
  m.trunk.temporal = ConvLayer(1, c.temporal_kernel, 1, c.trunk_filters);
  m.trunk.spatial = ConvLayer(c.channels, 1, c.trunk_filters, c.trunk_filters);
  m.trunk.pool = width_pool(c.pool);

  m.length.conv = ConvLayer(1, c.length_kernel, c.trunk_filters, c.trunk_filters);
  m.length.pool = width_pool(c.length_pool);
  const std::size_t length_features = c.trunk_filters * plan.length_pooled_width;
  m.length.fc = FCLayer(length_features, 2);

  for (HyperLabel group : {HyperLabel::short_word, HyperLabel::long_word}) {
    WordBranch& b = m.branch(group);
    std::size_t in = c.trunk_filters;
    for (std::size_t i = 0; i < 3; ++i) {
      b.convs[i] = ConvLayer(1, c.word_kernel, in, c.word_filters[i]);
      in = c.word_filters[i];
    }
    b.pool = width_pool(c.pool);
    const std::size_t outputs =
        group == HyperLabel::short_word ? c.n_short : c.n_long;
    b.fc = FCLayer(c.word_filters[2] * plan.branch_pooled_width[2], outputs);
  }
  m.flat = FCLayer(length_features, kWordCount);
  return m;
}

HierarchicalModel zeros_like(const HierarchicalModel& model) {
  HierarchicalModel out = model;
  for (auto& p : out.parameters()) p.value->fill(0.0);
  return out;
}

HierarchicalModel build_model(const ModelConfig& config, std::uint64_t seed) {
  HierarchicalModel m = allocate_model(config);
  auto rng = make_rng(seed, "init");
  glorot_uniform_init(m.trunk.temporal, rng);
  glorot_uniform_init(m.trunk.spatial, rng);
  glorot_uniform_init(m.length.conv, rng);
  glorot_uniform_init(m.length.fc, rng);
  for (WordBranch* b : {&m.short_branch, &m.long_branch}) {
    for (ConvLayer& conv : b->convs) glorot_uniform_init(conv, rng);
    glorot_uniform_init(b->fc, rng);
  }
  glorot_uniform_init(m.flat, rng);
  return m;
}

TrunkTrace trace_trunk(const Trunk& trunk, const Tensor& window) {
  TrunkTrace t;
  t.input = window;
  if (window.rank() == 3) t.input.reshape({1, 1, window.dim(1), window.dim(2)});
  t.temporal_out = conv2d_forward(t.input, trunk.temporal);
  t.spatial_out = conv2d_forward(t.temporal_out, trunk.spatial);
  t.activated = elu(t.spatial_out);
  t.feature = avgpool_forward(t.activated, trunk.pool);
  return t;
}

LengthTrace trace_length(const LengthHead& head, const Tensor& feature) {
  LengthTrace t;
  t.conv_out = conv2d_forward(feature, head.conv);
  t.activated = elu(t.conv_out);
  t.pooled = avgpool_forward(t.activated, head.pool);
  t.logits = fc_forward(t.pooled, head.fc);
  t.probs = softmax(t.logits);
  return t;
}

BranchTrace trace_branch(const WordBranch& branch, const Tensor& feature) {
  BranchTrace t;
  const Tensor* x = &feature;
  for (std::size_t i = 0; i < 3; ++i) {
    t.inputs[i] = *x;
    t.conv_out[i] = conv2d_forward(t.inputs[i], branch.convs[i]);
    t.activated[i] = elu(t.conv_out[i]);
    if (i < 2) {
      t.inputs[i + 1] = avgpool_forward(t.activated[i], branch.pool);
      x = &t.inputs[i + 1];
    }
  }
  t.pooled = avgpool_forward(t.activated[2], branch.pool);
  t.logits = fc_forward(t.pooled, branch.fc);
  t.probs = softmax(t.logits);
  return t;
}

FlatTrace trace_flat(const FCLayer& flat, const LengthTrace& length) {
  FlatTrace t;
  t.logits = fc_forward(length.pooled, flat);
  t.probs = softmax(t.logits);
  return t;
}

void backward_trunk(const Trunk& trunk, const TrunkTrace& trace,
                    const Tensor& grad_feature, Trunk& grads) {
  const Tensor g_act =
      avgpool_backward(trace.activated.shape(), trunk.pool, grad_feature);
  const Tensor g_spatial = elu_backward(trace.spatial_out, g_act);
  const ConvGradients spatial =
      conv2d_backward(trace.temporal_out, trunk.spatial, g_spatial);
  accumulate(grads.spatial, spatial);
  accumulate(grads.temporal, conv2d_backward(trace.input, trunk.temporal,
                                             spatial.input, false));
}

Tensor backward_length(const LengthHead& head, const Tensor& feature,
                       const LengthTrace& trace, const Tensor& grad_logits,
                       LengthHead& grads) {
  FCGradients fc = fc_backward(trace.pooled, head.fc, grad_logits);
  accumulate(grads.fc, fc);
  const Tensor g_act =
      avgpool_backward(trace.activated.shape(), head.pool, fc.input);
  const Tensor g_conv = elu_backward(trace.conv_out, g_act);
  ConvGradients conv = conv2d_backward(feature, head.conv, g_conv);
  accumulate(grads.conv, conv);
  return std::move(conv.input);
}

Tensor backward_branch(const WordBranch& branch, const Tensor& feature,
                       const BranchTrace& trace, const Tensor& grad_logits,
                       WordBranch& grads) {
  FCGradients fc = fc_backward(trace.pooled, branch.fc, grad_logits);
  accumulate(grads.fc, fc);
  Tensor g = std::move(fc.input);
  for (std::size_t k = 3; k-- > 0;) {
    const Tensor g_act =
        avgpool_backward(trace.activated[k].shape(), branch.pool, g);
    const Tensor g_conv = elu_backward(trace.conv_out[k], g_act);
    const Tensor& input = k == 0 ? feature : trace.inputs[k];
    ConvGradients conv = conv2d_backward(input, branch.convs[k], g_conv);
    accumulate(grads.convs[k], conv);
    g = std::move(conv.input);
  }
  return g;
}

Tensor backward_flat(const HierarchicalModel& model, const Tensor& feature,
                     const LengthTrace& length, const Tensor& grad_logits,
                     HierarchicalModel& grads) {
  FCGradients fc = fc_backward(length.pooled, model.flat, grad_logits);
  accumulate(grads.flat, fc);
  const Tensor g_act =
      avgpool_backward(length.activated.shape(), model.length.pool, fc.input);
  const Tensor g_conv = elu_backward(length.conv_out, g_act);
  ConvGradients conv = conv2d_backward(feature, model.length.conv, g_conv);
  accumulate(grads.length.conv, conv);
  return std::move(conv.input);
}

Tensor forward_trunk(const HierarchicalModel& model, const Tensor& window) {
  const Tensor input = as_trunk_input(model, window);
  const Trunk& trunk = model.trunk;
  return avgpool_forward(
      elu(conv2d_forward(conv2d_forward(input, trunk.temporal), trunk.spatial)),
      trunk.pool);
}

LengthProbs forward_length(const HierarchicalModel& model,
                           const Tensor& feature) {
  const LengthTrace t = trace_length(model.length, feature);
  return {t.probs[0], t.probs[1]};
}

Tensor forward_word(const HierarchicalModel& model, HyperLabel branch,
                    const Tensor& feature) {
  Tensor probs = trace_branch(model.branch(branch), feature).probs;
  probs.reshape({probs.size()});
  return probs;
}

Tensor forward_flat(const HierarchicalModel& model, const Tensor& feature) {
  Tensor probs =
      trace_flat(model.flat, trace_length(model.length, feature)).probs;
  probs.reshape({probs.size()});
  return probs;
}

HyperLabel route(const LengthProbs& probs) {
  return probs.p_long > probs.p_short ? HyperLabel::long_word
                                      : HyperLabel::short_word;
}

Prediction predict(const HierarchicalModel& model,
                   std::span<const Tensor> windows) {
  if (windows.empty()) {
    throw ArgumentError("predict needs at least one window");
  }
  const double n = static_cast<double>(windows.size());
  std::vector<Tensor> features;
  features.reserve(windows.size());
  Prediction out;
  out.length = {0.0, 0.0};
  for (const Tensor& w : windows) {
    features.push_back(forward_trunk(model, w));
    const LengthProbs p = forward_length(model, features.back());
    out.length.p_short += p.p_short;
    out.length.p_long += p.p_long;
  }
  out.length.p_short /= n;
  out.length.p_long /= n;
  out.branch = route(out.length);

  const auto words = branch_words(out.branch);
  out.word_probs.assign(words.size(), 0.0);
  for (const Tensor& f : features) {
    const Tensor probs = forward_word(model, out.branch, f);
    for (std::size_t i = 0; i < words.size(); ++i) out.word_probs[i] += probs[i];
  }
  for (double& v : out.word_probs) v /= n;
  const auto best = std::max_element(out.word_probs.begin(), out.word_probs.end());
  out.label = words[static_cast<std::size_t>(best - out.word_probs.begin())];
  return out;
}

FlatPrediction predict_flat(const HierarchicalModel& model,
                            std::span<const Tensor> windows) {
  if (windows.empty()) {
    throw ArgumentError("predict_flat needs at least one window");
  }
  FlatPrediction out;
  out.probs.assign(kWordCount, 0.0);
  for (const Tensor& w : windows) {
    const Tensor probs = forward_flat(model, forward_trunk(model, w));
    for (std::size_t i = 0; i < kWordCount; ++i) out.probs[i] += probs[i];
  }
  for (double& v : out.probs) v /= static_cast<double>(windows.size());
  const auto best = std::max_element(out.probs.begin(), out.probs.end());
  out.label = kAllWords[static_cast<std::size_t>(best - out.probs.begin())];
  return out;
}

}  // namespace lwt
