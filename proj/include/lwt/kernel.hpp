#pragma once

// Forward and backward passes for the layer types the classifiers are built
// from. Activations are NCHW: [batch, channels, height, width].

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "lwt/tensor.hpp"

namespace lwt {

/// Valid (unpadded) 2-D cross-correlation with stride 1.
struct ConvLayer {
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t in_channels = 1;
  std::size_t out_filters = 1;
  Tensor weights;  // [out_filters, in_channels, kernel_h, kernel_w]
  Tensor bias;     // [out_filters]

  ConvLayer() = default;
  ConvLayer(std::size_t kernel_h, std::size_t kernel_w, std::size_t in_channels,
            std::size_t out_filters);
};

struct AvgPoolLayer {
  std::size_t pool_h = 1;
  std::size_t pool_w = 1;
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
};

struct FCLayer {
  std::size_t in_features = 1;
  std::size_t out_features = 1;
  Tensor weights;  // [out_features, in_features]
  Tensor bias;     // [out_features]

  FCLayer() = default;
  FCLayer(std::size_t in_features, std::size_t out_features);
};

struct ConvGradients {
  Tensor input;  // empty when not requested
  Tensor weights;
  Tensor bias;
};

struct FCGradients {
  Tensor input;
  Tensor weights;
  Tensor bias;
};

// Extent arithmetic shared by layers and shape validation.
constexpr std::size_t conv_extent(std::size_t in, std::size_t kernel) {
  return in >= kernel ? in - kernel + 1 : 0;
}
constexpr std::size_t pool_extent(std::size_t in, std::size_t pool,
                                  std::size_t stride) {
  return in >= pool ? (in - pool) / stride + 1 : 0;
}

Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer);
/// Exact gradients of conv2d_forward. Skips the input gradient when
/// `need_input_grad` is false (first layer of a network).
ConvGradients conv2d_backward(const Tensor& input, const ConvLayer& layer,
                              const Tensor& grad_out,
                              bool need_input_grad = true);

Tensor avgpool_forward(const Tensor& input, const AvgPoolLayer& layer);
Tensor avgpool_backward(const Shape& input_shape, const AvgPoolLayer& layer,
                        const Tensor& grad_out);

/// Input [B, n] (or any rank whose trailing extents multiply to n).
Tensor fc_forward(const Tensor& input, const FCLayer& layer);
FCGradients fc_backward(const Tensor& input, const FCLayer& layer,
                        const Tensor& grad_out);

inline constexpr double kEluAlpha = 1.0;

Tensor elu(const Tensor& x);
/// `x` is the pre-activation input of elu.
Tensor elu_backward(const Tensor& x, const Tensor& grad_out);

/// Row-wise softmax over the last axis of a [B, k] tensor.
Tensor softmax(const Tensor& logits);
void softmax_inplace(std::span<double> row);

inline constexpr double kProbabilityFloor = 1e-12;

/// -log(probs[true_class]) with the probability clamped at kProbabilityFloor.
double cross_entropy(std::span<const double> probs, std::size_t true_class);

/// Gradient of cross_entropy(softmax(logits), true_class) with respect to
/// the logits, given the softmax output. Zero when the clamp is active.
void softmax_cross_entropy_grad(std::span<const double> probs,
                                std::size_t true_class, double scale,
                                std::span<double> grad_logits);

/// Uniform(-b, b) with b = sqrt(6 / (fan_in + fan_out)); biases zero.
void glorot_uniform_init(ConvLayer& layer, std::mt19937_64& rng);
void glorot_uniform_init(FCLayer& layer, std::mt19937_64& rng);

}  // namespace lwt
