#include <algorithm>
#include <cmath>
#include <string>

#include "lwt/errors.hpp"
#include "lwt/kernel.hpp"

namespace lwt {

namespace {

std::size_t fc_batch(const Tensor& input, const FCLayer& layer) {
  if (input.rank() < 1 || input.size() % layer.in_features != 0 ||
      input.size() / input.dim(0) != layer.in_features) {
    throw DimensionError("fc feature axis: input " +
                         shape_to_string(input.shape()) + " does not carry " +
                         std::to_string(layer.in_features) +
                         " features per sample");
  }
  if (layer.weights.shape() != Shape{layer.out_features, layer.in_features} ||
      layer.bias.shape() != Shape{layer.out_features}) {
    throw DimensionError("fc weights " +
                         shape_to_string(layer.weights.shape()) +
                         " do not match declared [" +
                         std::to_string(layer.out_features) + "," +
                         std::to_string(layer.in_features) + "]");
  }
  return input.dim(0);
}

}  // namespace

FCLayer::FCLayer(std::size_t in, std::size_t out)
    : in_features(in),
      out_features(out),
      weights(Shape{out, in}),
      bias(Shape{out}) {}

Tensor fc_forward(const Tensor& input, const FCLayer& layer) {
  const std::size_t batch = fc_batch(input, layer);
  const std::size_t n = layer.in_features, m = layer.out_features;
  Tensor out(Shape{batch, m});
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = input.data() + b * n;
    for (std::size_t o = 0; o < m; ++o) {
      const double* w = layer.weights.data() + o * n;
      double sum = layer.bias[o];
      for (std::size_t i = 0; i < n; ++i) sum += w[i] * x[i];
      out[b * m + o] = sum;
    }
  }
  return out;
}

FCGradients fc_backward(const Tensor& input, const FCLayer& layer,
                        const Tensor& grad_out) {
  const std::size_t batch = fc_batch(input, layer);
  const std::size_t n = layer.in_features, m = layer.out_features;
  if (grad_out.shape() != Shape{batch, m}) {
    throw DimensionError("fc_backward: grad_out shape " +
                         shape_to_string(grad_out.shape()) + " expected [" +
                         std::to_string(batch) + "," + std::to_string(m) + "]");
  }
  FCGradients grads{Tensor(input.shape()), Tensor::zeros_like(layer.weights),
                    Tensor::zeros_like(layer.bias)};
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = input.data() + b * n;
    double* gx = grads.input.data() + b * n;
    for (std::size_t o = 0; o < m; ++o) {
      const double g = grad_out[b * m + o];
      const double* w = layer.weights.data() + o * n;
      double* gw = grads.weights.data() + o * n;
      for (std::size_t i = 0; i < n; ++i) {
        gx[i] += g * w[i];
        gw[i] += g * x[i];
      }
      grads.bias[o] += g;
    }
  }
  return grads;
}

Tensor elu(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.values()) {
    if (v <= 0.0) v = kEluAlpha * std::expm1(v);
  }
  return out;
}

Tensor elu_backward(const Tensor& x, const Tensor& grad_out) {
  if (x.shape() != grad_out.shape()) {
    throw DimensionError("elu_backward: grad_out shape " +
                         shape_to_string(grad_out.shape()) +
                         " differs from input " + shape_to_string(x.shape()));
  }
  Tensor grad = grad_out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0) grad[i] *= kEluAlpha * std::exp(x[i]);
  }
  return grad;
}

void softmax_inplace(std::span<double> row) {
  const double top = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double& v : row) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : row) v /= total;
}

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 2 || logits.dim(1) < 2) {
    throw DimensionError("softmax expects [B,k] with k >= 2, got " +
                         shape_to_string(logits.shape()));
  }
  Tensor out = logits;
  const std::size_t k = logits.dim(1);
  for (std::size_t b = 0; b < logits.dim(0); ++b) {
    softmax_inplace(out.values().subspan(b * k, k));
  }
  return out;
}

double cross_entropy(std::span<const double> probs, std::size_t true_class) {
  if (true_class >= probs.size()) {
    throw IndexError("cross_entropy: class index " +
                     std::to_string(true_class) + " outside [0, " +
                     std::to_string(probs.size()) + ")");
  }
  return -std::log(std::max(probs[true_class], kProbabilityFloor));
}

void softmax_cross_entropy_grad(std::span<const double> probs,
                                std::size_t true_class, double scale,
                                std::span<double> grad_logits) {
  if (true_class >= probs.size()) {
    throw IndexError("softmax_cross_entropy_grad: class index " +
                     std::to_string(true_class) + " outside [0, " +
                     std::to_string(probs.size()) + ")");
  }
  if (grad_logits.size() != probs.size()) {
    throw DimensionError("softmax_cross_entropy_grad: gradient length " +
                         std::to_string(grad_logits.size()) +
                         " differs from probability length " +
                         std::to_string(probs.size()));
  }
  // The clamped region is flat.
  if (probs[true_class] < kProbabilityFloor) {
    std::fill(grad_logits.begin(), grad_logits.end(), 0.0);
    return;
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    grad_logits[i] = scale * (probs[i] - (i == true_class ? 1.0 : 0.0));
  }
}

namespace {

void fill_uniform(Tensor& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.values()) v = dist(rng);
}

}  // namespace

void glorot_uniform_init(ConvLayer& layer, std::mt19937_64& rng) {
  const double receptive = static_cast<double>(layer.kernel_h * layer.kernel_w);
  const double fan_in = static_cast<double>(layer.in_channels) * receptive;
  const double fan_out = static_cast<double>(layer.out_filters) * receptive;
  fill_uniform(layer.weights, std::sqrt(6.0 / (fan_in + fan_out)), rng);
  layer.bias.fill(0.0);
}

void glorot_uniform_init(FCLayer& layer, std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(layer.in_features);
  const double fan_out = static_cast<double>(layer.out_features);
  fill_uniform(layer.weights, std::sqrt(6.0 / (fan_in + fan_out)), rng);
  layer.bias.fill(0.0);
}

}  // namespace lwt
