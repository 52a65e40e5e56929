#pragma once

#include <cstdint>

#include "lwt/tensor.hpp"

namespace lwt {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
};

/// Moment estimates for one parameter tensor.
struct AdamWState {
  std::uint64_t step_count = 0;
  Tensor first_moment;
  Tensor second_moment;
  AdamWConfig config;

  AdamWState() = default;
  AdamWState(const Tensor& param, AdamWConfig config);
};

/// One bias-corrected Adam update with decoupled weight decay:
///   param <- param * (1 - lr * wd) - lr * m_hat / (sqrt(v_hat) + eps)
/// With a zero gradient history the step is exactly the shrink factor.
void adamw_step(Tensor& param, const Tensor& grad, AdamWState& state);

}  // namespace lwt
