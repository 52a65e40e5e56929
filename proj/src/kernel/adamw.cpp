#include "lwt/adamw.hpp"

#include <cmath>

#include "lwt/errors.hpp"

namespace lwt {

AdamWState::AdamWState(const Tensor& param, AdamWConfig cfg)
    : first_moment(Tensor::zeros_like(param)),
      second_moment(Tensor::zeros_like(param)),
      config(cfg) {}

void adamw_step(Tensor& param, const Tensor& grad, AdamWState& state) {
  if (grad.shape() != param.shape() ||
      state.first_moment.shape() != param.shape() ||
      state.second_moment.shape() != param.shape()) {
    throw DimensionError("adamw_step: parameter " +
                         shape_to_string(param.shape()) + ", gradient " +
                         shape_to_string(grad.shape()) + " and moments " +
                         shape_to_string(state.first_moment.shape()) +
                         " must share one shape");
  }
  const AdamWConfig& c = state.config;
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  const double shrink = 1.0 - c.lr * c.weight_decay;

  double* p = param.data();
  double* m = state.first_moment.data();
  double* v = state.second_moment.data();
  const double* g = grad.data();
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    p[i] = p[i] * shrink - c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

}  // namespace lwt
