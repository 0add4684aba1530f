#ifndef ORN_ADADELTA_HPP_
#define ORN_ADADELTA_HPP_

#include <cmath>
#include <stdexcept>

#include "orn/tensor.hpp"

namespace orn {

// Per-parameter adadelta accumulators. There is no global learning rate;
// the effective step adapts from the two running averages.
template <typename T>
struct AdadeltaState {
  Tensor<T> acc_grad_sq;    // E[g^2]
  Tensor<T> acc_update_sq;  // E[dx^2]
  double rho = 0.9;
  double eps = 1e-6;

  AdadeltaState() = default;
  AdadeltaState(const std::vector<std::size_t>& shape, double rho_ = 0.9,
                double eps_ = 1e-6)
      : acc_grad_sq(shape), acc_update_sq(shape), rho(rho_), eps(eps_) {}
};

template <typename T>
void adadelta_step(Tensor<T>& param, const Tensor<T>& grad,
                   AdadeltaState<T>& state) {
  if (!param.same_shape(grad) || !param.same_shape(state.acc_grad_sq)) {
    throw ShapeError("adadelta_step: param " + param.shape_str() + ", grad " +
                     grad.shape_str() + ", state " +
                     state.acc_grad_sq.shape_str() + " must agree");
  }
  const T rho = T(state.rho);
  const T eps = T(state.eps);
  for (std::size_t i = 0; i < param.numel(); ++i) {
    const T g = grad[i];
    if (!std::isfinite(static_cast<double>(g))) {
      throw std::runtime_error("adadelta_step: non-finite gradient at flat index " +
                               std::to_string(i));
    }
    T& eg = state.acc_grad_sq[i];
    T& ex = state.acc_update_sq[i];
    eg = rho * eg + (T(1) - rho) * g * g;
    const T dx = -std::sqrt(ex + eps) / std::sqrt(eg + eps) * g;
    ex = rho * ex + (T(1) - rho) * dx * dx;
    param[i] += dx;
  }
}

}  // namespace orn

#endif  // ORN_ADADELTA_HPP_
