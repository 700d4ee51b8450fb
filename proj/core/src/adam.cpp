#include "cnet/adam.hpp"

#include <cmath>

#include "cnet/error.hpp"

namespace cnet {

template <typename T>
AdamState<T> AdamState<T>::for_parameters(std::span<const Parameter<T>> params,
                                          const AdamHyperparameters& hyper) {
  AdamState state;
  state.hyper = hyper;
  for (const auto& p : params) {
    state.first_moment.push_back(Tensor<T>::zeros(p.value.shape()));
    state.second_moment.push_back(Tensor<T>::zeros(p.value.shape()));
  }
  return state;
}

template <typename T>
void adam_step(std::span<Parameter<T>> params, AdamState<T>& state) {
  if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "optimizer state tracks " +
                                               std::to_string(state.first_moment.size()) +
                                               " tensors, model has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].value.has_grad()) {
      throw Error(ErrorCode::kMissingGrad, "parameter " + params[i].name + " has no gradient");
    }
    if (state.first_moment[i].shape() != params[i].value.shape() ||
        state.second_moment[i].shape() != params[i].value.shape()) {
      throw Error(ErrorCode::kShapeMismatch, "optimizer moments for " + params[i].name);
    }
  }

  const auto& h = state.hyper;
  const std::uint64_t t = state.step_count + 1;
  const T b1 = static_cast<T>(h.beta1);
  const T b2 = static_cast<T>(h.beta2);
  const T correction1 = static_cast<T>(1.0 - std::pow(h.beta1, static_cast<double>(t)));
  const T correction2 = static_cast<T>(1.0 - std::pow(h.beta2, static_cast<double>(t)));
  const T lr = static_cast<T>(h.learning_rate);
  const T eps = static_cast<T>(h.eps_hat);

  const auto update = [&](std::size_t i, std::size_t j, T& m_out, T& v_out) {
    const T g = params[i].value.grad()[j];
    m_out = b1 * state.first_moment[i].data()[j] + (T(1) - b1) * g;
    v_out = b2 * state.second_moment[i].data()[j] + (T(1) - b2) * g * g;
    const T m_hat = m_out / correction1;
    const T v_hat = v_out / correction2;
    return params[i].value.data()[j] - lr * m_hat / (std::sqrt(v_hat) + eps);
  };

  // First pass only validates, so a non-finite update leaves everything intact.
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = 0; j < params[i].value.numel(); ++j) {
      T m, v;
      if (!std::isfinite(update(i, j, m, v))) {
        throw Error(ErrorCode::kNonFinite, "Adam update of " + params[i].name + "[" +
                                               std::to_string(j) + "] is not finite");
      }
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto m = state.first_moment[i].mutable_data();
    auto v = state.second_moment[i].mutable_data();
    auto theta = params[i].value.mutable_data();
    for (std::size_t j = 0; j < theta.size(); ++j) theta[j] = update(i, j, m[j], v[j]);
    params[i].value.zero_grad();
  }
  state.step_count = t;
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(std::span<Parameter<float>>, AdamState<float>&);
template void adam_step<double>(std::span<Parameter<double>>, AdamState<double>&);

}  // namespace cnet
