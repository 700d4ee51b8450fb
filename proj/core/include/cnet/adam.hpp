#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cnet/tensor.hpp"

namespace cnet {

/// A trainable tensor together with its registry name.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
};

struct AdamHyperparameters {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
};

template <typename T>
struct AdamState {
  AdamHyperparameters hyper;
  std::uint64_t step_count = 0;
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;

  /// Zero moments shaped like `params`.
  static AdamState for_parameters(std::span<const Parameter<T>> params,
                                  const AdamHyperparameters& hyper = {});
};

/// One bias-corrected Adam update of every parameter, after which all
/// gradients are zeroed.
///
/// Throws kMissingGrad when a parameter has no gradient buffer,
/// kShapeMismatch when the moments do not match the parameters, and
/// kNonFinite (leaving parameters untouched) when an update is NaN or Inf.
template <typename T>
void adam_step(std::span<Parameter<T>> params, AdamState<T>& state);

}  // namespace cnet
