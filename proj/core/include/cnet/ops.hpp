#pragma once

#include "cnet/tape.hpp"
#include "cnet/tensor.hpp"

namespace cnet {

// Elementwise and reduction primitives. A null tape means the op is not
// recorded (inference, or plain arithmetic in tests).

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b, Tape<T>* tape = nullptr);

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b, Tape<T>* tape = nullptr);

/// Sum of all elements, shape [1].
template <typename T>
Tensor<T> sum(const Tensor<T>& x, Tape<T>* tape = nullptr);

/// sum_i weights[i] * x[i], shape [1]. `weights` is treated as a constant.
template <typename T>
Tensor<T> weighted_sum(const Tensor<T>& x, const Tensor<T>& weights, Tape<T>* tape = nullptr);

/// Differentiable reshape (copies values into a tensor of a new shape).
template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape, Tape<T>* tape = nullptr);

}  // namespace cnet
