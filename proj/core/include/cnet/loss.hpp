#pragma once

#include "cnet/tape.hpp"
#include "cnet/tensor.hpp"

namespace cnet {

struct BCELoss {
  double epsilon = 1e-7;
};

/// Binary cross-entropy summed over output nodes and averaged over the
/// batch. Predictions are clamped to [epsilon, 1 - epsilon] before the log.
/// The recorded gradient is (p - y) / (p (1 - p)) / batch evaluated at the
/// clamped p, passed straight through the clamp.
///
/// Throws kShapeMismatch for unequal or non-(batch, nodes) shapes and
/// kBadLabel for labels outside {0, 1}.
template <typename T>
Tensor<T> bce_loss(const Tensor<T>& predictions, const Tensor<T>& labels, Tape<T>* tape = nullptr,
                   const BCELoss& config = {});

}  // namespace cnet
