#pragma once

#include <functional>

#include "cnet/tape.hpp"
#include "cnet/tensor.hpp"

namespace cnet {

/// A scalar-valued function of one tensor, built from recorded ops.
using ScalarOp = std::function<Tensor<double>(const Tensor<double>& input, Tape<double>* tape)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
};

/// Compares the tape gradient of `op` at `input` with central differences
/// of step `step`. Per element the error is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-12).
/// Throws kNonFinite if a forward evaluation is NaN or Inf.
GradCheckResult grad_check_detailed(const ScalarOp& op, const Tensor<double>& input, double step);

inline double grad_check(const ScalarOp& op, const Tensor<double>& input, double step) {
  return grad_check_detailed(op, input, step).max_relative_error;
}

}  // namespace cnet
