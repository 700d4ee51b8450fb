#include "cnet/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "cnet/error.hpp"

namespace cnet {
namespace {

double evaluate(const ScalarOp& op, const Tensor<double>& input) {
  const double value = op(input, nullptr).item();
  if (!std::isfinite(value)) throw Error(ErrorCode::kNonFinite, "forward evaluation is not finite");
  return value;
}

}  // namespace

GradCheckResult grad_check_detailed(const ScalarOp& op, const Tensor<double>& input, double step) {
  Tensor<double> x(input.shape(), std::vector<double>(input.data().begin(), input.data().end()),
                   true);
  Tape<double> tape;
  Tensor<double> loss = op(x, &tape);
  if (!std::isfinite(loss.item())) throw Error(ErrorCode::kNonFinite, "forward evaluation is not finite");
  backward(loss, tape);

  std::vector<double> analytic(x.numel(), 0.0);
  if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());

  GradCheckResult result;
  Tensor<double> probe(input.shape(), std::vector<double>(input.data().begin(), input.data().end()));
  auto values = probe.mutable_data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    const double plus = evaluate(op, probe);
    values[i] = saved - step;
    const double minus = evaluate(op, probe);
    values[i] = saved;

    const double numeric = (plus - minus) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
    const double err = std::abs(analytic[i] - numeric) / denom;
    if (err > result.max_relative_error || i == 0) {
      result.max_relative_error = std::max(result.max_relative_error, err);
      result.worst_index = i;
      result.analytic_at_worst = analytic[i];
      result.numeric_at_worst = numeric;
    }
  }
  return result;
}

}  // namespace cnet
