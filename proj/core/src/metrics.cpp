#include "cnet/metrics.hpp"

#include <cmath>

#include "cnet/error.hpp"

namespace cnet {
namespace {

std::optional<double> ratio(double numerator, double denominator) {
  if (denominator == 0.0) return std::nullopt;
  return numerator / denominator;
}

}  // namespace

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  tp += other.tp;
  tn += other.tn;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

int predicted_class(float node0, float node1) { return node1 > node0 ? 1 : 0; }

template <typename T>
ConfusionMatrix accumulate(const Tensor<T>& predictions, const Tensor<T>& labels, ConfusionMatrix cm) {
  if (predictions.shape() != labels.shape() || predictions.shape().rank() != 2 || predictions.dim(1) != 2) {
    throw Error(ErrorCode::kShapeMismatch, "accumulate expects matching (b, 2) tensors, got " +
                                               predictions.shape().to_string() + " and " +
                                               labels.shape().to_string());
  }
  auto p = predictions.data();
  auto y = labels.data();
  for (std::size_t row = 0; row < predictions.dim(0); ++row) {
    const int predicted = predicted_class(static_cast<float>(p[2 * row]), static_cast<float>(p[2 * row + 1]));
    const int actual = y[2 * row + 1] > y[2 * row] ? 1 : 0;
    if (actual == 1) {
      (predicted == 1 ? cm.tp : cm.fn) += 1;
    } else {
      (predicted == 1 ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

template ConfusionMatrix accumulate<float>(const Tensor<float>&, const Tensor<float>&, ConfusionMatrix);
template ConfusionMatrix accumulate<double>(const Tensor<double>&, const Tensor<double>&, ConfusionMatrix);

MetricReport compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorCode::kEmptyMatrix, "no samples were evaluated");
  const auto tp = static_cast<double>(cm.tp);
  const auto tn = static_cast<double>(cm.tn);
  const auto fp = static_cast<double>(cm.fp);
  const auto fn = static_cast<double>(cm.fn);

  MetricReport r;
  r.confusion = cm;
  r.accuracy = ratio(tp + tn, tp + tn + fn + fp);
  r.precision_ppv = ratio(tp, tp + fp);
  r.npv = ratio(tn, tn + fn);
  r.recall_sensitivity = ratio(tp, tp + fn);
  r.specificity = ratio(tn, tn + fp);
  if (r.precision_ppv && r.recall_sensitivity) {
    r.f1 = ratio(2.0 * *r.precision_ppv * *r.recall_sensitivity, *r.precision_ppv + *r.recall_sensitivity);
  }
  const double product = (tp + fn) * (tp + fp) * (fp + tn) * (tn + fn);
  if (product > 0.0) r.mcc = (tp * tn - fp * fn) / std::sqrt(product);
  return r;
}

}  // namespace cnet
