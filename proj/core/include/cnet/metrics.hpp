#pragma once

#include <cstdint>
#include <optional>

#include "cnet/tensor.hpp"

namespace cnet {

/// Binary confusion counts. Class index 1 is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Fractions in [0, 1] (MCC in [-1, 1]); empty where the denominator is 0.
struct MetricReport {
  std::optional<double> accuracy;
  std::optional<double> precision_ppv;
  std::optional<double> npv;
  std::optional<double> recall_sensitivity;
  std::optional<double> specificity;
  std::optional<double> f1;
  std::optional<double> mcc;
  ConfusionMatrix confusion;
};

/// Predicted class is argmax over the two nodes, ties going to class 0.
int predicted_class(float node0, float node1);

/// Adds one count per row of (b, 2) predictions against (b, 2) one-hot
/// labels. Throws kShapeMismatch.
template <typename T>
ConfusionMatrix accumulate(const Tensor<T>& predictions, const Tensor<T>& labels, ConfusionMatrix cm = {});

/// Accuracy, precision (PPV), NPV, recall (sensitivity), specificity, F1
/// and Matthews correlation. Throws kEmptyMatrix for an all-zero matrix.
MetricReport compute_metrics(const ConfusionMatrix& cm);

}  // namespace cnet
