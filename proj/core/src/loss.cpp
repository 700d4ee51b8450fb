#include "cnet/loss.hpp"

#include <algorithm>
#include <cmath>

#include "cnet/error.hpp"

namespace cnet {

template <typename T>
Tensor<T> bce_loss(const Tensor<T>& predictions, const Tensor<T>& labels, Tape<T>* tape,
                   const BCELoss& config) {
  if (predictions.shape() != labels.shape() || predictions.shape().rank() != 2) {
    throw Error(ErrorCode::kShapeMismatch, "bce_loss predictions " + predictions.shape().to_string() +
                                               " vs labels " + labels.shape().to_string());
  }
  auto y = labels.data();
  for (T label : y) {
    if (label != T(0) && label != T(1)) {
      throw Error(ErrorCode::kBadLabel, "label " + std::to_string(static_cast<double>(label)));
    }
  }
  const T lo = static_cast<T>(config.epsilon);
  const T hi = static_cast<T>(1.0 - config.epsilon);
  const std::size_t batch = predictions.dim(0);
  auto p = predictions.data();

  // Accumulate in double so float batches do not lose the small terms.
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], lo, hi);
    total -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
  }
  Tensor<T> loss = Tensor<T>::scalar(static_cast<T>(total / static_cast<double>(batch)));
  record_if<T>(tape, loss, {predictions},
               [predictions, labels, lo, hi, batch](std::span<const T> g,
                                                    std::span<const std::span<T>> gin) {
                 auto p = predictions.data();
                 auto y = labels.data();
                 const T scale = g[0] / static_cast<T>(batch);
                 for (std::size_t i = 0; i < p.size(); ++i) {
                   const T q = std::clamp(p[i], lo, hi);
                   gin[0][i] += scale * (q - y[i]) / (q * (T(1) - q));
                 }
               });
  return loss;
}

template Tensor<float> bce_loss<float>(const Tensor<float>&, const Tensor<float>&, Tape<float>*,
                                       const BCELoss&);
template Tensor<double> bce_loss<double>(const Tensor<double>&, const Tensor<double>&, Tape<double>*,
                                         const BCELoss&);

}  // namespace cnet
