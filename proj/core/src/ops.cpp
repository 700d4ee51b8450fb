#include "cnet/ops.hpp"

#include "cnet/error.hpp"

namespace cnet {
namespace {

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": " + a.shape().to_string() + " vs " + b.shape().to_string());
  }
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b, Tape<T>* tape) {
  require_same_shape(a, b, "add");
  std::vector<T> out(a.numel());
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  Tensor<T> result(a.shape(), std::move(out));
  record_if<T>(tape, result, {a, b}, [](std::span<const T> g, std::span<const std::span<T>> gin) {
    for (const auto& buffer : gin) {
      for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] += g[i];
    }
  });
  return result;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b, Tape<T>* tape) {
  require_same_shape(a, b, "mul");
  std::vector<T> out(a.numel());
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  Tensor<T> result(a.shape(), std::move(out));
  record_if<T>(tape, result, {a, b}, [a, b](std::span<const T> g, std::span<const std::span<T>> gin) {
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < gin[0].size(); ++i) gin[0][i] += g[i] * y[i];
    for (std::size_t i = 0; i < gin[1].size(); ++i) gin[1][i] += g[i] * x[i];
  });
  return result;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x, Tape<T>* tape) {
  T total = T(0);
  for (T v : x.data()) total += v;
  Tensor<T> result = Tensor<T>::scalar(total);
  record_if<T>(tape, result, {x}, [](std::span<const T> g, std::span<const std::span<T>> gin) {
    for (T& v : gin[0]) v += g[0];
  });
  return result;
}

template <typename T>
Tensor<T> weighted_sum(const Tensor<T>& x, const Tensor<T>& weights, Tape<T>* tape) {
  require_same_shape(x, weights, "weighted_sum");
  T total = T(0);
  auto xs = x.data();
  auto ws = weights.data();
  for (std::size_t i = 0; i < xs.size(); ++i) total += xs[i] * ws[i];
  Tensor<T> result = Tensor<T>::scalar(total);
  record_if<T>(tape, result, {x}, [weights](std::span<const T> g, std::span<const std::span<T>> gin) {
    auto ws = weights.data();
    for (std::size_t i = 0; i < gin[0].size(); ++i) gin[0][i] += g[0] * ws[i];
  });
  return result;
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape, Tape<T>* tape) {
  if (shape.numel() != x.numel()) {
    throw Error(ErrorCode::kShapeMismatch,
                "reshape " + x.shape().to_string() + " -> " + shape.to_string());
  }
  Tensor<T> result = x.reshaped(std::move(shape));
  record_if<T>(tape, result, {x}, [](std::span<const T> g, std::span<const std::span<T>> gin) {
    for (std::size_t i = 0; i < gin[0].size(); ++i) gin[0][i] += g[i];
  });
  return result;
}

#define CNET_INSTANTIATE_OPS(T)                                               \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&, Tape<T>*);    \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&, Tape<T>*);    \
  template Tensor<T> sum<T>(const Tensor<T>&, Tape<T>*);                      \
  template Tensor<T> weighted_sum<T>(const Tensor<T>&, const Tensor<T>&, Tape<T>*); \
  template Tensor<T> reshape<T>(const Tensor<T>&, Shape, Tape<T>*);

CNET_INSTANTIATE_OPS(float)
CNET_INSTANTIATE_OPS(double)

}  // namespace cnet
