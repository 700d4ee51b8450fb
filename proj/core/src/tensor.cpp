#include "cnet/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "cnet/error.hpp"

namespace cnet {

Shape::Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  for (std::size_t d : dims_) {
    if (d == 0) throw Error(ErrorCode::kShapeMismatch, "zero dimension in shape " + to_string());
  }
}

std::size_t Shape::numel() const {
  std::size_t n = 1;
  for (std::size_t d : dims_) n *= d;
  return n;
}

std::string Shape::to_string() const {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) out << ',';
    out << dims_[i];
  }
  out << ')';
  return out.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data, bool requires_grad) {
  if (shape.rank() == 0 || shape.numel() != data.size()) {
    throw Error(ErrorCode::kShapeMismatch, "shape " + shape.to_string() + " holds " +
                                               std::to_string(shape.rank() ? shape.numel() : 0) +
                                               " elements, got " + std::to_string(data.size()));
  }
  impl_ = std::make_shared<Impl>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
  impl_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return filled(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::filled(Shape shape, T value, bool requires_grad) {
  const std::size_t n = shape.numel();
  return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor(Shape{1}, {value}, requires_grad);
}

template <typename T>
void Tensor<T>::zero_grad() {
  impl_->grad.assign(impl_->data.size(), T(0));
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  return Tensor(std::move(shape), impl_->data, false);
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  Tensor copy(impl_->shape, impl_->data, impl_->requires_grad);
  copy.impl_->grad = impl_->grad;
  return copy;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace cnet
