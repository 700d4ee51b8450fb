#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cnet {

/// Dimension list of a tensor. Every dimension is >= 1.
class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::vector<std::size_t> dims);

  std::size_t rank() const { return dims_.size(); }
  std::size_t operator[](std::size_t axis) const { return dims_[axis]; }
  std::size_t numel() const;
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::string to_string() const;

  bool operator==(const Shape&) const = default;

 private:
  std::vector<std::size_t> dims_;
};

template <typename T>
class Tape;

/// Dense row-major tensor with an optional gradient buffer.
///
/// A Tensor is a cheap handle: copies share the same storage, which is how
/// the tape refers back to the tensors it recorded. Shape and values are
/// fixed once an op has produced the tensor; only parameters are updated in
/// place (by the optimizer or a checkpoint load), and only between passes.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  /// Empty handle; most accessors are invalid on it.
  Tensor() = default;

  /// Throws kShapeMismatch when data.size() != shape.numel().
  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(impl_); }
  const Shape& shape() const { return impl_->shape; }
  std::size_t numel() const { return impl_->data.size(); }
  std::size_t dim(std::size_t axis) const { return impl_->shape[axis]; }

  std::span<const T> data() const { return impl_->data; }
  std::span<T> mutable_data() { return impl_->data; }
  T item(std::size_t index = 0) const { return impl_->data.at(index); }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool value) { impl_->requires_grad = value; }

  /// True when a gradient buffer has been allocated by backward().
  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const T> grad() const { return impl_->grad; }
  std::span<T> mutable_grad() { return impl_->grad; }
  /// Sets the gradient buffer to zero, allocating it if absent.
  void zero_grad();
  void clear_grad() { impl_->grad.clear(); }

  /// True when produced by an op recorded on a tape (not a leaf).
  bool has_producer() const { return impl_->has_producer; }

  /// New tensor with the same values and a different shape (deep copy,
  /// not recorded on any tape).
  Tensor reshaped(Shape shape) const;
  /// Deep copy of values (and gradient, if any) into fresh storage.
  Tensor clone() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Impl {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
    bool has_producer = false;
  };

  friend class Tape<T>;

  std::shared_ptr<Impl> impl_;
};

/// Equivalent to constructing a Tensor; kept as a free function for call
/// sites that read better as a factory.
template <typename T>
Tensor<T> tensor_new(Shape shape, std::vector<T> data, bool requires_grad = false) {
  return Tensor<T>(std::move(shape), std::move(data), requires_grad);
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace cnet
