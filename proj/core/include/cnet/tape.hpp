#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "cnet/tensor.hpp"

namespace cnet {

/// Records the ops of one forward pass so backward() can replay them in
/// reverse. A tape belongs to a single thread for the whole pass.
template <typename T>
class Tape {
 public:
  /// `grad_inputs[i]` is the accumulation buffer of the i-th input, or an
  /// empty span when that input does not need a gradient. Rules must add
  /// into the buffers, never overwrite them.
  using BackwardFn =
      std::function<void(std::span<const T> grad_output, std::span<const std::span<T>> grad_inputs)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  /// Records `output = op(inputs)`. Nothing is stored when no input needs a
  /// gradient; otherwise the output is marked as requiring one.
  void record(Tensor<T>& output, std::vector<Tensor<T>> inputs, BackwardFn backward);

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  void clear() { nodes_.clear(); }

  /// True when `tensor` is the output of a recorded op.
  bool produced(const Tensor<T>& tensor) const;

  /// See the free function backward().
  void backward(const Tensor<T>& loss) const;

 private:
  using ImplPtr = std::shared_ptr<typename Tensor<T>::Impl>;

  struct Node {
    std::vector<ImplPtr> inputs;
    ImplPtr output;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
};

/// Reverse-mode pass from a one-element `loss`. Leaf tensors that require
/// a gradient receive d(loss)/d(tensor) added onto their current gradient,
/// so calling this twice without zeroing doubles every gradient.
///
/// Throws kNotScalar when loss has more than one element and
/// kDetachedGraph when loss was not produced on `tape`.
template <typename T>
void backward(const Tensor<T>& loss, const Tape<T>& tape) {
  tape.backward(loss);
}

/// Forwarding helper for ops that take an optional tape.
template <typename T>
void record_if(Tape<T>* tape, Tensor<T>& output, std::vector<Tensor<T>> inputs,
               typename Tape<T>::BackwardFn backward) {
  if (tape != nullptr) tape->record(output, std::move(inputs), std::move(backward));
}

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace cnet
