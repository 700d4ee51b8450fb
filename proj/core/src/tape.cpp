#include "cnet/tape.hpp"

#include <unordered_map>

#include "cnet/error.hpp"

namespace cnet {

template <typename T>
void Tape<T>::record(Tensor<T>& output, std::vector<Tensor<T>> inputs, BackwardFn backward) {
  bool needs_grad = false;
  for (const auto& in : inputs) needs_grad = needs_grad || in.requires_grad();
  if (!needs_grad) return;

  Node node;
  node.inputs.reserve(inputs.size());
  for (auto& in : inputs) node.inputs.push_back(in.impl_);
  node.output = output.impl_;
  node.backward = std::move(backward);
  output.impl_->requires_grad = true;
  output.impl_->has_producer = true;
  nodes_.push_back(std::move(node));
}

template <typename T>
bool Tape<T>::produced(const Tensor<T>& tensor) const {
  for (const auto& node : nodes_) {
    if (node.output == tensor.impl_) return true;
  }
  return false;
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) const {
  if (loss.numel() != 1) {
    throw Error(ErrorCode::kNotScalar, "loss has shape " + loss.shape().to_string());
  }
  if (!produced(loss)) {
    throw Error(ErrorCode::kDetachedGraph, "loss was not recorded on this tape");
  }

  using Impl = typename Tensor<T>::Impl;
  std::unordered_map<const Impl*, std::vector<T>> grads;
  grads[loss.impl_.get()] = {T(1)};

  std::vector<std::span<T>> input_grads;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    const Node& node = *it;
    auto found = grads.find(node.output.get());
    if (found == grads.end()) continue;
    std::vector<T> grad_output = std::move(found->second);
    grads.erase(found);

    input_grads.clear();
    for (const auto& in : node.inputs) {
      if (!in->requires_grad) {
        input_grads.emplace_back();
        continue;
      }
      auto& buffer = grads[in.get()];
      if (buffer.empty()) buffer.assign(in->data.size(), T(0));
      input_grads.emplace_back(buffer);
    }
    node.backward(grad_output, input_grads);
  }

  // Whatever remains belongs to leaves: outputs were consumed above.
  for (auto& [impl, grad] : grads) {
    auto* leaf = const_cast<Impl*>(impl);
    if (leaf->has_producer || !leaf->requires_grad) continue;
    if (leaf->grad.empty()) leaf->grad.assign(leaf->data.size(), T(0));
    for (std::size_t i = 0; i < grad.size(); ++i) leaf->grad[i] += grad[i];
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace cnet
