#pragma once

#include <cstddef>
#include <span>

#include "cnet/rng.hpp"
#include "cnet/tape.hpp"
#include "cnet/tensor.hpp"

namespace cnet {

enum class Padding { kSame, kValid };
enum class Mode { kTrain, kEval };

/// Convolution parameters. Kernel layout is (kh, kw, in_channels,
/// out_channels); inputs and outputs are (batch, height, width, channels).
template <typename T>
struct Conv2D {
  Tensor<T> kernel;
  Tensor<T> bias;
  std::size_t stride = 1;
  Padding padding = Padding::kSame;

  std::size_t kernel_size() const { return kernel.dim(0); }
  std::size_t in_channels() const { return kernel.dim(2); }
  std::size_t out_channels() const { return kernel.dim(3); }
};

/// Fully connected parameters: weights (in_units, out_units), bias (out_units).
template <typename T>
struct Dense {
  Tensor<T> weights;
  Tensor<T> bias;

  std::size_t in_units() const { return weights.dim(0); }
  std::size_t out_units() const { return weights.dim(1); }
};

struct DropoutSpec {
  double rate = 0.0;
  Mode mode = Mode::kTrain;
};

// Closed-form output extents.

/// ceil(extent / stride) for same padding, floor((extent - k) / stride) + 1
/// for valid padding. Throws kNonPositiveOutput when the result is < 1.
std::size_t conv_output_extent(std::size_t extent, std::size_t kernel, std::size_t stride,
                               Padding padding);
std::size_t pool_output_extent(std::size_t extent);

/// Cross-correlation (no kernel flip) plus per-channel bias.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Conv2D<T>& layer, Tape<T>* tape = nullptr);

/// 2x2 window, stride 2. Trailing odd row/column is dropped; the gradient
/// goes to the first maximum in row-major window order.
template <typename T>
Tensor<T> maxpool2x2(const Tensor<T>& input, Tape<T>* tape = nullptr);

template <typename T>
Tensor<T> relu(const Tensor<T>& input, Tape<T>* tape = nullptr);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input, Tape<T>* tape = nullptr);

/// Joins two (b, m, n, c) maps along the channel axis: channels of `a`
/// first, then `b`.
template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b, Tape<T>* tape = nullptr);

/// Channels [begin, end) of a (b, m, n, c) map.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& input, std::size_t begin, std::size_t end,
                         Tape<T>* tape = nullptr);

template <typename T>
Tensor<T> dense(const Tensor<T>& input, const Dense<T>& layer, Tape<T>* tape = nullptr);

/// Inverted dropout. In train mode each element is kept with probability
/// 1 - rate and scaled by 1 / (1 - rate); the mask consumes one 32-bit draw
/// per element from `rng`. Eval mode and rate 0 return the input values.
template <typename T>
Tensor<T> dropout(const Tensor<T>& input, const DropoutSpec& spec, RngStream& rng,
                  Tape<T>* tape = nullptr);

/// (b, h, w, c) -> (b, h*w*c), row-major.
template <typename T>
Tensor<T> flatten(const Tensor<T>& input, Tape<T>* tape = nullptr);

namespace detail {

// Raw kernels, exposed so alternative ops (and the mutation harness) can be
// assembled from the same arithmetic.

template <typename T>
void conv2d_backward(const Tensor<T>& input, const Conv2D<T>& layer,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_kernel, std::span<T> grad_bias);

template <typename T>
Tensor<T> conv2d_forward_raw(const Tensor<T>& input, const Conv2D<T>& layer);

}  // namespace detail

}  // namespace cnet
