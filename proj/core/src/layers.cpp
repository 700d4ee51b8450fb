#include "cnet/layers.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>

#include "cnet/error.hpp"
#include "cnet/ops.hpp"

namespace cnet {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

void require_rank(const Shape& shape, std::size_t rank, const char* op) {
  if (shape.rank() != rank) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + " expects rank " + std::to_string(rank) + ", got " +
                    shape.to_string());
  }
}

struct ConvGeometry {
  std::size_t batch, height, width, in_channels;
  std::size_t out_height, out_width, out_channels;
  std::size_t kernel, stride, pad_top, pad_left;

  std::size_t patch() const { return kernel * kernel * in_channels; }
  std::size_t pixels() const { return out_height * out_width; }
  bool direct() const { return kernel == 1 && stride == 1 && pad_top == 0 && pad_left == 0; }
};

template <typename T>
ConvGeometry conv_geometry(const Shape& in, const Conv2D<T>& layer) {
  require_rank(in, 4, "conv2d");
  const Shape& k = layer.kernel.shape();
  require_rank(k, 4, "conv2d kernel");
  if (k[0] != k[1]) throw Error(ErrorCode::kShapeMismatch, "conv2d kernel must be square");
  if (in[3] != k[2]) {
    throw Error(ErrorCode::kChannelMismatch, "input has " + std::to_string(in[3]) +
                                                 " channels, kernel expects " + std::to_string(k[2]));
  }
  if (layer.bias.numel() != k[3]) {
    throw Error(ErrorCode::kShapeMismatch, "conv2d bias length differs from out_channels");
  }
  if (layer.stride == 0) throw Error(ErrorCode::kConfigInvalid, "conv2d stride must be positive");

  ConvGeometry g{};
  g.batch = in[0];
  g.height = in[1];
  g.width = in[2];
  g.in_channels = in[3];
  g.kernel = k[0];
  g.stride = layer.stride;
  g.out_channels = k[3];
  g.out_height = conv_output_extent(g.height, g.kernel, g.stride, layer.padding);
  g.out_width = conv_output_extent(g.width, g.kernel, g.stride, layer.padding);
  if (layer.padding == Padding::kSame) {
    const auto total = [&](std::size_t out, std::size_t extent) -> std::size_t {
      const std::size_t needed = (out - 1) * g.stride + g.kernel;
      return needed > extent ? needed - extent : 0;
    };
    g.pad_top = total(g.out_height, g.height) / 2;
    g.pad_left = total(g.out_width, g.width) / 2;
  }
  return g;
}

// Fills `cols` (pixels x patch) for image `b`. Out-of-bounds taps are zero.
template <typename T>
void im2col(const ConvGeometry& g, const T* image, T* cols) {
  const std::size_t patch = g.patch();
  for (std::size_t oy = 0; oy < g.out_height; ++oy) {
    for (std::size_t ox = 0; ox < g.out_width; ++ox) {
      T* row = cols + (oy * g.out_width + ox) * patch;
      for (std::size_t ky = 0; ky < g.kernel; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                  static_cast<std::ptrdiff_t>(g.pad_top);
        for (std::size_t kx = 0; kx < g.kernel; ++kx) {
          const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                    static_cast<std::ptrdiff_t>(g.pad_left);
          T* dst = row + (ky * g.kernel + kx) * g.in_channels;
          if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(g.height) ||
              ix >= static_cast<std::ptrdiff_t>(g.width)) {
            std::fill(dst, dst + g.in_channels, T(0));
          } else {
            const T* src = image + (static_cast<std::size_t>(iy) * g.width +
                                    static_cast<std::size_t>(ix)) * g.in_channels;
            std::copy(src, src + g.in_channels, dst);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const ConvGeometry& g, const T* cols, T* image) {
  const std::size_t patch = g.patch();
  for (std::size_t oy = 0; oy < g.out_height; ++oy) {
    for (std::size_t ox = 0; ox < g.out_width; ++ox) {
      const T* row = cols + (oy * g.out_width + ox) * patch;
      for (std::size_t ky = 0; ky < g.kernel; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                  static_cast<std::ptrdiff_t>(g.pad_top);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
        for (std::size_t kx = 0; kx < g.kernel; ++kx) {
          const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                    static_cast<std::ptrdiff_t>(g.pad_left);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
          const T* src = row + (ky * g.kernel + kx) * g.in_channels;
          T* dst = image + (static_cast<std::size_t>(iy) * g.width + static_cast<std::size_t>(ix)) *
                               g.in_channels;
          for (std::size_t c = 0; c < g.in_channels; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

}  // namespace

std::size_t conv_output_extent(std::size_t extent, std::size_t kernel, std::size_t stride,
                               Padding padding) {
  if (padding == Padding::kSame) return (extent + stride - 1) / stride;
  if (extent < kernel) {
    throw Error(ErrorCode::kNonPositiveOutput, "valid convolution of extent " +
                                                   std::to_string(extent) + " with kernel " +
                                                   std::to_string(kernel));
  }
  return (extent - kernel) / stride + 1;
}

std::size_t pool_output_extent(std::size_t extent) { return extent / 2; }

namespace detail {

template <typename T>
Tensor<T> conv2d_forward_raw(const Tensor<T>& input, const Conv2D<T>& layer) {
  const ConvGeometry g = conv_geometry(input.shape(), layer);
  const std::size_t patch = g.patch();
  const std::size_t pixels = g.pixels();
  std::vector<T> out(g.batch * pixels * g.out_channels);
  std::vector<T> cols(g.direct() ? 0 : pixels * patch);
  ConstMatrixMap<T> kernel(layer.kernel.data().data(), patch, g.out_channels);
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bias(layer.bias.data().data(),
                                                             g.out_channels);

  for (std::size_t b = 0; b < g.batch; ++b) {
    const T* image = input.data().data() + b * g.height * g.width * g.in_channels;
    const T* lhs = image;
    if (!g.direct()) {
      im2col(g, image, cols.data());
      lhs = cols.data();
    }
    MatrixMap<T> result(out.data() + b * pixels * g.out_channels, pixels, g.out_channels);
    result.noalias() = ConstMatrixMap<T>(lhs, pixels, patch) * kernel;
    result.rowwise() += bias;
  }
  return Tensor<T>(Shape{g.batch, g.out_height, g.out_width, g.out_channels}, std::move(out));
}

template <typename T>
void conv2d_backward(const Tensor<T>& input, const Conv2D<T>& layer,
                     std::span<const T> grad_output, std::span<T> grad_input,
                     std::span<T> grad_kernel, std::span<T> grad_bias) {
  const ConvGeometry g = conv_geometry(input.shape(), layer);
  const std::size_t patch = g.patch();
  const std::size_t pixels = g.pixels();
  ConstMatrixMap<T> kernel(layer.kernel.data().data(), patch, g.out_channels);
  std::vector<T> cols(g.direct() ? 0 : pixels * patch);
  std::vector<T> grad_cols(grad_input.empty() || g.direct() ? 0 : pixels * patch);

  for (std::size_t b = 0; b < g.batch; ++b) {
    ConstMatrixMap<T> grad(grad_output.data() + b * pixels * g.out_channels, pixels,
                           g.out_channels);
    const T* image = input.data().data() + b * g.height * g.width * g.in_channels;

    if (!grad_bias.empty()) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> gb(grad_bias.data(), g.out_channels);
      gb += grad.colwise().sum();
    }
    if (!grad_kernel.empty()) {
      const T* lhs = image;
      if (!g.direct()) {
        im2col(g, image, cols.data());
        lhs = cols.data();
      }
      MatrixMap<T> gk(grad_kernel.data(), patch, g.out_channels);
      gk.noalias() += ConstMatrixMap<T>(lhs, pixels, patch).transpose() * grad;
    }
    if (!grad_input.empty()) {
      T* gi = grad_input.data() + b * g.height * g.width * g.in_channels;
      if (g.direct()) {
        MatrixMap<T>(gi, pixels, patch).noalias() += grad * kernel.transpose();
      } else {
        MatrixMap<T> gc(grad_cols.data(), pixels, patch);
        gc.noalias() = grad * kernel.transpose();
        col2im_add(g, grad_cols.data(), gi);
      }
    }
  }
}

}  // namespace detail

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Conv2D<T>& layer, Tape<T>* tape) {
  Tensor<T> out = detail::conv2d_forward_raw(input, layer);
  record_if<T>(tape, out, {input, layer.kernel, layer.bias},
               [input, layer](std::span<const T> g, std::span<const std::span<T>> gin) {
                 detail::conv2d_backward(input, layer, g, gin[0], gin[1], gin[2]);
               });
  return out;
}

template <typename T>
Tensor<T> maxpool2x2(const Tensor<T>& input, Tape<T>* tape) {
  require_rank(input.shape(), 4, "maxpool2x2");
  const std::size_t batch = input.dim(0), height = input.dim(1), width = input.dim(2),
                    channels = input.dim(3);
  if (height < 2 || width < 2) {
    throw Error(ErrorCode::kTooSmall, "maxpool2x2 needs at least 2x2, got " + input.shape().to_string());
  }
  const std::size_t oh = pool_output_extent(height), ow = pool_output_extent(width);
  std::vector<T> out(batch * oh * ow * channels);
  std::vector<std::uint32_t> argmax(out.size());
  auto x = input.data();

  std::size_t o = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xx = 0; xx < ow; ++xx) {
        for (std::size_t c = 0; c < channels; ++c, ++o) {
          std::size_t best = ((b * height + 2 * y) * width + 2 * xx) * channels + c;
          for (std::size_t dy = 0; dy < 2; ++dy) {
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t idx = ((b * height + 2 * y + dy) * width + 2 * xx + dx) * channels + c;
              if (x[idx] > x[best]) best = idx;
            }
          }
          out[o] = x[best];
          argmax[o] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }
  Tensor<T> result(Shape{batch, oh, ow, channels}, std::move(out));
  record_if<T>(tape, result, {input},
               [argmax = std::move(argmax)](std::span<const T> g, std::span<const std::span<T>> gin) {
                 for (std::size_t i = 0; i < g.size(); ++i) gin[0][argmax[i]] += g[i];
               });
  return result;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input, Tape<T>* tape) {
  std::vector<T> out(input.numel());
  auto x = input.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
  Tensor<T> result(input.shape(), std::move(out));
  record_if<T>(tape, result, {input}, [input](std::span<const T> g, std::span<const std::span<T>> gin) {
    auto x = input.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > T(0)) gin[0][i] += g[i];
    }
  });
  return result;
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input, Tape<T>* tape) {
  std::vector<T> out(input.numel());
  auto x = input.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (x[i] >= T(0)) {
      out[i] = T(1) / (T(1) + std::exp(-x[i]));
    } else {
      const T e = std::exp(x[i]);
      out[i] = e / (T(1) + e);
    }
  }
  Tensor<T> result(input.shape(), std::move(out));
  record_if<T>(tape, result, {input}, [result](std::span<const T> g, std::span<const std::span<T>> gin) {
    auto y = result.data();
    for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i] * y[i] * (T(1) - y[i]);
  });
  return result;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b, Tape<T>* tape) {
  require_rank(a.shape(), 4, "concat_channels");
  require_rank(b.shape(), 4, "concat_channels");
  for (std::size_t axis = 0; axis < 3; ++axis) {
    if (a.dim(axis) != b.dim(axis)) {
      throw Error(ErrorCode::kSpatialMismatch,
                  "concat " + a.shape().to_string() + " with " + b.shape().to_string());
    }
  }
  const std::size_t ca = a.dim(3), cb = b.dim(3), cout = ca + cb;
  const std::size_t pixels = a.dim(0) * a.dim(1) * a.dim(2);
  std::vector<T> out(pixels * cout);
  auto xa = a.data();
  auto xb = b.data();
  for (std::size_t p = 0; p < pixels; ++p) {
    std::copy_n(xa.data() + p * ca, ca, out.data() + p * cout);
    std::copy_n(xb.data() + p * cb, cb, out.data() + p * cout + ca);
  }
  Tensor<T> result(Shape{a.dim(0), a.dim(1), a.dim(2), cout}, std::move(out));
  record_if<T>(tape, result, {a, b},
               [pixels, ca, cb](std::span<const T> g, std::span<const std::span<T>> gin) {
                 const std::size_t cout = ca + cb;
                 for (std::size_t p = 0; p < pixels; ++p) {
                   if (!gin[0].empty()) {
                     for (std::size_t c = 0; c < ca; ++c) gin[0][p * ca + c] += g[p * cout + c];
                   }
                   if (!gin[1].empty()) {
                     for (std::size_t c = 0; c < cb; ++c) gin[1][p * cb + c] += g[p * cout + ca + c];
                   }
                 }
               });
  return result;
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& input, std::size_t begin, std::size_t end, Tape<T>* tape) {
  require_rank(input.shape(), 4, "slice_channels");
  const std::size_t channels = input.dim(3);
  if (begin >= end || end > channels) {
    throw Error(ErrorCode::kShapeMismatch, "channel slice [" + std::to_string(begin) + ", " +
                                               std::to_string(end) + ") of " +
                                               input.shape().to_string());
  }
  const std::size_t width = end - begin;
  const std::size_t pixels = input.dim(0) * input.dim(1) * input.dim(2);
  std::vector<T> out(pixels * width);
  auto x = input.data();
  for (std::size_t p = 0; p < pixels; ++p) {
    std::copy_n(x.data() + p * channels + begin, width, out.data() + p * width);
  }
  Tensor<T> result(Shape{input.dim(0), input.dim(1), input.dim(2), width}, std::move(out));
  record_if<T>(tape, result, {input},
               [pixels, channels, begin, width](std::span<const T> g, std::span<const std::span<T>> gin) {
                 for (std::size_t p = 0; p < pixels; ++p) {
                   for (std::size_t c = 0; c < width; ++c) gin[0][p * channels + begin + c] += g[p * width + c];
                 }
               });
  return result;
}

template <typename T>
Tensor<T> dense(const Tensor<T>& input, const Dense<T>& layer, Tape<T>* tape) {
  require_rank(input.shape(), 2, "dense");
  const std::size_t batch = input.dim(0), in = layer.in_units(), out_units = layer.out_units();
  if (input.dim(1) != in) {
    throw Error(ErrorCode::kDimMismatch, "dense expects " + std::to_string(in) + " inputs, got " +
                                             std::to_string(input.dim(1)));
  }
  if (layer.bias.numel() != out_units) {
    throw Error(ErrorCode::kDimMismatch, "dense bias length differs from out_units");
  }
  std::vector<T> out(batch * out_units);
  MatrixMap<T> result(out.data(), batch, out_units);
  ConstMatrixMap<T> x(input.data().data(), batch, in);
  ConstMatrixMap<T> w(layer.weights.data().data(), in, out_units);
  result.noalias() = x * w;
  result.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(layer.bias.data().data(),
                                                                             out_units);
  Tensor<T> output(Shape{batch, out_units}, std::move(out));
  record_if<T>(tape, output, {input, layer.weights, layer.bias},
               [input, layer, batch, in, out_units](std::span<const T> g,
                                                    std::span<const std::span<T>> gin) {
                 ConstMatrixMap<T> grad(g.data(), batch, out_units);
                 if (!gin[0].empty()) {
                   ConstMatrixMap<T> w(layer.weights.data().data(), in, out_units);
                   MatrixMap<T>(gin[0].data(), batch, in).noalias() += grad * w.transpose();
                 }
                 if (!gin[1].empty()) {
                   ConstMatrixMap<T> x(input.data().data(), batch, in);
                   MatrixMap<T>(gin[1].data(), in, out_units).noalias() += x.transpose() * grad;
                 }
                 if (!gin[2].empty()) {
                   Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(gin[2].data(), out_units) +=
                       grad.colwise().sum();
                 }
               });
  return output;
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& input, const DropoutSpec& spec, RngStream& rng, Tape<T>* tape) {
  if (!(spec.rate >= 0.0 && spec.rate < 1.0)) {
    throw Error(ErrorCode::kBadRate, "dropout rate must lie in [0, 1), got " + std::to_string(spec.rate));
  }
  if (spec.mode == Mode::kEval || spec.rate == 0.0) return input;

  const auto threshold = static_cast<std::uint64_t>(std::llround(spec.rate * 4294967296.0));
  const T scale = static_cast<T>(1.0 / (1.0 - spec.rate));
  std::vector<T> mask(input.numel());
  for (T& m : mask) m = rng.next_u32() >= threshold ? scale : T(0);

  std::vector<T> out(input.numel());
  auto x = input.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * mask[i];
  Tensor<T> result(input.shape(), std::move(out));
  record_if<T>(tape, result, {input},
               [mask = std::move(mask)](std::span<const T> g, std::span<const std::span<T>> gin) {
                 for (std::size_t i = 0; i < g.size(); ++i) gin[0][i] += g[i] * mask[i];
               });
  return result;
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& input, Tape<T>* tape) {
  const std::size_t batch = input.dim(0);
  return reshape(input, Shape{batch, input.numel() / batch}, tape);
}

#define CNET_INSTANTIATE_LAYERS(T)                                                              \
  template Tensor<T> conv2d<T>(const Tensor<T>&, const Conv2D<T>&, Tape<T>*);                   \
  template Tensor<T> maxpool2x2<T>(const Tensor<T>&, Tape<T>*);                                 \
  template Tensor<T> relu<T>(const Tensor<T>&, Tape<T>*);                                       \
  template Tensor<T> sigmoid<T>(const Tensor<T>&, Tape<T>*);                                    \
  template Tensor<T> concat_channels<T>(const Tensor<T>&, const Tensor<T>&, Tape<T>*);          \
  template Tensor<T> slice_channels<T>(const Tensor<T>&, std::size_t, std::size_t, Tape<T>*);   \
  template Tensor<T> dense<T>(const Tensor<T>&, const Dense<T>&, Tape<T>*);                     \
  template Tensor<T> dropout<T>(const Tensor<T>&, const DropoutSpec&, RngStream&, Tape<T>*);    \
  template Tensor<T> flatten<T>(const Tensor<T>&, Tape<T>*);                                    \
  template Tensor<T> detail::conv2d_forward_raw<T>(const Tensor<T>&, const Conv2D<T>&);         \
  template void detail::conv2d_backward<T>(const Tensor<T>&, const Conv2D<T>&,                  \
                                           std::span<const T>, std::span<T>, std::span<T>,      \
                                           std::span<T>);

CNET_INSTANTIATE_LAYERS(float)
CNET_INSTANTIATE_LAYERS(double)

}  // namespace cnet
