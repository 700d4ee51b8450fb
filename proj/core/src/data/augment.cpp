#include "cnet/data/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cnet/error.hpp"

namespace cnet::data {

AugmentSpec AugmentSpec::none() {
  return AugmentSpec{false, false, 0.0, 0.0, 0.0, 0.0, 0.0};
}

void AugmentSpec::validate() const {
  for (double factor : {shear, zoom, width_shift, height_shift, rotation_degrees}) {
    if (!(factor >= 0.0) || !std::isfinite(factor)) {
      throw Error(ErrorCode::kConfigInvalid, "augmentation factors must be non-negative");
    }
  }
  if (zoom >= 1.0) throw Error(ErrorCode::kConfigInvalid, "zoom range must stay below 1");
}

AffineParams sample_affine(const AugmentSpec& spec, std::size_t height, std::size_t width, RngStream& rng) {
  AffineParams p;
  if (spec.horizontal_flip) p.flip_horizontal = rng.uniform() < 0.5;
  if (spec.vertical_flip) p.flip_vertical = rng.uniform() < 0.5;
  if (spec.shear > 0.0) p.shear = rng.uniform(-spec.shear, spec.shear);
  if (spec.zoom > 0.0) p.zoom = rng.uniform(1.0 - spec.zoom, 1.0 + spec.zoom);
  if (spec.width_shift > 0.0) p.shift_x = rng.uniform(-spec.width_shift, spec.width_shift) * static_cast<double>(width);
  if (spec.height_shift > 0.0) p.shift_y = rng.uniform(-spec.height_shift, spec.height_shift) * static_cast<double>(height);
  if (spec.rotation_degrees > 0.0) {
    p.rotation = rng.uniform(-spec.rotation_degrees, spec.rotation_degrees) * std::numbers::pi / 180.0;
  }
  return p;
}

Tensor<float> apply_affine(const Tensor<float>& image, const AffineParams& params) {
  if (image.shape().rank() != 3) {
    throw Error(ErrorCode::kShapeMismatch, "augment expects (H, W, C), got " + image.shape().to_string());
  }
  const std::size_t height = image.dim(0), width = image.dim(1), channels = image.dim(2);
  auto src = image.data();

  std::vector<float> flipped(src.size());
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t sy = params.flip_vertical ? height - 1 - y : y;
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t sx = params.flip_horizontal ? width - 1 - x : x;
      std::copy_n(src.data() + (sy * width + sx) * channels, channels, flipped.data() + (y * width + x) * channels);
    }
  }
  const bool identity = params.shear == 0.0 && params.zoom == 1.0 && params.shift_x == 0.0 &&
                        params.shift_y == 0.0 && params.rotation == 0.0;
  if (identity) return Tensor<float>(image.shape(), std::move(flipped));

  const double cr = std::cos(params.rotation), sr = std::sin(params.rotation);
  const double shear_x = -std::sin(params.shear), shear_y = std::cos(params.shear);
  // Rotation * shear, then undo the zoom.
  const double m00 = cr / params.zoom;
  const double m01 = (cr * shear_x - sr * shear_y) / params.zoom;
  const double m10 = sr / params.zoom;
  const double m11 = (sr * shear_x + cr * shear_y) / params.zoom;
  const double cx = (static_cast<double>(width) - 1.0) / 2.0;
  const double cy = (static_cast<double>(height) - 1.0) / 2.0;
  const double max_x = static_cast<double>(width - 1), max_y = static_cast<double>(height - 1);

  std::vector<float> out(src.size());
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
      const double sx = std::clamp(m00 * dx + m01 * dy + cx - params.shift_x, 0.0, max_x);
      const double sy = std::clamp(m10 * dx + m11 * dy + cy - params.shift_y, 0.0, max_y);
      const auto x0 = static_cast<std::size_t>(sx), y0 = static_cast<std::size_t>(sy);
      const std::size_t x1 = std::min(x0 + 1, width - 1), y1 = std::min(y0 + 1, height - 1);
      const auto fx = static_cast<float>(sx - static_cast<double>(x0));
      const auto fy = static_cast<float>(sy - static_cast<double>(y0));
      for (std::size_t c = 0; c < channels; ++c) {
        const float p00 = flipped[(y0 * width + x0) * channels + c];
        const float p01 = flipped[(y0 * width + x1) * channels + c];
        const float p10 = flipped[(y1 * width + x0) * channels + c];
        const float p11 = flipped[(y1 * width + x1) * channels + c];
        const float top = p00 + (p01 - p00) * fx;
        const float bottom = p10 + (p11 - p10) * fx;
        out[(y * width + x) * channels + c] = top + (bottom - top) * fy;
      }
    }
  }
  return Tensor<float>(image.shape(), std::move(out));
}

Tensor<float> augment(const Tensor<float>& image, const AugmentSpec& spec, RngStream& rng) {
  return apply_affine(image, sample_affine(spec, image.dim(0), image.dim(1), rng));
}

}  // namespace cnet::data
