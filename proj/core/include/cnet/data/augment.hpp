#pragma once

#include "cnet/rng.hpp"
#include "cnet/tensor.hpp"

namespace cnet::data {

/// Random geometric augmentation. Factors of zero (and disabled flips)
/// leave the image untouched.
struct AugmentSpec {
  bool horizontal_flip = true;
  bool vertical_flip = true;
  double shear = 0.2;             // radians, sampled in [-shear, shear]
  double zoom = 0.2;              // scale sampled in [1 - zoom, 1 + zoom]
  double width_shift = 0.2;       // fraction of width, sampled in [-s, s]
  double height_shift = 0.2;      // fraction of height
  double rotation_degrees = 40.0; // sampled in [-r, r]

  static AugmentSpec none();
  void validate() const;
};

/// Concrete draw of one augmentation.
struct AffineParams {
  bool flip_horizontal = false;
  bool flip_vertical = false;
  double shear = 0.0;
  double zoom = 1.0;
  double shift_x = 0.0;  // pixels
  double shift_y = 0.0;
  double rotation = 0.0;  // radians
};

/// Draws the parameters of every enabled transform, in the order flips,
/// shear, zoom, width shift, height shift, rotation.
AffineParams sample_affine(const AugmentSpec& spec, std::size_t height, std::size_t width, RngStream& rng);

/// Flips exactly, then maps each output pixel p to the source point
/// R(rotation) Sh(shear) (p - c) / zoom + c - shift and samples it
/// bilinearly with nearest-edge fill. Shape and value range are preserved.
Tensor<float> apply_affine(const Tensor<float>& image, const AffineParams& params);

/// sample_affine + apply_affine on an (H, W, 3) image in [0, 1].
Tensor<float> augment(const Tensor<float>& image, const AugmentSpec& spec, RngStream& rng);

}  // namespace cnet::data
