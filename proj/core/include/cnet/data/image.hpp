#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "cnet/tensor.hpp"

namespace cnet::data {

/// 8-bit interleaved RGB pixels, row-major.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // height * width * 3

  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * 3 + c];
  }
};

/// Decodes a PNG or JPEG (chosen by file signature) to RGB8. Gray, palette,
/// alpha and 16-bit PNGs are converted. Throws kUnreadableImage.
Image read_image(const std::filesystem::path& path);

/// Cheap check used while enumerating a dataset: PNG headers are parsed,
/// JPEGs are decoded.
bool is_decodable_image(const std::filesystem::path& path);

/// Lossless 8-bit RGB PNG. Throws kIoError.
void write_png(const std::filesystem::path& path, const Image& image);

/// Bilinear resize (half-pixel centers, edge clamped) to (height, width),
/// then division by 255. Output shape (height, width, 3), values in [0, 1].
Tensor<float> resize_to_tensor(const Image& image, std::size_t height, std::size_t width);

/// read_image + resize_to_tensor.
Tensor<float> load_and_resize(const std::filesystem::path& path, std::size_t height, std::size_t width);

}  // namespace cnet::data
