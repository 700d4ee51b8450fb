#include "cnet/data/image.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstdlib>
#include <fstream>

#include "cnet/error.hpp"

namespace cnet::data {
namespace {

enum class Format { kUnknown, kPng, kJpeg };

Format sniff(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<unsigned char, 8> head{};
  if (!in.read(reinterpret_cast<char*>(head.data()), head.size())) return Format::kUnknown;
  static constexpr std::array<unsigned char, 8> kPngSig = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (head == kPngSig) return Format::kPng;
  if (head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF) return Format::kJpeg;
  return Format::kUnknown;
}

[[noreturn]] void unreadable(const std::filesystem::path& path, const std::string& why) {
  throw Error(ErrorCode::kUnreadableImage, path.string() + ": " + why);
}

Image read_png(const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) unreadable(path, png.message);
  png.format = PNG_FORMAT_RGB;
  Image image;
  image.width = png.width;
  image.height = png.height;
  image.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr)) {
    std::string why = png.message;
    png_image_free(&png);
    unreadable(path, why);
  }
  return image;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
  auto* manager = reinterpret_cast<JpegErrorManager*>(info->err);
  (*info->err->format_message)(info, manager->message);
  std::longjmp(manager->jump, 1);
}

// Plain C-style decode so that longjmp never skips a C++ destructor. Returns
// false and fills `message` on failure.
bool decode_jpeg(std::FILE* file, std::uint8_t** out, std::size_t* width, std::size_t* height,
                 char* message) {
  jpeg_decompress_struct info;
  JpegErrorManager errors;
  info.err = jpeg_std_error(&errors.base);
  errors.base.error_exit = jpeg_error_exit;
  *out = nullptr;
  if (setjmp(errors.jump)) {
    std::copy(errors.message, errors.message + JMSG_LENGTH_MAX, message);
    jpeg_destroy_decompress(&info);
    std::free(*out);
    *out = nullptr;
    return false;
  }
  jpeg_create_decompress(&info);
  jpeg_stdio_src(&info, file);
  jpeg_read_header(&info, TRUE);
  info.out_color_space = JCS_RGB;
  jpeg_start_decompress(&info);
  *width = info.output_width;
  *height = info.output_height;
  const std::size_t stride = static_cast<std::size_t>(info.output_width) * 3;
  *out = static_cast<std::uint8_t*>(std::malloc(stride * info.output_height));
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = *out + static_cast<std::size_t>(info.output_scanline) * stride;
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  return true;
}

Image read_jpeg(const std::filesystem::path& path) {
  std::FILE* file = std::fopen(path.c_str(), "rb");
  if (file == nullptr) unreadable(path, "cannot open");
  std::uint8_t* raw = nullptr;
  Image image;
  char message[JMSG_LENGTH_MAX] = {};
  const bool ok = decode_jpeg(file, &raw, &image.width, &image.height, message);
  std::fclose(file);
  if (!ok) unreadable(path, message);
  image.pixels.assign(raw, raw + image.width * image.height * 3);
  std::free(raw);
  return image;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  Image image;
  switch (sniff(path)) {
    case Format::kPng: image = read_png(path); break;
    case Format::kJpeg: image = read_jpeg(path); break;
    case Format::kUnknown: unreadable(path, "not a PNG or JPEG file");
  }
  if (image.width == 0 || image.height == 0) unreadable(path, "empty image");
  return image;
}

bool is_decodable_image(const std::filesystem::path& path) {
  switch (sniff(path)) {
    case Format::kPng: {
      png_image png{};
      png.version = PNG_IMAGE_VERSION;
      if (!png_image_begin_read_from_file(&png, path.c_str())) return false;
      const bool ok = png.width > 0 && png.height > 0;
      png_image_free(&png);
      return ok;
    }
    case Format::kJpeg:
      try {
        read_jpeg(path);
        return true;
      } catch (const Error&) {
        return false;
      }
    case Format::kUnknown: break;
  }
  return false;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIoError, path.string() + ": " + png.message);
  }
}

Tensor<float> resize_to_tensor(const Image& image, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw Error(ErrorCode::kShapeMismatch, "resize target must be positive");
  const double scale_y = static_cast<double>(image.height) / static_cast<double>(height);
  const double scale_x = static_cast<double>(image.width) / static_cast<double>(width);

  struct Tap {
    std::size_t lo, hi;
    float frac;
  };
  const auto taps = [](std::size_t out, double scale, std::size_t in) {
    std::vector<Tap> result(out);
    for (std::size_t i = 0; i < out; ++i) {
      double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const auto lo = static_cast<std::size_t>(src);
      result[i] = {lo, std::min(lo + 1, in - 1), static_cast<float>(src - static_cast<double>(lo))};
    }
    return result;
  };
  const auto rows = taps(height, scale_y, image.height);
  const auto cols = taps(width, scale_x, image.width);

  std::vector<float> out(height * width * 3);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const float p00 = image.at(rows[y].lo, cols[x].lo, c);
        const float p01 = image.at(rows[y].lo, cols[x].hi, c);
        const float p10 = image.at(rows[y].hi, cols[x].lo, c);
        const float p11 = image.at(rows[y].hi, cols[x].hi, c);
        const float top = p00 + (p01 - p00) * cols[x].frac;
        const float bottom = p10 + (p11 - p10) * cols[x].frac;
        const float value = (top + (bottom - top) * rows[y].frac) / 255.0f;
        out[(y * width + x) * 3 + c] = std::clamp(value, 0.0f, 1.0f);
      }
    }
  }
  return Tensor<float>(Shape{height, width, 3}, std::move(out));
}

Tensor<float> load_and_resize(const std::filesystem::path& path, std::size_t height, std::size_t width) {
  return resize_to_tensor(read_image(path), height, width);
}

}  // namespace cnet::data
