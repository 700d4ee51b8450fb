#pragma once

#include <filesystem>
#include <string>

#include "cnet/data/image.hpp"
#include "cnet/rng.hpp"
#include "cnet/tensor.hpp"

namespace cnet::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

data::Image solid_image(std::size_t width, std::size_t height, std::uint8_t r, std::uint8_t g, std::uint8_t b);
data::Image noise_image(std::size_t width, std::size_t height, std::uint64_t seed);

template <typename T>
Tensor<T> random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  RngStream rng(seed, 0x7e57);
  std::vector<T> values(shape.numel());
  for (auto& v : values) v = static_cast<T>(rng.uniform(lo, hi));
  return Tensor<T>(std::move(shape), std::move(values));
}

std::string read_file(const std::filesystem::path& path);

/// root/dark/*.png and root/bright/*.png: `per_class` noisy solid images
/// each, dark around 40 and bright around 215.
void write_two_class_tree(const std::filesystem::path& root, std::size_t per_class, std::size_t size,
                          std::uint64_t seed = 1);

}  // namespace cnet::test
