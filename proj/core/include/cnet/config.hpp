#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cnet {

/// Positive rational multiplier applied to every filter and unit count.
struct WidthScale {
  std::uint32_t numerator = 1;
  std::uint32_t denominator = 1;

  /// round(count * numerator / denominator), halves rounded up.
  std::size_t apply(std::size_t count) const;
  std::string to_string() const;
  /// Parses "n" or "n/d", e.g. "1/8".
  static WidthScale parse(std::string_view text);

  bool operator==(const WidthScale&) const = default;
};

/// Architectural hyperparameters of the concatenated network. Counts below
/// are the unscaled values; `width_scale` is applied when building.
struct CNetConfig {
  std::size_t input_height = 224;
  std::size_t input_width = 224;
  std::size_t input_channels = 3;

  std::size_t outer_count = 4;
  std::vector<std::size_t> outer_convs_per_block{2, 2, 4, 4};
  std::vector<std::size_t> outer_filters{64, 128, 256, 256};

  std::size_t middle_count = 2;
  std::size_t middle_convs_per_block = 4;
  std::size_t middle_filters = 256;
  std::size_t middle_blocks = 2;

  std::size_t inner_convs = 2;
  std::size_t inner_filters = 256;

  std::size_t fc_units = 1024;
  std::size_t output_nodes = 2;

  double dropout_middle = 0.25;
  double dropout_fc = 0.5;

  WidthScale width_scale;

  /// Throws kConfigInvalid.
  void validate() const;

  std::size_t scaled(std::size_t count) const { return width_scale.apply(count); }

  /// Flat key/value view; keys are the field names above.
  std::map<std::string, std::string> to_map() const;
  /// Inverse of to_map(). Missing keys keep their defaults; unknown keys
  /// throw kConfigInvalid.
  static CNetConfig from_map(const std::map<std::string, std::string>& values);

  /// Canonical text: one "key=value" line per field, keys sorted.
  std::string to_text() const;

  bool operator==(const CNetConfig&) const = default;
};

// Shared text helpers for the flat key=value formats.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view key);
std::size_t parse_size(std::string_view text, std::string_view key);
std::vector<std::size_t> parse_size_list(std::string_view text, std::string_view key);
std::string format_size_list(const std::vector<std::size_t>& values);

}  // namespace cnet
