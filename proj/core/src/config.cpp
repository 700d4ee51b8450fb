#include "cnet/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "cnet/error.hpp"

namespace cnet {
namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::kConfigInvalid, message);
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  return text;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

double parse_double(std::string_view text, std::string_view key) {
  text = trim(text);
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) {
    invalid("bad number '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

std::size_t parse_size(std::string_view text, std::string_view key) {
  text = trim(text);
  std::size_t value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    invalid("bad integer '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

std::vector<std::size_t> parse_size_list(std::string_view text, std::string_view key) {
  std::vector<std::size_t> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t stop = comma == std::string_view::npos ? text.size() : comma;
    values.push_back(parse_size(text.substr(start, stop - start), key));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

std::string format_size_list(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::size_t WidthScale::apply(std::size_t count) const {
  const std::uint64_t scaled2 = 2ull * count * numerator + denominator;
  return static_cast<std::size_t>(scaled2 / (2ull * denominator));
}

std::string WidthScale::to_string() const {
  if (denominator == 1) return std::to_string(numerator);
  return std::to_string(numerator) + "/" + std::to_string(denominator);
}

WidthScale WidthScale::parse(std::string_view text) {
  text = trim(text);
  WidthScale scale;
  const std::size_t slash = text.find('/');
  scale.numerator = static_cast<std::uint32_t>(parse_size(text.substr(0, slash), "width_scale"));
  if (slash != std::string_view::npos) {
    scale.denominator = static_cast<std::uint32_t>(parse_size(text.substr(slash + 1), "width_scale"));
  }
  if (scale.numerator == 0 || scale.denominator == 0) invalid("width_scale must be positive");
  return scale;
}

void CNetConfig::validate() const {
  if (input_height == 0 || input_width == 0) invalid("input size must be positive");
  if (input_channels == 0) invalid("input_channels must be positive");
  if (outer_count != 4) invalid("outer_count must be 4");
  if (middle_count != 2) invalid("middle_count must be 2");
  if (outer_convs_per_block.size() != 4) invalid("outer_convs_per_block needs 4 entries");
  if (outer_filters.size() != 4) invalid("outer_filters needs 4 entries");
  for (std::size_t n : outer_convs_per_block) {
    if (n == 0) invalid("every outer block needs at least one convolution");
  }
  if (outer_filters[1] != 2 * outer_filters[0] || outer_filters[2] != 2 * outer_filters[1]) {
    invalid("outer_filters must double across the first three blocks, got " +
            format_size_list(outer_filters));
  }
  if (outer_filters[3] != outer_filters[2]) {
    invalid("the final outer block keeps the previous filter count, got " +
            format_size_list(outer_filters));
  }
  if (middle_convs_per_block == 0 || middle_blocks == 0 || inner_convs == 0) {
    invalid("middle and inner networks need at least one convolution and block");
  }
  if (output_nodes == 0) invalid("output_nodes must be positive");
  if (!(dropout_middle >= 0.0 && dropout_middle < 1.0) || !(dropout_fc >= 0.0 && dropout_fc < 1.0)) {
    invalid("dropout rates must lie in [0, 1)");
  }
  if (width_scale.numerator == 0 || width_scale.denominator == 0) invalid("width_scale must be positive");
  for (std::size_t count : {outer_filters[0], outer_filters[1], outer_filters[2], outer_filters[3],
                            middle_filters, inner_filters, fc_units}) {
    if (count == 0 || scaled(count) < 1) {
      invalid("width_scale " + width_scale.to_string() + " rounds a layer width of " +
              std::to_string(count) + " to zero");
    }
  }
}

std::map<std::string, std::string> CNetConfig::to_map() const {
  return {
      {"input_height", std::to_string(input_height)},
      {"input_width", std::to_string(input_width)},
      {"input_channels", std::to_string(input_channels)},
      {"outer_count", std::to_string(outer_count)},
      {"outer_convs_per_block", format_size_list(outer_convs_per_block)},
      {"outer_filters", format_size_list(outer_filters)},
      {"middle_count", std::to_string(middle_count)},
      {"middle_convs_per_block", std::to_string(middle_convs_per_block)},
      {"middle_filters", std::to_string(middle_filters)},
      {"middle_blocks", std::to_string(middle_blocks)},
      {"inner_convs", std::to_string(inner_convs)},
      {"inner_filters", std::to_string(inner_filters)},
      {"fc_units", std::to_string(fc_units)},
      {"output_nodes", std::to_string(output_nodes)},
      {"dropout_middle", format_double(dropout_middle)},
      {"dropout_fc", format_double(dropout_fc)},
      {"width_scale", width_scale.to_string()},
  };
}

CNetConfig CNetConfig::from_map(const std::map<std::string, std::string>& values) {
  CNetConfig c;
  for (const auto& [key, value] : values) {
    if (key == "input_height") c.input_height = parse_size(value, key);
    else if (key == "input_width") c.input_width = parse_size(value, key);
    else if (key == "input_channels") c.input_channels = parse_size(value, key);
    else if (key == "outer_count") c.outer_count = parse_size(value, key);
    else if (key == "outer_convs_per_block") c.outer_convs_per_block = parse_size_list(value, key);
    else if (key == "outer_filters") c.outer_filters = parse_size_list(value, key);
    else if (key == "middle_count") c.middle_count = parse_size(value, key);
    else if (key == "middle_convs_per_block") c.middle_convs_per_block = parse_size(value, key);
    else if (key == "middle_filters") c.middle_filters = parse_size(value, key);
    else if (key == "middle_blocks") c.middle_blocks = parse_size(value, key);
    else if (key == "inner_convs") c.inner_convs = parse_size(value, key);
    else if (key == "inner_filters") c.inner_filters = parse_size(value, key);
    else if (key == "fc_units") c.fc_units = parse_size(value, key);
    else if (key == "output_nodes") c.output_nodes = parse_size(value, key);
    else if (key == "dropout_middle") c.dropout_middle = parse_double(value, key);
    else if (key == "dropout_fc") c.dropout_fc = parse_double(value, key);
    else if (key == "width_scale") c.width_scale = WidthScale::parse(value);
    else invalid("unknown network key '" + key + "'");
  }
  return c;
}

std::string CNetConfig::to_text() const {
  std::ostringstream out;
  for (const auto& [key, value] : to_map()) out << key << '=' << value << '\n';
  return out.str();
}

}  // namespace cnet
