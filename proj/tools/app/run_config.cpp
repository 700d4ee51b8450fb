#include "run_config.hpp"

#include <fstream>
#include <sstream>

#include "cnet/error.hpp"

namespace cnet::app {
namespace {

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::kConfigInvalid, message); }

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  invalid("bad boolean '" + text + "' for " + key);
}

std::string format_bool(bool value) { return value ? "true" : "false"; }

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

}  // namespace

std::array<std::string, 2> parse_class_pair(std::string_view text) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos) {
    invalid("classes must name exactly two classes, got '" + std::string(text) + "'");
  }
  std::array<std::string, 2> pair{trim(std::string(text.substr(0, comma))), trim(std::string(text.substr(comma + 1)))};
  if (pair[0].empty() || pair[1].empty() || pair[0] == pair[1]) invalid("class names must be distinct and non-empty");
  return pair;
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> m = network.to_map();
  m["data_dir"] = data_dir;
  m["classes"] = classes[0] + "," + classes[1];
  m["group"] = group;
  m["ratios"] = ratios.to_string();
  m["exclusion_list"] = exclusion_list;
  m["batch_size"] = std::to_string(batch_size);
  m["epochs"] = std::to_string(epochs);
  m["seed"] = std::to_string(seed);
  m["learning_rate"] = format_double(adam.learning_rate);
  m["beta1"] = format_double(adam.beta1);
  m["beta2"] = format_double(adam.beta2);
  m["adam_eps"] = format_double(adam.eps_hat);
  m["augment"] = format_bool(augment);
  m["augment_horizontal_flip"] = format_bool(augment_spec.horizontal_flip);
  m["augment_vertical_flip"] = format_bool(augment_spec.vertical_flip);
  m["augment_shear"] = format_double(augment_spec.shear);
  m["augment_zoom"] = format_double(augment_spec.zoom);
  m["augment_width_shift"] = format_double(augment_spec.width_shift);
  m["augment_height_shift"] = format_double(augment_spec.height_shift);
  m["augment_rotation"] = format_double(augment_spec.rotation_degrees);
  m["manifest"] = manifest;
  m["checkpoint"] = checkpoint;
  m["log"] = log;
  m["report"] = report;
  m["report_format"] = report_format == ReportFormat::kCsv ? "csv" : "json";
  return m;
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  for (const auto& [key, value] : to_map()) out << key << '=' << value << '\n';
  return out.str();
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& values) {
  RunConfig c;
  const auto network_keys = CNetConfig{}.to_map();
  std::map<std::string, std::string> network_values;
  for (const auto& [key, value] : values) {
    if (network_keys.contains(key)) network_values[key] = value;
    else if (key == "data_dir") c.data_dir = value;
    else if (key == "classes") c.classes = parse_class_pair(value);
    else if (key == "group") c.group = value;
    else if (key == "ratios") c.ratios = data::SplitRatios::parse(value);
    else if (key == "exclusion_list") c.exclusion_list = value;
    else if (key == "batch_size") c.batch_size = parse_size(value, key);
    else if (key == "epochs") c.epochs = parse_size(value, key);
    else if (key == "seed") c.seed = parse_size(value, key);
    else if (key == "learning_rate") c.adam.learning_rate = parse_double(value, key);
    else if (key == "beta1") c.adam.beta1 = parse_double(value, key);
    else if (key == "beta2") c.adam.beta2 = parse_double(value, key);
    else if (key == "adam_eps") c.adam.eps_hat = parse_double(value, key);
    else if (key == "augment") c.augment = parse_bool(value, key);
    else if (key == "augment_horizontal_flip") c.augment_spec.horizontal_flip = parse_bool(value, key);
    else if (key == "augment_vertical_flip") c.augment_spec.vertical_flip = parse_bool(value, key);
    else if (key == "augment_shear") c.augment_spec.shear = parse_double(value, key);
    else if (key == "augment_zoom") c.augment_spec.zoom = parse_double(value, key);
    else if (key == "augment_width_shift") c.augment_spec.width_shift = parse_double(value, key);
    else if (key == "augment_height_shift") c.augment_spec.height_shift = parse_double(value, key);
    else if (key == "augment_rotation") c.augment_spec.rotation_degrees = parse_double(value, key);
    else if (key == "manifest") c.manifest = value;
    else if (key == "checkpoint") c.checkpoint = value;
    else if (key == "log") c.log = value;
    else if (key == "report") c.report = value;
    else if (key == "report_format") c.report_format = parse_report_format(value);
    else invalid("unknown config key '" + key + "'");
  }
  c.network = CNetConfig::from_map(network_values);
  return c;
}

RunConfig RunConfig::parse(std::string_view text) {
  std::map<std::string, std::string> values;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) invalid("line " + std::to_string(number) + " is not key=value");
    const std::string key = trim(stripped.substr(0, eq));
    if (!values.emplace(key, trim(stripped.substr(eq + 1))).second) {
      invalid("key '" + key + "' given twice");
    }
  }
  return from_map(values);
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

void RunConfig::validate() const {
  network.validate();
  augment_spec.validate();
  if (batch_size == 0) invalid("batch_size must be at least 1");
  if (!(adam.learning_rate > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.eps_hat > 0.0)) {
    invalid("Adam hyperparameters out of range");
  }
}

}  // namespace cnet::app
