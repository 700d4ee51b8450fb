#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "cnet/adam.hpp"
#include "cnet/config.hpp"
#include "cnet/data/augment.hpp"
#include "cnet/data/manifest.hpp"
#include "cnet/report.hpp"

namespace cnet::app {

/// Everything a run needs, loaded from a flat UTF-8 "key=value" file.
/// Blank lines and lines starting with '#' are ignored; unknown keys are
/// rejected.
struct RunConfig {
  std::string data_dir;
  std::array<std::string, 2> classes{"benign", "malignant"};
  std::string group;
  data::SplitRatios ratios;
  std::string exclusion_list;

  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  std::uint64_t seed = 42;

  AdamHyperparameters adam;
  CNetConfig network;

  bool augment = true;
  data::AugmentSpec augment_spec;

  std::string manifest;
  std::string checkpoint;
  std::string log;
  std::string report;
  ReportFormat report_format = ReportFormat::kCsv;

  std::map<std::string, std::string> to_map() const;
  std::string serialize() const;

  /// Applies `values` on top of the defaults. Throws kConfigInvalid.
  static RunConfig from_map(const std::map<std::string, std::string>& values);
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  void validate() const;

  bool operator==(const RunConfig& other) const { return serialize() == other.serialize(); }
};

std::array<std::string, 2> parse_class_pair(std::string_view text);

}  // namespace cnet::app
