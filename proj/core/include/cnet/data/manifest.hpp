#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cnet::data {

enum class Split { kUnassigned, kTrain, kVal, kTest };

std::string_view split_name(Split split);
Split parse_split(std::string_view text);

struct Record {
  std::string path;
  int label = 0;  // index into class_names
  std::string group;
  Split split = Split::kUnassigned;

  bool operator==(const Record&) const = default;
};

struct DatasetManifest {
  std::vector<Record> records;
  std::array<std::string, 2> class_names;
  std::uint64_t seed = 0;

  std::vector<const Record*> in_split(Split split) const;
};

struct ManifestLoadOptions {
  /// Keep only records whose group tag equals this (empty keeps all).
  std::string group_filter;
  /// Text file, one path per line, of images to leave out.
  std::optional<std::filesystem::path> exclusion_list;
};

struct LoadResult {
  DatasetManifest manifest;
  /// Files that looked like images but did not decode.
  std::vector<std::string> skipped;
};

/// Group tag used for images that sit directly in a class directory.
inline constexpr std::string_view kDefaultGroup = "all";

/// Walks root/<class>/**/<image>. The group tag of an image is the name of
/// the directory that holds it, or "all" when that is the class directory
/// itself. Records are sorted by path. Throws kEmptyClass when a class has
/// no images (after filtering) and kIoError when a class directory is
/// missing.
LoadResult load_manifest(const std::filesystem::path& root, const std::array<std::string, 2>& class_names,
                         const ManifestLoadOptions& options = {});

/// Split fractions held as exact parts-per-million.
struct SplitRatios {
  std::uint32_t train_ppm = 700000;
  std::uint32_t val_ppm = 150000;
  std::uint32_t test_ppm = 150000;

  /// Parses "0.70,0.15,0.15". Throws kConfigInvalid unless they sum to 1.
  static SplitRatios parse(std::string_view text);
  std::string to_string() const;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// floor(train * n), floor(val * n), remainder to test.
SplitCounts split_counts(std::size_t n, const SplitRatios& ratios);

/// Stratified split: within each (label, group) stratum the records are
/// shuffled with `seed` and assigned by split_counts(). Throws
/// kStratumTooSmall if a stratum has fewer than 3 records.
DatasetManifest split_manifest(DatasetManifest manifest, const SplitRatios& ratios, std::uint64_t seed);

/// CSV with header path,label,group,split.
void write_manifest_csv(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest_csv(const std::filesystem::path& path,
                                  const std::array<std::string, 2>& class_names);

}  // namespace cnet::data
