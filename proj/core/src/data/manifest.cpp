#include "cnet/data/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cnet/config.hpp"
#include "cnet/data/image.hpp"
#include "cnet/error.hpp"
#include "cnet/rng.hpp"

namespace cnet::data {
namespace fs = std::filesystem;

namespace {

bool has_image_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::set<std::string> read_exclusions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read exclusion list " + path.string());
  std::set<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) entries.insert(line);
  }
  return entries;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kUnassigned: break;
  }
  return "";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  if (text.empty()) return Split::kUnassigned;
  throw Error(ErrorCode::kConfigInvalid, "unknown split '" + std::string(text) + "'");
}

std::vector<const Record*> DatasetManifest::in_split(Split split) const {
  std::vector<const Record*> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(&r);
  }
  return out;
}

LoadResult load_manifest(const fs::path& root, const std::array<std::string, 2>& class_names,
                         const ManifestLoadOptions& options) {
  if (!fs::is_directory(root)) throw Error(ErrorCode::kIoError, "data directory " + root.string() + " not found");
  std::set<std::string> excluded;
  if (options.exclusion_list) excluded = read_exclusions(*options.exclusion_list);

  LoadResult result;
  result.manifest.class_names = class_names;
  for (int label = 0; label < 2; ++label) {
    const fs::path class_dir = root / class_names[label];
    if (!fs::is_directory(class_dir)) {
      throw Error(ErrorCode::kIoError, "class directory " + class_dir.string() + " not found");
    }
    std::vector<Record> found;
    for (const auto& entry : fs::recursive_directory_iterator(class_dir)) {
      if (!entry.is_regular_file() || !has_image_extension(entry.path())) continue;
      const fs::path& file = entry.path();
      const std::string full = file.lexically_normal().generic_string();
      const std::string relative = file.lexically_relative(root).generic_string();
      if (excluded.contains(full) || excluded.contains(relative) ||
          excluded.contains(file.filename().string())) {
        continue;
      }
      const fs::path parent = file.parent_path();
      std::string group = parent.lexically_normal() == class_dir.lexically_normal()
                              ? std::string(kDefaultGroup)
                              : parent.filename().string();
      if (!options.group_filter.empty() && group != options.group_filter) continue;
      if (!is_decodable_image(file)) {
        result.skipped.push_back(full);
        continue;
      }
      found.push_back(Record{full, label, std::move(group), Split::kUnassigned});
    }
    if (found.empty()) {
      throw Error(ErrorCode::kEmptyClass, "class '" + class_names[label] + "' has no images" +
                                              (options.group_filter.empty() ? "" : " in group " + options.group_filter));
    }
    std::ranges::move(found, std::back_inserter(result.manifest.records));
  }
  std::ranges::sort(result.manifest.records, {}, &Record::path);
  std::ranges::sort(result.skipped);
  return result;
}

SplitRatios SplitRatios::parse(std::string_view text) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    parts.push_back(parse_double(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start), "ratios"));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (parts.size() != 3) throw Error(ErrorCode::kConfigInvalid, "ratios need three values");
  SplitRatios ratios;
  std::array<std::uint32_t*, 3> slots = {&ratios.train_ppm, &ratios.val_ppm, &ratios.test_ppm};
  for (std::size_t i = 0; i < 3; ++i) {
    if (parts[i] < 0.0) throw Error(ErrorCode::kConfigInvalid, "ratios must be non-negative");
    *slots[i] = static_cast<std::uint32_t>(std::llround(parts[i] * 1e6));
  }
  if (ratios.train_ppm + ratios.val_ppm + ratios.test_ppm != 1000000) {
    throw Error(ErrorCode::kConfigInvalid, "ratios must sum to 1, got " + std::string(text));
  }
  return ratios;
}

std::string SplitRatios::to_string() const {
  return format_double(train_ppm / 1e6) + "," + format_double(val_ppm / 1e6) + "," +
         format_double(test_ppm / 1e6);
}

SplitCounts split_counts(std::size_t n, const SplitRatios& ratios) {
  SplitCounts counts;
  counts.train = static_cast<std::size_t>(static_cast<std::uint64_t>(n) * ratios.train_ppm / 1000000);
  counts.val = static_cast<std::size_t>(static_cast<std::uint64_t>(n) * ratios.val_ppm / 1000000);
  counts.test = n - counts.train - counts.val;
  return counts;
}

DatasetManifest split_manifest(DatasetManifest manifest, const SplitRatios& ratios, std::uint64_t seed) {
  std::map<std::pair<int, std::string>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& r = manifest.records[i];
    strata[{r.label, r.group}].push_back(i);
  }
  for (auto& [key, members] : strata) {
    if (members.size() < 3) {
      throw Error(ErrorCode::kStratumTooSmall,
                  "stratum (" + manifest.class_names[key.first] + ", " + key.second + ") has " +
                      std::to_string(members.size()) + " records, need at least 3");
    }
    std::ranges::sort(members, [&](std::size_t a, std::size_t b) {
      return manifest.records[a].path < manifest.records[b].path;
    });
    RngStream rng(seed, fnv1a(std::to_string(key.first) + ":" + key.second));
    for (std::size_t i = members.size() - 1; i > 0; --i) {
      std::swap(members[i], members[rng.below(i + 1)]);
    }
    const SplitCounts counts = split_counts(members.size(), ratios);
    for (std::size_t i = 0; i < members.size(); ++i) {
      manifest.records[members[i]].split =
          i < counts.train ? Split::kTrain : (i < counts.train + counts.val ? Split::kVal : Split::kTest);
    }
  }
  manifest.seed = seed;
  return manifest;
}

void write_manifest_csv(const fs::path& path, const DatasetManifest& manifest) {
  std::ostringstream out;
  out << "path,label,group,split\n";
  for (const auto& r : manifest.records) {
    out << csv_field(r.path) << ',' << r.label << ',' << csv_field(r.group) << ',' << split_name(r.split) << '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  file << out.str();
  if (!file) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

DatasetManifest read_manifest_csv(const fs::path& path, const std::array<std::string, 2>& class_names) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read manifest " + path.string());
  DatasetManifest manifest;
  manifest.class_names = class_names;
  std::string line;
  if (!std::getline(in, line) || parse_csv_line(line) != std::vector<std::string>{"path", "label", "group", "split"}) {
    throw Error(ErrorCode::kConfigInvalid, path.string() + " lacks the header path,label,group,split");
  }
  std::set<std::string> seen;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    auto fields = parse_csv_line(line);
    if (fields.size() != 4 || (fields[1] != "0" && fields[1] != "1")) {
      throw Error(ErrorCode::kConfigInvalid, path.string() + ":" + std::to_string(line_number) + " is malformed");
    }
    if (!seen.insert(fields[0]).second) {
      throw Error(ErrorCode::kConfigInvalid, "duplicate path " + fields[0] + " in " + path.string());
    }
    manifest.records.push_back(Record{fields[0], fields[1] == "1" ? 1 : 0, fields[2], parse_split(fields[3])});
  }
  return manifest;
}

}  // namespace cnet::data
