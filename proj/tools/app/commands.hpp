#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "cnet/report.hpp"
#include "training.hpp"
#include "verify.hpp"

namespace cnet::app {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;  // verify failure, unexpected error
inline constexpr int kBadInput = 2;  // bad data directory, stratum, image or config
inline constexpr int kNonFinite = 3;
inline constexpr int kCheckpointIo = 4;
inline constexpr int kConfigMismatch = 5;
inline constexpr int kEmptyMatrix = 6;
}  // namespace exit_code

struct SplitArgs {
  std::filesystem::path data_dir;
  std::string classes = "benign,malignant";
  std::string group;
  std::string ratios = "0.70,0.15,0.15";
  std::uint64_t seed = 42;
  std::filesystem::path out;
  std::optional<std::filesystem::path> exclusion_list;
};

struct TrainArgs {
  std::filesystem::path config;
  std::filesystem::path manifest;  // empty: the config manifest, else scan data_dir
  std::filesystem::path checkpoint_out;
  std::filesystem::path log_out;
};

struct EvalArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;
  /// Empty falls back to the config's `report`.
  std::filesystem::path report_out;
  /// csv or json; empty means the config's `report_format`, else csv.
  std::string format;
  /// Optional run config whose network section the checkpoint must match.
  std::optional<std::filesystem::path> config;
  std::size_t batch_size = 32;
};

struct PredictArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path image;
};

struct VerifyArgs {
  bool fast = false;
  std::string mutate = "none";
};

int cmd_split(const SplitArgs& args, std::ostream& out, std::ostream& err);
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_predict(const PredictArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);

/// The evaluation half of cmd_eval with the network replaced by any
/// predictor: per-group metrics over the test split, written as a report.
int run_eval(const Predictor& predictor, const data::DatasetManifest& manifest,
             const data::BatchOptions& options, ReportFormat format, const std::filesystem::path& report_out,
             std::ostream& out, std::ostream& err);

}  // namespace cnet::app
