#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cnet/data/batch.hpp"
#include "cnet/metrics.hpp"
#include "cnet/model.hpp"
#include "run_config.hpp"

namespace cnet::app {

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
};

struct TrainResult {
  std::vector<EpochLog> log;
  /// Epoch whose weights were written (0 = initial weights).
  std::size_t selected_epoch = 0;
  std::size_t steps = 0;
  /// Accuracy of the final weights on the training split, eval mode.
  std::optional<double> train_accuracy;
};

struct TrainOptions {
  /// Stop after this many optimizer steps (0 = no limit).
  std::size_t max_steps = 0;
  /// Stop once an epoch ends with 100% eval-mode training accuracy.
  bool stop_at_perfect_train = false;
  std::ostream* progress = nullptr;
};

/// Runs config.epochs epochs of Adam on the train split, scoring the val
/// split after each. The checkpoint holds the epoch with the best val
/// accuracy (ties to the lower val loss), or the last epoch when there is
/// no val split. Log columns: epoch,train_loss,val_loss,val_accuracy.
///
/// Throws kNonFinite on a NaN/Inf loss and kIoError when an output cannot
/// be written.
TrainResult train(const RunConfig& config, const data::DatasetManifest& manifest,
                  const std::filesystem::path& checkpoint_out, const std::filesystem::path& log_out,
                  const TrainOptions& options = {});

/// Maps (b, H, W, 3) images to (b, 2) activations.
using Predictor = std::function<Tensor<float>(const Tensor<float>&)>;

Predictor model_predictor(const CNetModel& model);

/// Confusion matrix per group tag over one split, eval mode.
std::map<std::string, ConfusionMatrix> evaluate_groups(const Predictor& predictor,
                                                       const data::DatasetManifest& manifest, data::Split split,
                                                       const data::BatchOptions& options);

struct LossAccuracy {
  double loss = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

/// Mean BCE and accuracy over one split, eval mode. count = 0 when the
/// split is empty.
LossAccuracy score_split(const CNetModel& model, const data::DatasetManifest& manifest, data::Split split,
                         const data::BatchOptions& options);

}  // namespace cnet::app
