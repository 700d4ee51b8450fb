#include "training.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "cnet/adam.hpp"
#include "cnet/checkpoint.hpp"
#include "cnet/error.hpp"
#include "cnet/loss.hpp"
#include "cnet/rng.hpp"

namespace cnet::app {
namespace {

constexpr std::uint64_t kDropoutTag = 0x64726f706f7574ULL;

data::BatchOptions batch_options(const RunConfig& config, bool training) {
  data::BatchOptions o;
  o.batch_size = config.batch_size;
  o.height = config.network.input_height;
  o.width = config.network.input_width;
  if (training && config.augment) o.augment = config.augment_spec;
  o.seed = config.seed;
  return o;
}

std::string optional_field(const std::optional<double>& value) { return value ? format_double(*value) : ""; }

}  // namespace

Predictor model_predictor(const CNetModel& model) {
  return [&model](const Tensor<float>& images) { return model.predict(images); };
}

std::map<std::string, ConfusionMatrix> evaluate_groups(const Predictor& predictor,
                                                       const data::DatasetManifest& manifest, data::Split split,
                                                       const data::BatchOptions& options) {
  data::BatchOptions o = options;
  o.augment.reset();
  data::BatchIterator batches(manifest, split, o);
  std::map<std::string, ConfusionMatrix> groups;
  while (auto batch = batches.next()) {
    const Tensor<float> out = predictor(batch->images);
    const auto rows = batch->records.size();
    if (out.shape() != Shape{rows, 2}) {
      throw Error(ErrorCode::kShapeMismatch, "predictor returned " + out.shape().to_string());
    }
    for (std::size_t i = 0; i < rows; ++i) {
      const Tensor<float> p({1, 2}, {out.data()[2 * i], out.data()[2 * i + 1]});
      const Tensor<float> y({1, 2}, {batch->labels.data()[2 * i], batch->labels.data()[2 * i + 1]});
      auto& cm = groups[batch->records[i]->group];
      cm = accumulate(p, y, cm);
    }
  }
  return groups;
}

LossAccuracy score_split(const CNetModel& model, const data::DatasetManifest& manifest, data::Split split,
                         const data::BatchOptions& options) {
  data::BatchOptions o = options;
  o.augment.reset();
  data::BatchIterator batches(manifest, split, o);
  LossAccuracy result;
  double loss_sum = 0.0;
  ConfusionMatrix cm;
  while (auto batch = batches.next()) {
    const Tensor<float> out = model.predict(batch->images);
    const auto b = batch->records.size();
    loss_sum += static_cast<double>(bce_loss(out, batch->labels).item()) * static_cast<double>(b);
    cm = accumulate(out, batch->labels, cm);
    result.count += b;
  }
  if (result.count > 0) {
    result.loss = loss_sum / static_cast<double>(result.count);
    result.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(result.count);
  }
  return result;
}

TrainResult train(const RunConfig& config, const data::DatasetManifest& manifest,
                  const std::filesystem::path& checkpoint_out, const std::filesystem::path& log_out,
                  const TrainOptions& options) {
  config.validate();
  CNetModel model = build_cnet(config.network, config.seed);
  AdamState<float> state = AdamState<float>::for_parameters(model.parameters(), config.adam);

  std::map<std::string, std::string> metadata{
      {"classes", manifest.class_names[0] + "," + manifest.class_names[1]},
      {"seed", std::to_string(config.seed)},
      {"selected_epoch", "0"},
  };

  std::ofstream log(log_out, std::ios::binary | std::ios::trunc);
  if (!log) throw Error(ErrorCode::kIoError, "cannot write log " + log_out.string());
  log << "epoch,train_loss,val_loss,val_accuracy\n";

  TrainResult result;
  if (config.epochs == 0) {
    save_checkpoint(checkpoint_out, model, state, metadata);
    return result;
  }

  const data::BatchOptions eval_options = batch_options(config, false);
  std::optional<LossAccuracy> best;
  bool stop = false;
  for (std::size_t epoch = 1; epoch <= config.epochs && !stop; ++epoch) {
    data::BatchOptions train_options = batch_options(config, true);
    train_options.epoch = epoch;
    data::BatchIterator batches(manifest, data::Split::kTrain, train_options);

    double loss_sum = 0.0;
    std::size_t seen = 0;
    while (auto batch = batches.next()) {
      RngStream dropout_rng(config.seed ^ kDropoutTag, result.steps);
      Tape<float> tape;
      const Tensor<float> out = model.forward(batch->images, Mode::kTrain, dropout_rng, &tape);
      const Tensor<float> loss = bce_loss(out, batch->labels, &tape);
      const float value = loss.item();
      if (!std::isfinite(value)) {
        throw Error(ErrorCode::kNonFinite, "loss is not finite at epoch " + std::to_string(epoch) + ", step " +
                                               std::to_string(result.steps + 1));
      }
      backward(loss, tape);
      adam_step(model.parameters(), state);
      ++result.steps;
      loss_sum += static_cast<double>(value) * static_cast<double>(batch->records.size());
      seen += batch->records.size();
      if (options.max_steps != 0 && result.steps >= options.max_steps) {
        stop = true;
        break;
      }
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0;
    const LossAccuracy val = score_split(model, manifest, data::Split::kVal, eval_options);
    if (val.count > 0) {
      entry.val_loss = val.loss;
      entry.val_accuracy = val.accuracy;
    }
    log << epoch << ',' << format_double(entry.train_loss) << ',' << optional_field(entry.val_loss) << ','
        << optional_field(entry.val_accuracy) << '\n';
    log.flush();
    if (!log) throw Error(ErrorCode::kIoError, "cannot write log " + log_out.string());
    result.log.push_back(entry);

    const bool improved = val.count == 0 || !best || val.accuracy > best->accuracy ||
                          (val.accuracy == best->accuracy && val.loss < best->loss);
    if (improved) {
      best = val;
      result.selected_epoch = epoch;
      metadata["selected_epoch"] = std::to_string(epoch);
      save_checkpoint(checkpoint_out, model, state, metadata);
    }

    if (options.progress != nullptr) {
      *options.progress << "epoch " << epoch << " steps " << result.steps << " train_loss "
                        << format_double(entry.train_loss)
                        << (entry.val_accuracy ? " val_accuracy " + format_double(*entry.val_accuracy) : "") << '\n';
    }
    if (options.stop_at_perfect_train) {
      const LossAccuracy train_score = score_split(model, manifest, data::Split::kTrain, eval_options);
      result.train_accuracy = train_score.accuracy;
      if (train_score.count > 0 && train_score.accuracy == 1.0) stop = true;
    }
  }
  return result;
}

}  // namespace cnet::app
