#include "commands.hpp"

#include <iomanip>
#include <map>
#include <ostream>

#include "cnet/checkpoint.hpp"
#include "cnet/data/image.hpp"
#include "cnet/error.hpp"

namespace cnet::app {
namespace {

int report_error(const Error& e, std::ostream& err, int code) {
  err << "error: " << e.what() << '\n';
  return code;
}

std::array<std::string, 2> checkpoint_classes(const Checkpoint& checkpoint) {
  const auto it = checkpoint.metadata.find("classes");
  if (it == checkpoint.metadata.end()) return {"class0", "class1"};
  return parse_class_pair(it->second);
}

void print_split_table(const data::DatasetManifest& manifest, std::ostream& out) {
  struct Row {
    std::size_t total = 0, train = 0, val = 0, test = 0;
    void add(data::Split s) {
      ++total;
      if (s == data::Split::kTrain) ++train;
      else if (s == data::Split::kVal) ++val;
      else if (s == data::Split::kTest) ++test;
    }
  };
  std::map<std::pair<std::string, int>, Row> strata;
  Row totals;
  for (const auto& r : manifest.records) {
    strata[{r.group, r.label}].add(r.split);
    totals.add(r.split);
  }
  auto line = [&out](const std::string& group, const std::string& cls, const Row& row) {
    out << std::left << std::setw(10) << group << std::setw(14) << cls << std::right << std::setw(7) << row.total
        << std::setw(7) << row.train << std::setw(7) << row.val << std::setw(7) << row.test << '\n';
  };
  out << std::left << std::setw(10) << "group" << std::setw(14) << "class" << std::right << std::setw(7) << "total"
      << std::setw(7) << "train" << std::setw(7) << "val" << std::setw(7) << "test" << '\n';
  for (const auto& [key, row] : strata) line(key.first, manifest.class_names[key.second], row);
  line("total", "", totals);
}

// Scans and splits data_dir the same way `split` does.
data::DatasetManifest manifest_from_config(const RunConfig& config, std::ostream& err) {
  data::ManifestLoadOptions options;
  options.group_filter = config.group;
  if (!config.exclusion_list.empty()) options.exclusion_list = std::filesystem::path(config.exclusion_list);
  data::LoadResult loaded = data::load_manifest(config.data_dir, config.classes, options);
  for (const auto& path : loaded.skipped) err << "warning: skipped unreadable image " << path << '\n';
  return data::split_manifest(std::move(loaded.manifest), config.ratios, config.seed);
}

}  // namespace

int cmd_split(const SplitArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const auto classes = parse_class_pair(args.classes);
    const auto ratios = data::SplitRatios::parse(args.ratios);
    data::ManifestLoadOptions options;
    options.group_filter = args.group;
    options.exclusion_list = args.exclusion_list;
    data::LoadResult loaded = data::load_manifest(args.data_dir, classes, options);
    for (const auto& path : loaded.skipped) err << "warning: skipped unreadable image " << path << '\n';
    const data::DatasetManifest manifest = data::split_manifest(std::move(loaded.manifest), ratios, args.seed);
    data::write_manifest_csv(args.out, manifest);
    print_split_table(manifest, out);
    return exit_code::kOk;
  } catch (const Error& e) {
    return report_error(e, err, exit_code::kBadInput);
  }
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  try {
    RunConfig config = RunConfig::load(args.config);
    config.validate();
    const std::filesystem::path manifest_path = args.manifest.empty() ? std::filesystem::path(config.manifest) : args.manifest;
    const std::filesystem::path checkpoint = args.checkpoint_out.empty() ? std::filesystem::path(config.checkpoint) : args.checkpoint_out;
    const std::filesystem::path log = args.log_out.empty() ? std::filesystem::path(config.log) : args.log_out;
    if (checkpoint.empty() || log.empty()) {
      throw Error(ErrorCode::kConfigInvalid, "checkpoint and log paths are required");
    }
    if (manifest_path.empty() && config.data_dir.empty()) {
      throw Error(ErrorCode::kConfigInvalid, "either a manifest or data_dir is required");
    }
    const data::DatasetManifest manifest =
        manifest_path.empty() ? manifest_from_config(config, err) : data::read_manifest_csv(manifest_path, config.classes);

    TrainOptions options;
    options.progress = &out;
    try {
      const TrainResult result = train(config, manifest, checkpoint, log, options);
      out << "trained " << result.steps << " steps; checkpoint holds epoch " << result.selected_epoch << '\n';
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNonFinite) return report_error(e, err, exit_code::kNonFinite);
      if (e.code() == ErrorCode::kIoError) return report_error(e, err, exit_code::kCheckpointIo);
      throw;
    }
    return exit_code::kOk;
  } catch (const Error& e) {
    return report_error(e, err, exit_code::kBadInput);
  }
}

int run_eval(const Predictor& predictor, const data::DatasetManifest& manifest, const data::BatchOptions& options,
             ReportFormat format, const std::filesystem::path& report_out, std::ostream& out, std::ostream& err) {
  try {
    const auto groups = evaluate_groups(predictor, manifest, data::Split::kTest, options);
    std::map<std::string, MetricReport> reports;
    for (const auto& [group, cm] : groups) {
      if (cm.total() > 0) reports.emplace(group, compute_metrics(cm));
    }
    if (reports.empty()) throw Error(ErrorCode::kEmptyMatrix, "the test split has no evaluable images");
    emit_report(reports, format, report_out);
    out << render_report(reports, ReportFormat::kCsv);
    return exit_code::kOk;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyMatrix) return report_error(e, err, exit_code::kEmptyMatrix);
    if (e.code() == ErrorCode::kIoError) return report_error(e, err, exit_code::kBadInput);
    throw;
  }
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  try {
    std::optional<RunConfig> requested;
    if (args.config) requested = RunConfig::load(*args.config);
    ReportFormat format = ReportFormat::kCsv;
    if (!args.format.empty()) {
      format = parse_report_format(args.format);
    } else if (requested) {
      format = requested->report_format;
    }
    std::filesystem::path report_out = args.report_out;
    if (report_out.empty() && requested) report_out = requested->report;
    if (report_out.empty()) throw Error(ErrorCode::kConfigInvalid, "a report path is required");
    Checkpoint checkpoint = [&] {
      try {
        return load_checkpoint(args.checkpoint, requested ? &requested->network : nullptr);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kConfigMismatch) throw;
        throw Error(ErrorCode::kIoError, e.what());
      }
    }();
    const auto classes = checkpoint_classes(checkpoint);
    const data::DatasetManifest manifest = data::read_manifest_csv(args.manifest, classes);

    data::BatchOptions options;
    options.batch_size = requested ? requested->batch_size : args.batch_size;
    options.height = checkpoint.config.input_height;
    options.width = checkpoint.config.input_width;
    return run_eval(model_predictor(checkpoint.model), manifest, options, format, report_out, out, err);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigMismatch) return report_error(e, err, exit_code::kConfigMismatch);
    if (e.code() == ErrorCode::kEmptyMatrix) return report_error(e, err, exit_code::kEmptyMatrix);
    return report_error(e, err, exit_code::kBadInput);
  }
}

int cmd_predict(const PredictArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const Checkpoint checkpoint = load_checkpoint(args.checkpoint);
    const auto classes = checkpoint_classes(checkpoint);
    const auto& c = checkpoint.config;
    const Tensor<float> image = data::load_and_resize(args.image, c.input_height, c.input_width);
    const Tensor<float> batch = image.reshaped(Shape{1, c.input_height, c.input_width, c.input_channels});
    const Tensor<float> activations = checkpoint.model.predict(batch);
    const float a0 = activations.data()[0], a1 = activations.data()[1];
    out << "class " << classes[predicted_class(a0, a1)] << '\n'
        << std::fixed << std::setprecision(6) << classes[0] << ' ' << a0 << '\n'
        << classes[1] << ' ' << a1 << '\n';
    return exit_code::kOk;
  } catch (const Error& e) {
    return report_error(e, err, exit_code::kBadInput);
  }
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  VerifyOptions options;
  options.fast = args.fast;
  try {
    options.mutation = parse_mutation(args.mutate);
  } catch (const Error& e) {
    return report_error(e, err, exit_code::kBadInput);
  }
  std::size_t failed = 0;
  const auto results = run_verify(options);
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    if (!r.passed) ++failed;
  }
  out << results.size() - failed << '/' << results.size() << " checks passed\n";
  return failed == 0 ? exit_code::kOk : exit_code::kFailure;
}

}  // namespace cnet::app
