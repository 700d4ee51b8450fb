// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "app/commands.hpp"
#include "app/run_config.hpp"
#include "app/training.hpp"
#include "app/verify.hpp"
#include "cnet/adam.hpp"
#include "cnet/checkpoint.hpp"
#include "cnet/data/augment.hpp"
#include "cnet/loss.hpp"
#include "test_util.hpp"

using namespace cnet;
using namespace cnet::app;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

constexpr double kGradBudgetSeconds = 120.0;
constexpr double kOracleBudgetSeconds = 1.0;
constexpr double kOverfitBudgetSeconds = 600.0;
constexpr std::size_t kOverfitMaxSteps = 200;

Outcome from_check(const CheckResult& r) { return {r.passed, r.detail}; }

Outcome within(Outcome o, double seconds, double budget) {
  std::ostringstream detail;
  detail << o.detail << " [" << std::fixed << std::setprecision(2) << seconds << "s, budget " << budget << "s]";
  return {o.passed && seconds < budget, detail.str()};
}

Outcome gradient_correctness() {
  const auto start = Clock::now();
  const auto results = gradient_checks(20);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  Outcome o{true, ""};
  std::ostringstream detail;
  for (const auto& r : results) {
    o.passed = o.passed && r.passed;
    if (!r.passed) detail << r.name << " FAILED (" << r.detail << "); ";
  }
  detail << results.size() << " layers x 20 seeds, step " << kGradStep << ", tol " << kGradTolerance;
  o.detail = detail.str();
  return within(o, seconds, kGradBudgetSeconds);
}

Outcome timed_oracle(const std::function<CheckResult()>& check) {
  const auto start = Clock::now();
  const CheckResult r = check();
  return within(from_check(r), std::chrono::duration<double>(Clock::now() - start).count(), kOracleBudgetSeconds);
}

data::DatasetManifest synthetic_train_set(const test::TempDir& dir, std::size_t per_class, std::size_t size) {
  test::write_two_class_tree(dir / "data", per_class, size);
  data::DatasetManifest m = data::load_manifest(dir / "data", {"dark", "bright"}).manifest;
  for (auto& r : m.records) r.split = data::Split::kTrain;
  return m;
}

RunConfig desk_config(std::size_t epochs) {
  RunConfig c;
  c.classes = {"dark", "bright"};
  c.network.input_height = c.network.input_width = 64;
  c.network.width_scale = WidthScale{1, 8};
  c.batch_size = 8;
  c.epochs = epochs;
  c.seed = 1;
  c.adam.learning_rate = 1e-3;
  return c;
}

Outcome overfit_sanity() {
  test::TempDir dir("overfit");
  const auto manifest = synthetic_train_set(dir, 8, 64);
  RunConfig config = desk_config(kOverfitMaxSteps / 2);
  config.augment = false;
  TrainOptions options;
  options.max_steps = kOverfitMaxSteps;
  options.stop_at_perfect_train = true;
  const auto start = Clock::now();
  const TrainResult result = train(config, manifest, dir / "m.ckpt", dir / "log.csv", options);
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  const double accuracy = result.train_accuracy.value_or(0.0);
  std::ostringstream detail;
  detail << "16 images, width 1/8, 64x64: train accuracy " << std::fixed << std::setprecision(2)
         << 100.0 * accuracy << "% after " << result.steps << " steps (limit " << kOverfitMaxSteps << ")";
  return within({accuracy == 1.0 && result.steps <= kOverfitMaxSteps, detail.str()}, seconds,
                kOverfitBudgetSeconds);
}

Outcome determinism() {
  test::TempDir dir("determinism");
  auto manifest = synthetic_train_set(dir, 6, 32);
  manifest = data::split_manifest(manifest, data::SplitRatios{}, 5);
  data::write_manifest_csv(dir / "manifest.csv", manifest);
  RunConfig config = desk_config(2);
  config.manifest = (dir / "manifest.csv").string();
  {
    std::ofstream out(dir / "run.cfg");
    out << config.serialize();
  }
  std::ostringstream sink;
  const int a = cmd_train({dir / "run.cfg", {}, dir / "a.ckpt", dir / "a.csv"}, sink, sink);
  const int b = cmd_train({dir / "run.cfg", {}, dir / "b.ckpt", dir / "b.csv"}, sink, sink);
  const std::string bytes_a = test::read_file(dir / "a.ckpt");
  const bool same_ckpt = a == 0 && b == 0 && !bytes_a.empty() && bytes_a == test::read_file(dir / "b.ckpt");
  const bool same_log = test::read_file(dir / "a.csv") == test::read_file(dir / "b.csv");

  const auto image = test::random_tensor<float>({64, 48, 3}, 11, 0.0, 1.0);
  bool same_aug = true;
  for (std::uint64_t s = 0; s < 20; ++s) {
    RngStream r1(s, 77), r2(s, 77);
    const auto x = data::augment(image, data::AugmentSpec{}, r1);
    const auto y = data::augment(image, data::AugmentSpec{}, r2);
    same_aug = same_aug && std::equal(x.data().begin(), x.data().end(), y.data().begin());
  }
  std::ostringstream detail;
  detail << "two augmented training runs: checkpoints " << (same_ckpt ? "identical" : "DIFFER") << " ("
         << bytes_a.size() << " bytes), logs " << (same_log ? "identical" : "DIFFER")
         << "; 20 augmentation streams " << (same_aug ? "identical" : "DIFFER");
  return {same_ckpt && same_log && same_aug, detail.str()};
}

Outcome checkpoint_round_trip() {
  test::TempDir dir("roundtrip");
  CNetConfig config = desk_config(1).network;
  CNetModel model = build_cnet(config, 21);
  auto state = AdamState<float>::for_parameters(model.parameters());
  {
    // One real step so the moments are non-trivial.
    const auto x = test::random_tensor<float>({2, 64, 64, 3}, 22, 0.0, 1.0);
    const auto y = tensor_new<float>({2, 2}, {1, 0, 0, 1});
    RngStream rng(23);
    Tape<float> tape;
    backward(bce_loss(model.forward(x, Mode::kTrain, rng, &tape), y, &tape), tape);
    adam_step(model.parameters(), state);
  }
  const auto probe = test::random_tensor<float>({4, 64, 64, 3}, 24, 0.0, 1.0);
  const auto before = model.predict(probe);
  save_checkpoint(dir / "m.ckpt", model, state);
  const auto loaded = load_checkpoint(dir / "m.ckpt", &config);
  const auto after = loaded.model.predict(probe);
  const bool same = std::equal(before.data().begin(), before.data().end(), after.data().begin());
  bool moments = loaded.optimizer.step_count == state.step_count;
  for (std::size_t i = 0; i < state.first_moment.size(); ++i) {
    moments = moments && std::ranges::equal(state.first_moment[i].data(), loaded.optimizer.first_moment[i].data()) &&
              std::ranges::equal(state.second_moment[i].data(), loaded.optimizer.second_moment[i].data());
  }
  std::ostringstream detail;
  detail << "eval forward of 4 images " << (same ? "bit-identical" : "DIFFERS") << ", Adam moments "
         << (moments ? "bit-identical" : "DIFFER");
  return {same && moments, detail.str()};
}

Outcome mutation_detection() {
  std::ostringstream conv, mcc, sink;
  const int conv_exit = cmd_verify({true, "conv-sign"}, conv, sink);
  const int mcc_exit = cmd_verify({true, "mcc-swap"}, mcc, sink);
  const bool conv_caught = conv_exit == exit_code::kFailure && conv.str().find("FAIL grad.conv3x3") != std::string::npos;
  const bool mcc_caught =
      mcc_exit == exit_code::kFailure && mcc.str().find("FAIL metric_reconstruction") != std::string::npos;
  std::ostringstream detail;
  detail << "conv backward sign flip -> exit " << conv_exit << (conv_caught ? " (caught)" : " (MISSED)")
         << "; MCC FP/FN swap -> exit " << mcc_exit << (mcc_caught ? " (caught)" : " (MISSED)");
  return {conv_caught && mcc_caught, detail.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"gradient_correctness", gradient_correctness},
      {"shape_oracle", [] { return timed_oracle(shape_oracle_check); }},
      {"parameter_count", [] { return from_check(parameter_count_check()); }},
      {"metric_reconstruction", [] { return timed_oracle([] { return metric_reconstruction_check(); }); }},
      {"metric_oracle_equivalence", [] { return from_check(metric_oracle_check()); }},
      {"overfit_sanity", overfit_sanity},
      {"determinism", determinism},
      {"split_arithmetic", [] { return from_check(split_check()); }},
      {"checkpoint_round_trip", checkpoint_round_trip},
      {"mutation_detection", mutation_detection},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.passed ? "PASS " : "FAIL ") << c.name << ": " << o.detail << std::endl;
    failed += o.passed ? 0 : 1;
  }
  std::cout << criteria.size() - failed << '/' << criteria.size() << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
