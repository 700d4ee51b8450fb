#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "app/commands.hpp"
#include "app/run_config.hpp"
#include "cnet/checkpoint.hpp"
#include "cnet/data/image.hpp"
#include "cnet/error.hpp"
#include "test_util.hpp"

using namespace cnet;
using namespace cnet::app;

namespace {

std::string small_run_config(const test::TempDir& dir, std::size_t epochs, const std::string& extra = "") {
  std::ostringstream text;
  text << "# desk-scale run\n"
       << "classes = dark,bright\n"
       << "input_height=64\ninput_width=64\nwidth_scale=1/8\n"
       << "batch_size=8\nepochs=" << epochs << "\nseed=3\nlearning_rate=0.001\n"
       << "manifest=" << (dir / "manifest.csv").string() << '\n'
       << "checkpoint=" << (dir / "model.ckpt").string() << '\n'
       << "log=" << (dir / "log.csv").string() << '\n'
       << extra;
  return text.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

int split_tree(const test::TempDir& dir, std::size_t per_class) {
  test::write_two_class_tree(dir / "data", per_class, 24);
  SplitArgs args;
  args.data_dir = dir / "data";
  args.classes = "dark,bright";
  args.seed = 7;
  args.out = dir / "manifest.csv";
  std::ostringstream out, err;
  return cmd_split(args, out, err);
}

// Predicts class 1 for every image.
Tensor<float> always_positive(const Tensor<float>& images) {
  const std::size_t b = images.dim(0);
  std::vector<float> v(2 * b);
  for (std::size_t i = 0; i < b; ++i) v[2 * i] = 0.1f, v[2 * i + 1] = 0.9f;
  return Tensor<float>({b, 2}, v);
}

}  // namespace

TEST(RunConfig, ParseSerializeRoundTrip) {
  test::TempDir dir("cfg");
  const RunConfig a = RunConfig::parse(small_run_config(dir, 4, "augment=false\nreport_format=json\n"));
  EXPECT_EQ(a.classes[1], "bright");
  EXPECT_EQ(a.network.width_scale, (WidthScale{1, 8}));
  EXPECT_FALSE(a.augment);
  const RunConfig b = RunConfig::parse(a.serialize());
  EXPECT_EQ(a, b);
  EXPECT_EQ(b.serialize(), RunConfig::parse(b.serialize()).serialize());
  EXPECT_EQ(RunConfig{}.serialize(), RunConfig::parse(RunConfig{}.serialize()).serialize());
}

TEST(RunConfig, RejectsUnknownAndMalformed) {
  EXPECT_THROW(RunConfig::parse("epochz=3\n"), Error);
  EXPECT_THROW(RunConfig::parse("epochs\n"), Error);
  EXPECT_THROW(RunConfig::parse("epochs=3\nepochs=4\n"), Error);
  EXPECT_THROW(RunConfig::parse("augment=maybe\n"), Error);
  EXPECT_THROW(RunConfig::parse("classes=a\n"), Error);
  EXPECT_THROW(RunConfig::parse("batch_size=0\n").validate(), Error);
}

TEST(CmdSplit, WritesManifestAndTable) {
  test::TempDir dir("split");
  test::write_two_class_tree(dir / "data", 10, 16);
  SplitArgs args;
  args.data_dir = dir / "data";
  args.classes = "dark,bright";
  args.seed = 7;
  args.out = dir / "a.csv";
  std::ostringstream out, err;
  ASSERT_EQ(cmd_split(args, out, err), exit_code::kOk) << err.str();
  EXPECT_NE(out.str().find("total"), std::string::npos);
  EXPECT_NE(out.str().find("20     14      2      4"), std::string::npos) << out.str();
  args.out = dir / "b.csv";
  ASSERT_EQ(cmd_split(args, out, err), exit_code::kOk);
  EXPECT_EQ(test::read_file(dir / "a.csv"), test::read_file(dir / "b.csv"));
}

TEST(CmdSplit, FailuresExitTwoWithoutOutput) {
  test::TempDir dir("split");
  SplitArgs args;
  args.data_dir = dir / "missing";
  args.out = dir / "m.csv";
  std::ostringstream out, err;
  EXPECT_EQ(cmd_split(args, out, err), exit_code::kBadInput);
  EXPECT_FALSE(std::filesystem::exists(args.out));
  EXPECT_NE(err.str().find("error"), std::string::npos);

  test::write_two_class_tree(dir / "tiny", 2, 8);
  args.data_dir = dir / "tiny";
  args.classes = "dark,bright";
  EXPECT_EQ(cmd_split(args, out, err), exit_code::kBadInput);
  EXPECT_FALSE(std::filesystem::exists(args.out));

  std::filesystem::create_directories(dir / "half" / "dark");
  test::write_two_class_tree(dir / "other", 3, 8);
  std::filesystem::rename(dir / "other" / "bright", dir / "half" / "bright");
  args.data_dir = dir / "half";
  EXPECT_EQ(cmd_split(args, out, err), exit_code::kBadInput);
}

TEST(CmdTrain, ZeroEpochsWritesInitialWeights) {
  test::TempDir dir("train");
  ASSERT_EQ(split_tree(dir, 6), exit_code::kOk);
  write_text(dir / "run.cfg", small_run_config(dir, 0));
  std::ostringstream out, err;
  ASSERT_EQ(cmd_train(TrainArgs{dir / "run.cfg", {}, {}, {}}, out, err), exit_code::kOk) << err.str();
  EXPECT_EQ(test::read_file(dir / "log.csv"), "epoch,train_loss,val_loss,val_accuracy\n");
  const auto ckpt = load_checkpoint(dir / "model.ckpt");
  const auto fresh = build_cnet(ckpt.config, 3);
  for (std::size_t i = 0; i < fresh.parameters().size(); ++i) {
    const auto a = fresh.parameters()[i].value.data();
    const auto b = ckpt.model.parameters()[i].value.data();
    ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  EXPECT_EQ(ckpt.metadata.at("classes"), "dark,bright");
}

TEST(CmdTrain, RepeatRunsAreBitIdentical) {
  test::TempDir dir("train");
  ASSERT_EQ(split_tree(dir, 6), exit_code::kOk);
  write_text(dir / "run.cfg", small_run_config(dir, 2));
  std::ostringstream out, err;
  ASSERT_EQ(cmd_train(TrainArgs{dir / "run.cfg", {}, dir / "a.ckpt", dir / "a.csv"}, out, err), exit_code::kOk)
      << err.str();
  ASSERT_EQ(cmd_train(TrainArgs{dir / "run.cfg", {}, dir / "b.ckpt", dir / "b.csv"}, out, err), exit_code::kOk);
  EXPECT_EQ(test::read_file(dir / "a.ckpt"), test::read_file(dir / "b.ckpt"));
  EXPECT_EQ(test::read_file(dir / "a.csv"), test::read_file(dir / "b.csv"));

  std::istringstream log(test::read_file(dir / "a.csv"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) ++lines;
  EXPECT_EQ(lines, 3u);
}

TEST(CmdTrain, ErrorExitCodes) {
  test::TempDir dir("train");
  ASSERT_EQ(split_tree(dir, 6), exit_code::kOk);
  write_text(dir / "run.cfg", small_run_config(dir, 0));
  std::ostringstream out, err;
  EXPECT_EQ(cmd_train(TrainArgs{dir / "run.cfg", {}, "/nonexistent/dir/m.ckpt", {}}, out, err),
            exit_code::kCheckpointIo);

  RunConfig diverge = RunConfig::parse(small_run_config(dir, 3, "augment=false\n"));
  diverge.adam.learning_rate = 1e38;
  write_text(dir / "diverge.cfg", diverge.serialize());
  EXPECT_EQ(cmd_train(TrainArgs{dir / "diverge.cfg", {}, {}, {}}, out, err), exit_code::kNonFinite) << err.str();

  write_text(dir / "bad.cfg", "unknown_key=1\n");
  EXPECT_EQ(cmd_train(TrainArgs{dir / "bad.cfg", {}, {}, {}}, out, err), exit_code::kBadInput);
}

TEST(CmdEval, DegenerateClassifier) {
  test::TempDir dir("eval");
  data::write_png(dir / "x.png", test::solid_image(4, 4, 1, 2, 3));
  data::DatasetManifest m;
  m.class_names = {"neg", "pos"};
  for (int i = 0; i < 20; ++i) m.records.push_back({(dir / "x.png").string(), i < 10 ? 1 : 0, "all", data::Split::kTest});
  data::BatchOptions options;
  options.height = options.width = 4;
  std::ostringstream out, err;
  ASSERT_EQ(run_eval(always_positive, m, options, ReportFormat::kCsv, dir / "r.csv", out, err), exit_code::kOk);
  const std::string report = test::read_file(dir / "r.csv");
  EXPECT_NE(report.find("all,10,0,10,0,50.00,50.00,,100.00,0.00,66.67,,"), std::string::npos) << report;
}

TEST(CmdEval, InjectedStreamReproducesPublishedColumn) {
  test::TempDir dir("eval");
  data::write_png(dir / "x.png", test::solid_image(2, 2, 0, 0, 0));
  data::DatasetManifest m;
  m.class_names = {"benign", "malignant"};
  // 205 malignant and 2 benign predicted malignant, 92 benign predicted benign.
  std::vector<int> labels, predicted;
  for (int i = 0; i < 205; ++i) labels.push_back(1), predicted.push_back(1);
  for (int i = 0; i < 92; ++i) labels.push_back(0), predicted.push_back(0);
  for (int i = 0; i < 2; ++i) labels.push_back(0), predicted.push_back(1);
  for (int label : labels) m.records.push_back({(dir / "x.png").string(), label, "40X", data::Split::kTest});
  std::size_t cursor = 0;
  const Predictor stream = [&](const Tensor<float>& images) {
    std::vector<float> v;
    for (std::size_t i = 0; i < images.dim(0); ++i, ++cursor) {
      v.push_back(predicted[cursor] == 0 ? 0.8f : 0.3f);
      v.push_back(predicted[cursor] == 1 ? 0.8f : 0.3f);
    }
    return Tensor<float>({images.dim(0), 2}, v);
  };
  data::BatchOptions options;
  options.height = options.width = 2;
  std::ostringstream out, err;
  ASSERT_EQ(run_eval(stream, m, options, ReportFormat::kCsv, dir / "r.csv", out, err), exit_code::kOk);
  EXPECT_NE(test::read_file(dir / "r.csv").find("40X,205,92,2,0,99.33,99.03,100.00,100.00,97.87,99.51,98.45,"),
            std::string::npos);
}

TEST(CmdEval, EmptyTestSplitAndMismatch) {
  test::TempDir dir("eval");
  ASSERT_EQ(split_tree(dir, 6), exit_code::kOk);
  write_text(dir / "run.cfg", small_run_config(dir, 0));
  std::ostringstream out, err;
  ASSERT_EQ(cmd_train(TrainArgs{dir / "run.cfg", {}, {}, {}}, out, err), exit_code::kOk);

  EvalArgs args;
  args.checkpoint = dir / "model.ckpt";
  args.manifest = dir / "manifest.csv";
  args.report_out = dir / "report.json";
  args.format = "json";
  ASSERT_EQ(cmd_eval(args, out, err), exit_code::kOk) << err.str();
  EXPECT_NE(test::read_file(dir / "report.json").find("\"Average\""), std::string::npos);

  write_text(dir / "wide.cfg", RunConfig::parse(small_run_config(dir, 0)).serialize());
  {
    auto c = RunConfig::load(dir / "wide.cfg");
    c.network.input_height = c.network.input_width = 96;
    write_text(dir / "wide.cfg", c.serialize());
  }
  args.config = dir / "wide.cfg";
  EXPECT_EQ(cmd_eval(args, out, err), exit_code::kConfigMismatch);

  // Keep only train/val rows.
  std::istringstream in(test::read_file(dir / "manifest.csv"));
  std::string line, kept;
  while (std::getline(in, line)) {
    if (!line.ends_with(",test")) kept += line + "\n";
  }
  write_text(dir / "notest.csv", kept);
  args.config.reset();
  args.manifest = dir / "notest.csv";
  std::ostringstream err2;
  EXPECT_EQ(cmd_eval(args, out, err2), exit_code::kEmptyMatrix);
  EXPECT_NE(err2.str().find("EmptyMatrix"), std::string::npos) << err2.str();
}

TEST(CmdTrain, ScansDataDirWithoutManifest) {
  test::TempDir dir("datadir");
  test::write_two_class_tree(dir / "data", 6, 24);
  std::ostringstream text;
  text << "classes=dark,bright\ninput_height=64\ninput_width=64\nwidth_scale=1/8\n"
       << "batch_size=4\nepochs=1\nseed=3\naugment=false\n"
       << "data_dir=" << (dir / "data").string() << '\n'
       << "checkpoint=" << (dir / "model.ckpt").string() << '\n'
       << "log=" << (dir / "log.csv").string() << '\n'
       << "report=" << (dir / "report.json").string() << '\n'
       << "report_format=json\n";
  write_text(dir / "run.cfg", text.str());
  std::ostringstream out, err;
  ASSERT_EQ(cmd_train(TrainArgs{dir / "run.cfg", {}, {}, {}}, out, err), exit_code::kOk) << err.str();
  EXPECT_EQ(test::read_file(dir / "log.csv").substr(0, 5), "epoch");

  // eval takes the report path and format from the config.
  SplitArgs split;
  split.data_dir = dir / "data";
  split.classes = "dark,bright";
  split.seed = 3;
  split.out = dir / "manifest.csv";
  ASSERT_EQ(cmd_split(split, out, err), exit_code::kOk);
  EvalArgs args;
  args.checkpoint = dir / "model.ckpt";
  args.manifest = dir / "manifest.csv";
  args.config = dir / "run.cfg";
  ASSERT_EQ(cmd_eval(args, out, err), exit_code::kOk) << err.str();
  EXPECT_EQ(test::read_file(dir / "report.json").substr(0, 1), "{");
}

TEST(CmdTrain, NeedsManifestOrDataDir) {
  test::TempDir dir("nodata");
  write_text(dir / "run.cfg", "checkpoint=" + (dir / "m.ckpt").string() + "\nlog=" + (dir / "l.csv").string() + "\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_train(TrainArgs{dir / "run.cfg", {}, {}, {}}, out, err), exit_code::kBadInput);
  EXPECT_NE(err.str().find("data_dir"), std::string::npos) << err.str();
}

TEST(CmdPredict, DeterministicAcrossReencode) {
  test::TempDir dir("predict");
  ASSERT_EQ(split_tree(dir, 6), exit_code::kOk);
  write_text(dir / "run.cfg", small_run_config(dir, 0));
  std::ostringstream sink, err;
  ASSERT_EQ(cmd_train(TrainArgs{dir / "run.cfg", {}, {}, {}}, sink, err), exit_code::kOk);

  const auto image = test::noise_image(50, 40, 9);
  data::write_png(dir / "a.png", image);
  data::write_png(dir / "b.png", data::read_image(dir / "a.png"));
  std::ostringstream first, second, reencoded;
  ASSERT_EQ(cmd_predict({dir / "model.ckpt", dir / "a.png"}, first, err), exit_code::kOk) << err.str();
  ASSERT_EQ(cmd_predict({dir / "model.ckpt", dir / "a.png"}, second, err), exit_code::kOk);
  ASSERT_EQ(cmd_predict({dir / "model.ckpt", dir / "b.png"}, reencoded, err), exit_code::kOk);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(first.str(), reencoded.str());

  std::istringstream lines(first.str());
  std::string word, name;
  lines >> word >> name;
  EXPECT_EQ(word, "class");
  for (int i = 0; i < 2; ++i) {
    double activation = -1;
    lines >> name >> activation;
    EXPECT_GE(activation, 0.0);
    EXPECT_LE(activation, 1.0);
  }

  std::ofstream(dir / "junk.png") << "junk";
  EXPECT_EQ(cmd_predict({dir / "model.ckpt", dir / "junk.png"}, sink, err), exit_code::kBadInput);
}

TEST(CmdVerify, FastPassesAndMutationsFail) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_verify({true, "none"}, out, err), exit_code::kOk) << out.str();
  std::ostringstream conv;
  EXPECT_EQ(cmd_verify({true, "conv-sign"}, conv, err), exit_code::kFailure);
  EXPECT_NE(conv.str().find("FAIL grad.conv3x3"), std::string::npos);
  std::ostringstream mcc;
  EXPECT_EQ(cmd_verify({true, "mcc-swap"}, mcc, err), exit_code::kFailure);
  EXPECT_NE(mcc.str().find("FAIL metric_reconstruction"), std::string::npos);
}
