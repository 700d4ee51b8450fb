#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <set>

#include "cnet/data/augment.hpp"
#include "cnet/data/batch.hpp"
#include "cnet/data/image.hpp"
#include "cnet/data/manifest.hpp"
#include "cnet/error.hpp"
#include "test_util.hpp"

using namespace cnet;
using namespace cnet::data;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no cnet::Error thrown";
  return ErrorCode::kIoError;
}

const std::filesystem::path kFixtures = CNET_TEST_DATA_DIR;

void write_tree(const std::filesystem::path& root, const std::string& cls, const std::string& group, int count,
                std::uint8_t value) {
  const auto dir = group.empty() ? root / cls : root / cls / group;
  std::filesystem::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    write_png(dir / ("img" + std::to_string(i) + ".png"), test::solid_image(6, 4, value, value, value));
  }
}

DatasetManifest synthetic_manifest(std::size_t per_class, const std::string& group = "g") {
  DatasetManifest m;
  m.class_names = {"neg", "pos"};
  for (int label = 0; label < 2; ++label) {
    for (std::size_t i = 0; i < per_class; ++i) {
      m.records.push_back({group + "/" + std::to_string(label) + "/" + std::to_string(i), label, group});
    }
  }
  return m;
}

}  // namespace

TEST(Image, PngRoundTrip) {
  test::TempDir dir("img");
  const auto image = test::noise_image(13, 7, 1);
  write_png(dir / "a.png", image);
  const auto back = read_image(dir / "a.png");
  EXPECT_EQ(back.width, 13u);
  EXPECT_EQ(back.height, 7u);
  EXPECT_EQ(back.pixels, image.pixels);
  EXPECT_TRUE(is_decodable_image(dir / "a.png"));
}

TEST(Image, JpegDecodes) {
  const auto image = read_image(kFixtures / "solid_8x6.jpg");
  EXPECT_EQ(image.width, 8u);
  EXPECT_EQ(image.height, 6u);
  EXPECT_NEAR(image.at(3, 4, 0), 200, 2);
  EXPECT_NEAR(image.at(3, 4, 1), 40, 2);
  EXPECT_NEAR(image.at(3, 4, 2), 90, 2);
}

TEST(Image, UnreadableFiles) {
  test::TempDir dir("img");
  std::ofstream(dir / "junk.png") << "not an image";
  EXPECT_EQ(code_of([&] { read_image(dir / "junk.png"); }), ErrorCode::kUnreadableImage);
  EXPECT_EQ(code_of([&] { read_image(dir / "missing.png"); }), ErrorCode::kUnreadableImage);
  EXPECT_FALSE(is_decodable_image(dir / "junk.png"));
}

TEST(Resize, ConstantGrayStaysConstant) {
  const auto t = resize_to_tensor(test::solid_image(700, 460, 128, 128, 128), 224, 224);
  EXPECT_EQ(t.shape(), Shape({224, 224, 3}));
  for (float v : t.data()) EXPECT_NEAR(v, 128.0f / 255.0f, 1e-6);
}

TEST(Resize, LargeInputAndRange) {
  const auto t = resize_to_tensor(test::noise_image(1024, 1024, 2), 375, 375);
  EXPECT_EQ(t.shape(), Shape({375, 375, 3}));
  const auto [lo, hi] = std::minmax_element(t.data().begin(), t.data().end());
  EXPECT_GE(*lo, 0.0f);
  EXPECT_LE(*hi, 1.0f);
}

TEST(Resize, SameSizeIsExactScaling) {
  const auto image = test::noise_image(9, 5, 3);
  const auto t = resize_to_tensor(image, 5, 9);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    EXPECT_FLOAT_EQ(t.item(i), static_cast<float>(image.pixels[i]) / 255.0f);
  }
}

TEST(Manifest, TwoAndThree) {
  test::TempDir dir("manifest");
  write_tree(dir.path(), "benign", "", 2, 10);
  write_tree(dir.path(), "malignant", "", 3, 200);
  const auto result = load_manifest(dir.path(), {"benign", "malignant"});
  ASSERT_EQ(result.manifest.records.size(), 5u);
  std::vector<int> labels;
  for (const auto& r : result.manifest.records) {
    labels.push_back(r.label);
    EXPECT_EQ(r.group, kDefaultGroup);
  }
  EXPECT_EQ(labels, (std::vector<int>{0, 0, 1, 1, 1}));
  EXPECT_TRUE(std::is_sorted(result.manifest.records.begin(), result.manifest.records.end(),
                             [](const Record& a, const Record& b) { return a.path < b.path; }));
}

TEST(Manifest, GroupsFilterAndExclusions) {
  test::TempDir dir("manifest");
  write_tree(dir.path(), "benign", "40X", 3, 10);
  write_tree(dir.path(), "benign", "100X", 4, 10);
  write_tree(dir.path(), "malignant", "40X", 5, 200);
  write_tree(dir.path(), "malignant", "100X", 6, 200);
  std::ofstream(dir / "malignant" / "40X" / "broken.png") << "garbage";

  const auto all = load_manifest(dir.path(), {"benign", "malignant"});
  EXPECT_EQ(all.manifest.records.size(), 18u);
  EXPECT_EQ(all.skipped.size(), 1u);

  ManifestLoadOptions options;
  options.group_filter = "40X";
  const auto only40 = load_manifest(dir.path(), {"benign", "malignant"}, options);
  EXPECT_EQ(only40.manifest.records.size(), 8u);
  for (const auto& r : only40.manifest.records) EXPECT_EQ(r.group, "40X");

  std::ofstream(dir / "exclude.txt") << "malignant/40X/img0.png\n" << (dir / "benign/40X/img1.png").string() << "\n";
  options.exclusion_list = dir / "exclude.txt";
  const auto excluded = load_manifest(dir.path(), {"benign", "malignant"}, options);
  EXPECT_EQ(excluded.manifest.records.size(), 6u);
}

TEST(Manifest, EmptyOrMissingClass) {
  test::TempDir dir("manifest");
  write_tree(dir.path(), "benign", "", 2, 10);
  std::filesystem::create_directories(dir / "malignant");
  EXPECT_EQ(code_of([&] { load_manifest(dir.path(), {"benign", "malignant"}); }), ErrorCode::kEmptyClass);
  EXPECT_EQ(code_of([&] { load_manifest(dir / "nowhere", {"benign", "malignant"}); }), ErrorCode::kIoError);
}

TEST(Split, FloorRule) {
  const SplitRatios r;
  const auto c100 = split_counts(100, r);
  EXPECT_EQ(c100.train, 70u);
  EXPECT_EQ(c100.val, 15u);
  EXPECT_EQ(c100.test, 15u);
  const auto c625 = split_counts(625, r);
  EXPECT_EQ(c625.train, 437u);
  EXPECT_EQ(c625.val, 93u);
  EXPECT_EQ(c625.test, 95u);
  const auto c1370 = split_counts(1370, r);
  EXPECT_EQ(c1370.train, 959u);
  EXPECT_EQ(c1370.val, 205u);
  EXPECT_EQ(c1370.test, 206u);
  for (std::size_t n = 3; n < 3000; ++n) {
    const auto c = split_counts(n, r);
    ASSERT_EQ(c.train, n * 70 / 100) << n;
    ASSERT_EQ(c.val, n * 15 / 100) << n;
    ASSERT_EQ(c.train + c.val + c.test, n);
  }
}

TEST(Split, RatiosParse) {
  EXPECT_EQ(SplitRatios::parse("0.8,0.1,0.1").train_ppm, 800000u);
  EXPECT_EQ(SplitRatios::parse("0.70,0.15,0.15").to_string(), SplitRatios{}.to_string());
  EXPECT_EQ(code_of([] { SplitRatios::parse("0.7,0.2,0.2"); }), ErrorCode::kConfigInvalid);
  EXPECT_EQ(code_of([] { SplitRatios::parse("0.7,0.3"); }), ErrorCode::kConfigInvalid);
}

TEST(Split, DeterministicPartition) {
  const auto m = synthetic_manifest(100);
  const auto a = split_manifest(m, SplitRatios{}, 7);
  const auto b = split_manifest(m, SplitRatios{}, 7);
  const auto c = split_manifest(m, SplitRatios{}, 8);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.seed, 7u);
  std::map<std::pair<int, Split>, int> ca, cc;
  std::set<std::string> paths;
  bool differs = false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_NE(a.records[i].split, Split::kUnassigned);
    EXPECT_TRUE(paths.insert(a.records[i].path).second);
    ++ca[{a.records[i].label, a.records[i].split}];
    ++cc[{c.records[i].label, c.records[i].split}];
    differs = differs || a.records[i].split != c.records[i].split;
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(ca, cc);
  EXPECT_EQ((ca[{0, Split::kTrain}]), 70);
  EXPECT_EQ((ca[{1, Split::kVal}]), 15);
  EXPECT_EQ((ca[{1, Split::kTest}]), 15);
}

TEST(Split, StratumTooSmall) {
  EXPECT_EQ(code_of([] { split_manifest(synthetic_manifest(2), SplitRatios{}, 1); }), ErrorCode::kStratumTooSmall);
}

TEST(ManifestCsv, RoundTripWithQuoting) {
  test::TempDir dir("csv");
  auto m = split_manifest(synthetic_manifest(5), SplitRatios{}, 3);
  m.records[0].path = "odd, \"name\".png";
  write_manifest_csv(dir / "m.csv", m);
  const auto back = read_manifest_csv(dir / "m.csv", m.class_names);
  EXPECT_EQ(back.records, m.records);
  EXPECT_EQ(test::read_file(dir / "m.csv").substr(0, 23), "path,label,group,split\n");
}

TEST(Augment, DisabledIsIdentity) {
  const auto image = test::random_tensor<float>({12, 10, 3}, 1, 0.0, 1.0);
  RngStream rng(5);
  const auto out = augment(image, AugmentSpec::none(), rng);
  for (std::size_t i = 0; i < image.numel(); ++i) EXPECT_EQ(out.item(i), image.item(i));
}

TEST(Augment, FlipIsInvolution) {
  const auto image = test::random_tensor<float>({7, 9, 3}, 2, 0.0, 1.0);
  for (const bool horizontal : {true, false}) {
    AffineParams p;
    p.flip_horizontal = horizontal;
    p.flip_vertical = !horizontal;
    const auto once = apply_affine(image, p);
    const auto twice = apply_affine(once, p);
    EXPECT_NE(once.item(0), image.item(0));
    for (std::size_t i = 0; i < image.numel(); ++i) ASSERT_EQ(twice.item(i), image.item(i));
  }
  AffineParams h;
  h.flip_horizontal = true;
  const auto flipped = apply_affine(image, h);
  EXPECT_EQ(flipped.item(0), image.item(8 * 3));  // (0,0) <- (0,8)
}

TEST(Augment, FixedStreamIsBitIdenticalAndInRange) {
  const auto image = test::random_tensor<float>({32, 24, 3}, 3, 0.0, 1.0);
  const AugmentSpec spec;
  for (std::uint64_t s = 0; s < 10; ++s) {
    RngStream a(s, 4), b(s, 4);
    const auto x = augment(image, spec, a);
    const auto y = augment(image, spec, b);
    EXPECT_EQ(x.shape(), image.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) {
      ASSERT_EQ(x.item(i), y.item(i));
      ASSERT_GE(x.item(i), 0.0f);
      ASSERT_LE(x.item(i), 1.0f);
    }
  }
}

TEST(Augment, SampledParametersStayInBounds) {
  const AugmentSpec spec;
  RngStream rng(6);
  int hflips = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto p = sample_affine(spec, 100, 200, rng);
    hflips += p.flip_horizontal;
    ASSERT_LE(std::abs(p.shear), 0.2);
    ASSERT_GE(p.zoom, 0.8);
    ASSERT_LE(p.zoom, 1.2);
    ASSERT_LE(std::abs(p.shift_x), 0.2 * 200);
    ASSERT_LE(std::abs(p.shift_y), 0.2 * 100);
    ASSERT_LE(std::abs(p.rotation), 40.0 * std::numbers::pi / 180.0 + 1e-12);
  }
  EXPECT_NEAR(hflips / 2000.0, 0.5, 0.05);
}

TEST(Augment, RejectsNegativeFactors) {
  AugmentSpec spec;
  spec.zoom = -0.1;
  EXPECT_THROW(spec.validate(), Error);
}

TEST(Batch, PartialFinalBatch) {
  test::TempDir dir("batch");
  write_png(dir / "a.png", test::solid_image(4, 4, 0, 0, 0));
  DatasetManifest m;
  m.class_names = {"neg", "pos"};
  for (int i = 0; i < 299; ++i) m.records.push_back({(dir / "a.png").string(), i % 2, "g", Split::kTest});
  BatchOptions options;
  options.height = options.width = 4;
  BatchIterator it(m, Split::kTest, options);
  EXPECT_EQ(it.record_count(), 299u);
  EXPECT_EQ(it.batch_count(), 10u);
  std::vector<std::size_t> sizes;
  while (auto batch = it.next()) {
    sizes.push_back(batch->records.size());
    EXPECT_EQ(batch->images.shape(), Shape({batch->records.size(), 4, 4, 3}));
    for (std::size_t r = 0; r < batch->records.size(); ++r) {
      const int label = batch->records[r]->label;
      EXPECT_EQ(batch->labels.item(2 * r), label == 0 ? 1.0f : 0.0f);
      EXPECT_EQ(batch->labels.item(2 * r + 1), label == 1 ? 1.0f : 0.0f);
    }
  }
  ASSERT_EQ(sizes.size(), 10u);
  EXPECT_EQ(sizes.back(), 11u);
}

TEST(Batch, TrainOrderIsSeededAndAugmentedDeterministically) {
  test::TempDir dir("batch");
  DatasetManifest m;
  m.class_names = {"neg", "pos"};
  for (int i = 0; i < 12; ++i) {
    const auto path = dir / ("i" + std::to_string(i) + ".png");
    write_png(path, test::noise_image(10, 10, i));
    m.records.push_back({path.string(), i % 2, "g", i < 9 ? Split::kTrain : Split::kVal});
  }
  BatchOptions options;
  options.batch_size = 4;
  options.height = options.width = 8;
  options.augment = AugmentSpec{};
  options.seed = 5;
  auto collect = [&](std::size_t epoch) {
    BatchOptions o = options;
    o.epoch = epoch;
    BatchIterator it(m, Split::kTrain, o);
    std::vector<std::string> order;
    std::vector<float> pixels;
    while (auto batch = it.next()) {
      for (const auto* r : batch->records) order.push_back(r->path);
      pixels.insert(pixels.end(), batch->images.data().begin(), batch->images.data().end());
    }
    return std::make_pair(order, pixels);
  };
  const auto first = collect(1);
  EXPECT_EQ(first, collect(1));
  EXPECT_EQ(first.first.size(), 9u);
  EXPECT_NE(first.first, collect(2).first);

  // Validation batches keep manifest order and are never augmented.
  BatchIterator val(m, Split::kVal, options);
  const auto batch = val.next();
  ASSERT_TRUE(batch);
  EXPECT_EQ(batch->records[0]->path, m.records[9].path);
  const auto plain = load_and_resize(m.records[9].path, 8, 8);
  for (std::size_t i = 0; i < plain.numel(); ++i) EXPECT_EQ(batch->images.item(i), plain.item(i));
}

TEST(Batch, UnreadableImagesAreSkipped) {
  test::TempDir dir("batch");
  write_png(dir / "ok.png", test::solid_image(4, 4, 9, 9, 9));
  std::ofstream(dir / "bad.png") << "nope";
  DatasetManifest m;
  m.class_names = {"neg", "pos"};
  m.records = {{(dir / "bad.png").string(), 0, "g", Split::kTest}, {(dir / "ok.png").string(), 1, "g", Split::kTest}};
  BatchOptions options;
  options.height = options.width = 4;
  BatchIterator it(m, Split::kTest, options);
  std::size_t seen = 0;
  while (auto batch = it.next()) seen += batch->records.size();
  EXPECT_EQ(seen, 1u);
  EXPECT_EQ(it.skipped().size(), 1u);
}
