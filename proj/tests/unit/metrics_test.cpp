#include <gtest/gtest.h>

#include <cmath>
#include <json.hpp>

#include "cnet/error.hpp"
#include "cnet/metrics.hpp"
#include "cnet/report.hpp"
#include "cnet/rng.hpp"
#include "test_util.hpp"

using namespace cnet;

namespace {

ConfusionMatrix one(float p0, float p1, int label) {
  const auto p = tensor_new<float>({1, 2}, {p0, p1});
  const auto y = tensor_new<float>({1, 2}, {label == 0 ? 1.0f : 0.0f, label == 1 ? 1.0f : 0.0f});
  return accumulate(p, y);
}

double pct(const std::optional<double>& v) { return 100.0 * v.value(); }

}  // namespace

TEST(Accumulate, Examples) {
  EXPECT_EQ(one(0.2f, 0.9f, 1), (ConfusionMatrix{1, 0, 0, 0}));
  EXPECT_EQ(one(0.9f, 0.2f, 1), (ConfusionMatrix{0, 0, 0, 1}));
  EXPECT_EQ(one(0.5f, 0.5f, 0), (ConfusionMatrix{0, 1, 0, 0}));
  EXPECT_EQ(one(0.7f, 0.8f, 0), (ConfusionMatrix{0, 0, 1, 0}));
  EXPECT_THROW(accumulate(Tensor<float>::zeros({2, 2}), Tensor<float>::zeros({2, 3})), Error);
}

TEST(Accumulate, MergesOverBatches) {
  const auto p = test::random_tensor<double>({50, 2}, 1, 0.0, 1.0);
  std::vector<double> y(100, 0.0);
  RngStream rng(2);
  for (std::size_t i = 0; i < 50; ++i) y[2 * i + rng.below(2)] = 1.0;
  const Tensor<double> labels({50, 2}, y);
  const auto whole = accumulate(p, labels);
  ConfusionMatrix merged;
  for (std::size_t start = 0; start < 50; start += 10) {
    const Tensor<double> ps({10, 2}, std::vector<double>(p.data().begin() + 2 * start, p.data().begin() + 2 * start + 20));
    const Tensor<double> ys({10, 2}, std::vector<double>(y.begin() + 2 * start, y.begin() + 2 * start + 20));
    merged += accumulate(ps, ys);
  }
  EXPECT_EQ(whole, merged);
  EXPECT_EQ(whole.total(), 50u);
}

TEST(Metrics, Published40X) {
  const auto r = compute_metrics({205, 92, 2, 0});
  EXPECT_NEAR(pct(r.accuracy), 99.33, 0.01);
  EXPECT_NEAR(pct(r.precision_ppv), 99.03, 0.01);
  EXPECT_NEAR(pct(r.npv), 100.0, 0.01);
  EXPECT_NEAR(pct(r.recall_sensitivity), 100.0, 0.01);
  EXPECT_NEAR(pct(r.specificity), 97.87, 0.01);
  EXPECT_NEAR(pct(r.f1), 99.51, 0.01);
  EXPECT_NEAR(pct(r.mcc), 98.45, 0.01);
}

TEST(Metrics, PublishedNctVsVt) {
  const auto r = compute_metrics({37, 44, 0, 2});
  EXPECT_EQ(r.confusion.total(), 83u);
  EXPECT_NEAR(pct(r.precision_ppv), 100.0, 0.01);
  EXPECT_NEAR(pct(r.recall_sensitivity), 94.87, 0.01);
  EXPECT_NEAR(pct(r.f1), 97.37, 0.01);
}

TEST(Metrics, PerfectAndSymmetric) {
  for (std::uint64_t k : {1u, 5u, 1000u}) {
    const auto r = compute_metrics({k, k, 0, 0});
    for (const auto& v : {r.accuracy, r.precision_ppv, r.npv, r.recall_sensitivity, r.specificity, r.f1, r.mcc}) {
      EXPECT_EQ(v.value(), 1.0);
    }
  }
  const auto r = compute_metrics({1, 1, 1, 1});
  EXPECT_EQ(r.mcc.value(), 0.0);
  EXPECT_EQ(r.accuracy.value(), 0.5);
}

TEST(Metrics, UndefinedInsteadOfNaN) {
  const auto r = compute_metrics({0, 5, 0, 0});
  EXPECT_EQ(r.accuracy.value(), 1.0);
  EXPECT_FALSE(r.precision_ppv);
  EXPECT_FALSE(r.recall_sensitivity);
  EXPECT_FALSE(r.f1);
  EXPECT_FALSE(r.mcc);
  EXPECT_EQ(r.specificity.value(), 1.0);
  EXPECT_THROW(compute_metrics({}), Error);
}

TEST(Metrics, LabelSwapProperty) {
  for (std::uint64_t tp = 0; tp <= 6; ++tp)
    for (std::uint64_t tn = 0; tn <= 6; ++tn)
      for (std::uint64_t fp = 0; fp <= 6; ++fp)
        for (std::uint64_t fn = 0; fn <= 6; ++fn) {
          if (tp + tn + fp + fn == 0) continue;
          const auto a = compute_metrics({tp, tn, fp, fn});
          const auto b = compute_metrics({tn, tp, fn, fp});
          EXPECT_EQ(a.accuracy, b.accuracy);
          EXPECT_EQ(a.mcc.has_value(), b.mcc.has_value());
          if (a.mcc) {
            EXPECT_NEAR(*a.mcc, *b.mcc, 1e-15);
            EXPECT_GE(*a.mcc, -1.0);
            EXPECT_LE(*a.mcc, 1.0);
            EXPECT_EQ(*a.mcc == 1.0, fp == 0 && fn == 0 && tp > 0 && tn > 0);
          }
          EXPECT_EQ(a.precision_ppv, b.npv);
          EXPECT_EQ(a.recall_sensitivity, b.specificity);
        }
}

TEST(Report, RoundHalfEven) {
  EXPECT_EQ(round_percent(0.993375), 99.34);
  EXPECT_EQ(round_percent(0.5), 50.0);
  EXPECT_EQ(round_percent(0.123449), 12.34);
}

TEST(Report, AverageOfFourGroups) {
  std::map<std::string, MetricReport> reports;
  const std::pair<const char*, std::uint64_t> groups[] = {{"40X", 9933}, {"100X", 9872}, {"200X", 9967}, {"400X", 9963}};
  for (const auto& [name, correct] : groups) reports[name] = compute_metrics({correct, 0, 10000 - correct, 0});
  const auto rows = build_report(reports);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows.back().group, "Average");
  EXPECT_EQ(rows.back().percent.at("accuracy").value(), 99.34);
  EXPECT_EQ(rows.back().confusion.total(), 40000u);
}

TEST(Report, SingleGroupAverageEqualsRow) {
  const std::map<std::string, MetricReport> reports{{"all", compute_metrics({4, 4, 0, 0})}};
  const auto rows = build_report(reports);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].percent, rows[1].percent);
  EXPECT_TRUE(rows[1].partial.empty());
}

TEST(Report, UndefinedEntriesAreSkippedAndFlagged) {
  const std::map<std::string, MetricReport> reports{{"a", compute_metrics({0, 5, 0, 0})},
                                                    {"b", compute_metrics({3, 1, 1, 0})}};
  const auto rows = build_report(reports);
  EXPECT_EQ(rows.back().percent.at("precision").value(), 75.0);
  EXPECT_NE(std::find(rows.back().partial.begin(), rows.back().partial.end(), "precision"),
            rows.back().partial.end());
  const std::string csv = render_report(reports, ReportFormat::kCsv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "group,tp,tn,fp,fn,accuracy,precision,npv,recall,specificity,f1,mcc,partial");
  EXPECT_NE(csv.find("a,0,5,0,0,100.00,,100.00,,100.00,,,\n"), std::string::npos);
}

TEST(Report, JsonMirrorsCsv) {
  const std::map<std::string, MetricReport> reports{{"40X", compute_metrics({205, 92, 2, 0})}};
  const auto doc = nlohmann::json::parse(render_report(reports, ReportFormat::kJson));
  ASSERT_EQ(doc["rows"].size(), 2u);
  EXPECT_EQ(doc["rows"][0]["group"], "40X");
  EXPECT_EQ(doc["rows"][0]["tp"], 205);
  EXPECT_EQ(doc["rows"][0]["mcc"], 98.45);
  EXPECT_EQ(doc["rows"][1]["group"], "Average");
}

TEST(Report, EmitErrors) {
  const std::map<std::string, MetricReport> reports{{"a", compute_metrics({1, 1, 0, 0})}};
  EXPECT_THROW(emit_report(reports, ReportFormat::kCsv, "/nonexistent/dir/report.csv"), Error);
  EXPECT_THROW(emit_report({}, ReportFormat::kCsv, "report.csv"), Error);
}
