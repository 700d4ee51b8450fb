#include "verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <tuple>
#include <sstream>

#include "cnet/data/manifest.hpp"
#include "cnet/error.hpp"
#include "cnet/grad_check.hpp"
#include "cnet/loss.hpp"
#include "cnet/model.hpp"
#include "cnet/ops.hpp"
#include "cnet/rng.hpp"

namespace cnet::app {
namespace {

using Clock = std::chrono::steady_clock;

std::string fixed(double value, int digits) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << value;
  return out.str();
}

Tensor<double> uniform(const Shape& shape, RngStream& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> values(shape.numel());
  for (auto& v : values) v = lo + (hi - lo) * rng.uniform();
  return Tensor<double>(shape, std::move(values));
}

// Values bounded away from zero so ReLU's kink is never straddled by a probe.
Tensor<double> away_from_zero(const Shape& shape, RngStream& rng) {
  std::vector<double> values(shape.numel());
  for (auto& v : values) {
    do v = 2.0 * rng.uniform() - 1.0;
    while (std::abs(v) < 1e-3);
  }
  return Tensor<double>(shape, std::move(values));
}

// Distinct values 0.05 apart in random order, so no pooling window holds a tie.
Tensor<double> distinct(const Shape& shape, RngStream& rng) {
  std::vector<double> values(shape.numel());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = 0.05 * static_cast<double>(i) - 1.0;
  for (std::size_t i = values.size(); i > 1; --i) std::swap(values[i - 1], values[rng.below(i)]);
  return Tensor<double>(shape, std::move(values));
}

struct LayerCheck {
  std::string name;
  // Returns the worst relative error over every input of one random draw.
  std::function<double(std::uint64_t seed, const ConvOp& conv)> run;
};

double worst(std::initializer_list<double> errors) { return std::max(errors); }

double check_conv(std::uint64_t seed, const ConvOp& conv, std::size_t k) {
  RngStream rng(seed, k);
  Conv2D<double> layer;
  std::size_t batch = 1, cin = 2, cout = 3;
  if (k == 1) {
    batch = 2, cin = 3, cout = 4;
  } else {
    // Cycle through same/valid padding and strides 1/2.
    layer.padding = seed % 3 == 1 ? Padding::kValid : Padding::kSame;
    layer.stride = seed % 3 == 2 ? 2 : 1;
  }
  const Tensor<double> x = uniform({batch, 5, 5, cin}, rng);
  layer.kernel = uniform({k, k, cin, cout}, rng);
  layer.bias = uniform({cout}, rng);
  const std::size_t out = conv_output_extent(5, k, layer.stride, layer.padding);
  const Tensor<double> w = uniform({batch, out, out, cout}, rng);

  const double e_input = grad_check(
      [&](const Tensor<double>& v, Tape<double>* t) { return weighted_sum(conv(v, layer, t), w, t); }, x,
      kGradStep);
  const double e_kernel = grad_check(
      [&](const Tensor<double>& v, Tape<double>* t) {
        Conv2D<double> l = layer;
        l.kernel = v;
        return weighted_sum(conv(x, l, t), w, t);
      },
      layer.kernel, kGradStep);
  const double e_bias = grad_check(
      [&](const Tensor<double>& v, Tape<double>* t) {
        Conv2D<double> l = layer;
        l.bias = v;
        return weighted_sum(conv(x, l, t), w, t);
      },
      layer.bias, kGradStep);
  return worst({e_input, e_kernel, e_bias});
}

std::vector<LayerCheck> layer_checks() {
  std::vector<LayerCheck> checks;
  checks.push_back({"conv3x3", [](std::uint64_t s, const ConvOp& conv) { return check_conv(s, conv, 3); }});
  checks.push_back({"conv1x1", [](std::uint64_t s, const ConvOp& conv) { return check_conv(s, conv, 1); }});
  checks.push_back({"maxpool", [](std::uint64_t s, const ConvOp&) {
                      RngStream rng(s, 10);
                      const Tensor<double> x = distinct({1, 4, 5, 2}, rng);
                      const Tensor<double> w = uniform({1, 2, 2, 2}, rng);
                      return grad_check([&](const Tensor<double>& v,
                                            Tape<double>* t) { return weighted_sum(maxpool2x2(v, t), w, t); },
                                        x, kGradStep);
                    }});
  checks.push_back({"relu", [](std::uint64_t s, const ConvOp&) {
                      RngStream rng(s, 11);
                      const Tensor<double> x = away_from_zero({2, 3, 4}, rng);
                      const Tensor<double> w = uniform({2, 3, 4}, rng);
                      return grad_check(
                          [&](const Tensor<double>& v, Tape<double>* t) { return weighted_sum(relu(v, t), w, t); }, x,
                          kGradStep);
                    }});
  checks.push_back({"sigmoid", [](std::uint64_t s, const ConvOp&) {
                      RngStream rng(s, 12);
                      const Tensor<double> x = uniform({2, 5}, rng, -4.0, 4.0);
                      const Tensor<double> w = uniform({2, 5}, rng);
                      return grad_check([&](const Tensor<double>& v,
                                            Tape<double>* t) { return weighted_sum(sigmoid(v, t), w, t); },
                                        x, kGradStep);
                    }});
  checks.push_back({"dense", [](std::uint64_t s, const ConvOp&) {
                      RngStream rng(s, 13);
                      const Tensor<double> x = uniform({3, 4}, rng);
                      const Dense<double> layer{uniform({4, 2}, rng), uniform({2}, rng)};
                      const Tensor<double> w = uniform({3, 2}, rng);
                      const double e_x = grad_check(
                          [&](const Tensor<double>& v, Tape<double>* t) {
                            return weighted_sum(dense(v, layer, t), w, t);
                          },
                          x, kGradStep);
                      const double e_w = grad_check(
                          [&](const Tensor<double>& v, Tape<double>* t) {
                            return weighted_sum(dense(x, Dense<double>{v, layer.bias}, t), w, t);
                          },
                          layer.weights, kGradStep);
                      const double e_b = grad_check(
                          [&](const Tensor<double>& v, Tape<double>* t) {
                            return weighted_sum(dense(x, Dense<double>{layer.weights, v}, t), w, t);
                          },
                          layer.bias, kGradStep);
                      return worst({e_x, e_w, e_b});
                    }});
  checks.push_back({"dropout", [](std::uint64_t s, const ConvOp&) {
                      RngStream rng(s, 14);
                      const Tensor<double> x = uniform({2, 3, 4}, rng);
                      const Tensor<double> w = uniform({2, 3, 4}, rng);
                      // A fresh stream per evaluation fixes the mask.
                      return grad_check(
                          [&](const Tensor<double>& v, Tape<double>* t) {
                            RngStream mask(s, 15);
                            return weighted_sum(dropout(v, DropoutSpec{0.5, Mode::kTrain}, mask, t), w, t);
                          },
                          x, kGradStep);
                    }});
  checks.push_back({"concat", [](std::uint64_t s, const ConvOp&) {
                      RngStream rng(s, 16);
                      const Tensor<double> a = uniform({1, 3, 3, 2}, rng);
                      const Tensor<double> b = uniform({1, 3, 3, 3}, rng);
                      const Tensor<double> w = uniform({1, 3, 3, 5}, rng);
                      const double e_a = grad_check(
                          [&](const Tensor<double>& v, Tape<double>* t) {
                            return weighted_sum(concat_channels(v, b, t), w, t);
                          },
                          a, kGradStep);
                      const double e_b = grad_check(
                          [&](const Tensor<double>& v, Tape<double>* t) {
                            return weighted_sum(concat_channels(a, v, t), w, t);
                          },
                          b, kGradStep);
                      return worst({e_a, e_b});
                    }});
  checks.push_back({"flatten", [](std::uint64_t s, const ConvOp&) {
                      RngStream rng(s, 17);
                      const Tensor<double> x = uniform({2, 2, 3, 2}, rng);
                      const Tensor<double> w = uniform({2, 12}, rng);
                      return grad_check([&](const Tensor<double>& v,
                                            Tape<double>* t) { return weighted_sum(flatten(v, t), w, t); },
                                        x, kGradStep);
                    }});
  checks.push_back({"bce_composite", [](std::uint64_t s, const ConvOp&) {
                      RngStream rng(s, 18);
                      const Tensor<double> x = uniform({4, 3}, rng);
                      const Dense<double> layer{uniform({3, 2}, rng), uniform({2}, rng)};
                      std::vector<double> onehot(8, 0.0);
                      for (std::size_t i = 0; i < 4; ++i) onehot[2 * i + rng.below(2)] = 1.0;
                      const Tensor<double> y({4, 2}, onehot);
                      auto loss = [&](const Tensor<double>& in, const Dense<double>& l, Tape<double>* t) {
                        return bce_loss(sigmoid(dense(in, l, t), t), y, t);
                      };
                      const double e_x = grad_check(
                          [&](const Tensor<double>& v, Tape<double>* t) { return loss(v, layer, t); }, x, kGradStep);
                      const double e_w = grad_check(
                          [&](const Tensor<double>& v, Tape<double>* t) {
                            return loss(x, Dense<double>{v, layer.bias}, t);
                          },
                          layer.weights, kGradStep);
                      const double e_b = grad_check(
                          [&](const Tensor<double>& v, Tape<double>* t) {
                            return loss(x, Dense<double>{layer.weights, v}, t);
                          },
                          layer.bias, kGradStep);
                      return worst({e_x, e_w, e_b});
                    }});
  return checks;
}

std::size_t conv_params(std::size_t k, std::size_t cin, std::size_t cout) { return k * k * cin * cout + cout; }

std::string pct(const std::optional<double>& value) { return value ? fixed(100.0 * *value, 4) : "undefined"; }

// Exact rational evaluation of the seven metrics, used as the recount oracle.
struct OracleMetrics {
  std::optional<double> values[7];
};

OracleMetrics oracle_metrics(std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn) {
  auto frac = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
  };
  OracleMetrics m;
  m.values[0] = frac(tp + tn, tp + tn + fp + fn);
  m.values[1] = frac(tp, tp + fp);
  m.values[2] = frac(tn, tn + fn);
  m.values[3] = frac(tp, tp + fn);
  m.values[4] = frac(tn, tn + fp);
  if (tp + fp > 0 && tp + fn > 0) m.values[5] = frac(2 * tp, 2 * tp + fp + fn);
  const long double a = tp + fn, b = tp + fp, c = fp + tn, d = tn + fn;
  if (a * b * c * d > 0) {
    const long double num = static_cast<long double>(tp) * tn - static_cast<long double>(fp) * fn;
    m.values[6] = static_cast<double>(num / std::sqrt(a * b * c * d));
  }
  return m;
}

std::optional<double> report_value(const MetricReport& r, int i) {
  switch (i) {
    case 0: return r.accuracy;
    case 1: return r.precision_ppv;
    case 2: return r.npv;
    case 3: return r.recall_sensitivity;
    case 4: return r.specificity;
    case 5: return r.f1;
    default: return r.mcc;
  }
}

constexpr const char* kMetricLabels[7] = {"accuracy", "precision", "npv", "recall", "specificity", "f1", "mcc"};

}  // namespace

Mutation parse_mutation(std::string_view text) {
  if (text == "none" || text.empty()) return Mutation::kNone;
  if (text == "conv-sign") return Mutation::kConvBackwardSign;
  if (text == "mcc-swap") return Mutation::kMccSwap;
  throw Error(ErrorCode::kConfigInvalid, "unknown mutation '" + std::string(text) + "'");
}

ConvOp conv_op(Mutation mutation) {
  if (mutation != Mutation::kConvBackwardSign) {
    return [](const Tensor<double>& x, const Conv2D<double>& layer, Tape<double>* tape) {
      return conv2d(x, layer, tape);
    };
  }
  return [](const Tensor<double>& x, const Conv2D<double>& layer, Tape<double>* tape) {
    Tensor<double> out = detail::conv2d_forward_raw(x, layer);
    record_if(tape, out, {x, layer.kernel, layer.bias},
              [x, layer](std::span<const double> grad, std::span<const std::span<double>> inputs) {
                std::vector<double> gx(inputs[0].size()), gk(inputs[1].size()), gb(inputs[2].size());
                detail::conv2d_backward<double>(x, layer, grad, gx, gk, gb);
                for (std::size_t i = 0; i < gx.size(); ++i) inputs[0][i] -= gx[i];
                for (std::size_t i = 0; i < gk.size(); ++i) inputs[1][i] -= gk[i];
                for (std::size_t i = 0; i < gb.size(); ++i) inputs[2][i] -= gb[i];
              });
    return out;
  };
}

MetricsFn metrics_fn(Mutation mutation) {
  if (mutation != Mutation::kMccSwap) return compute_metrics;
  return [](const ConfusionMatrix& cm) {
    MetricReport r = compute_metrics(cm);
    // Swapping FP and FN throughout leaves MCC invariant, so the defect
    // swaps them in the first denominator factor only.
    const auto tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
    const auto fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
    const double product = (tp + fp) * (tp + fp) * (fp + tn) * (tn + fn);
    r.mcc.reset();
    if (product > 0.0) r.mcc = (tp * tn - fp * fn) / std::sqrt(product);
    return r;
  };
}

std::vector<CheckResult> gradient_checks(std::size_t seeds, Mutation mutation) {
  const ConvOp conv = conv_op(mutation);
  std::vector<CheckResult> results;
  for (const auto& check : layer_checks()) {
    const auto start = Clock::now();
    double max_error = 0.0;
    std::uint64_t worst_seed = 0;
    std::string failure;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
      try {
        const double e = check.run(seed, conv);
        if (!(e <= max_error)) {
          max_error = e;
          worst_seed = seed;
        }
      } catch (const std::exception& ex) {
        failure = ex.what();
        break;
      }
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    CheckResult r;
    r.name = "grad." + check.name;
    r.passed = failure.empty() && max_error < kGradTolerance;
    std::ostringstream detail;
    if (!failure.empty()) {
      detail << "error: " << failure;
    } else {
      detail << "max rel err " << std::scientific << std::setprecision(3) << max_error << " (seed " << worst_seed
             << ", tol " << kGradTolerance << ") over " << seeds << " seeds, " << std::fixed
             << std::setprecision(3) << seconds << "s";
    }
    r.detail = detail.str();
    results.push_back(std::move(r));
  }
  return results;
}

CheckResult shape_oracle_check() {
  struct Expected {
    std::size_t input;
    std::size_t flatten;
  };
  CheckResult r{"shape_oracle", true, ""};
  std::ostringstream detail;
  for (const Expected e : {Expected{224, 2304}, Expected{375, 6400}}) {
    CNetConfig config;
    config.input_height = config.input_width = e.input;
    const ShapeTrace trace = infer_shapes(config);

    // Closed form: three outer pools, two middle pools, one inner pool, each a floor halving.
    std::size_t n = e.input;
    std::vector<std::pair<std::string, std::size_t>> chain;
    for (int b = 1; b <= 4; ++b) {
      if (b < 4) n /= 2;
      chain.emplace_back("outer.block" + std::to_string(b), n);
    }
    chain.emplace_back("outer_out", n);
    chain.emplace_back("outer_concat", n);
    for (int b = 1; b <= 2; ++b) {
      n /= 2;
      chain.emplace_back("middle.block" + std::to_string(b), n);
    }
    chain.emplace_back("middle_out", n);
    chain.emplace_back("middle_concat", n);
    n /= 2;
    chain.emplace_back("inner_out", n);
    const std::size_t flatten = n * n * 256;

    bool ok = trace.flatten_width == e.flatten && flatten == e.flatten;
    for (const auto& [name, extent] : chain) {
      const auto& stage = trace.at(name);
      ok = ok && stage.height == extent && stage.width == extent;
    }
    const auto& outer = trace.at("outer_out");
    const auto& middle = trace.at("middle_out");
    const auto& inner = trace.at("inner_out");
    ok = ok && outer.channels == 256 && trace.at("outer_concat").channels == 512 &&
         trace.at("middle_concat").channels == 512 && inner.channels == 256;
    detail << e.input << ": " << outer.height << "->" << middle.height << "->" << inner.height << " flatten "
           << trace.flatten_width << " (expected " << e.flatten << ")" << (ok ? "" : " MISMATCH") << "; ";
    r.passed = r.passed && ok;
  }
  r.detail = detail.str();
  return r;
}

std::size_t analytic_parameter_count(const CNetConfig& c) {
  const auto s = [&](std::size_t n) { return c.scaled(n); };
  std::size_t outer = 0;
  std::size_t channels = c.input_channels;
  for (std::size_t b = 0; b < c.outer_convs_per_block.size(); ++b) {
    const std::size_t f = s(c.outer_filters[b]);
    outer += conv_params(3, channels, f) + (c.outer_convs_per_block[b] - 1) * conv_params(3, f, f);
    channels = f;
  }
  const std::size_t outer_out = channels;

  const std::size_t mf = s(c.middle_filters);
  std::size_t middle = 0;
  channels = 2 * outer_out;
  for (std::size_t b = 0; b < c.middle_blocks; ++b) {
    middle += conv_params(3, channels, mf) + (c.middle_convs_per_block - 1) * conv_params(3, mf, mf) +
              conv_params(1, mf, mf);
    channels = mf;
  }

  const std::size_t inf = s(c.inner_filters);
  const std::size_t inner =
      conv_params(3, 2 * mf, inf) + (c.inner_convs - 1) * conv_params(3, inf, inf) + conv_params(1, inf, inf);

  std::size_t h = c.input_height, w = c.input_width;
  for (std::size_t i = 0; i < c.outer_convs_per_block.size() - 1 + c.middle_blocks + 1; ++i) h /= 2, w /= 2;
  const std::size_t fc = s(c.fc_units);
  const std::size_t head = (h * w * inf) * fc + fc + fc * fc + fc + fc * c.output_nodes + c.output_nodes;

  return c.outer_count * outer + c.middle_count * middle + inner + head;
}

CheckResult parameter_count_check() {
  const CNetConfig config;
  const std::size_t analytic = analytic_parameter_count(config);
  const std::size_t counted = build_cnet(config, 0).parameter_count();
  constexpr std::size_t kBudget = 30'000'000;
  std::ostringstream detail;
  detail << "counted " << counted << ", closed form " << analytic << " at 224x224; ";
  if (counted < kBudget) {
    detail << "under the 30M budget";
  } else {
    detail << "exceeds the 30M budget by " << counted - kBudget
           << " (conv counts per Outer block are not fixed by the architecture description)";
  }
  return {"parameter_count", counted == analytic, detail.str()};
}

CheckResult metric_reconstruction_check(Mutation mutation) {
  const MetricsFn metrics = metrics_fn(mutation);
  struct Column {
    std::string name;
    ConfusionMatrix cm;
    std::vector<std::pair<int, double>> published;  // metric index -> percent
  };
  const std::vector<Column> columns = {
      {"40X", {205, 92, 2, 0}, {{0, 99.33}, {1, 99.03}, {2, 100.0}, {3, 100.0}, {4, 97.87}, {5, 99.51}, {6, 98.45}}},
      {"NCT-vs-VT", {37, 44, 0, 2}, {{1, 100.0}, {3, 94.87}, {5, 97.37}}},
  };
  bool ok = true;
  std::ostringstream detail;
  for (const auto& column : columns) {
    const MetricReport report = metrics(column.cm);
    detail << column.name << ":";
    for (const auto& [index, published] : column.published) {
      const auto value = report_value(report, index);
      const bool match = value && std::abs(100.0 * *value - published) <= kMetricTolerance;
      ok = ok && match;
      detail << ' ' << kMetricLabels[index] << '=' << pct(value) << (match ? "" : "(want " + fixed(published, 2) + ")");
    }
    detail << "; ";
  }
  return {"metric_reconstruction", ok, detail.str()};
}

CheckResult metric_oracle_check(Mutation mutation) {
  const MetricsFn metrics = metrics_fn(mutation);
  bool ok = true;
  std::ostringstream detail;

  constexpr std::size_t kStreams = 10;
  constexpr std::size_t kPerStream = 1000;
  std::size_t mismatches = 0;
  for (std::size_t s = 0; s < kStreams; ++s) {
    RngStream rng(2024, s);
    // Vary the positive rate and the accuracy between streams.
    const double positive_rate = 0.1 + 0.08 * static_cast<double>(s);
    const double hit_rate = 0.5 + 0.05 * static_cast<double>(s);
    std::vector<double> pred(2 * kPerStream), labels(2 * kPerStream, 0.0);
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < kPerStream; ++i) {
      const int actual = rng.uniform() < positive_rate ? 1 : 0;
      labels[2 * i + actual] = 1.0;
      if (rng.below(50) == 0) {
        pred[2 * i] = pred[2 * i + 1] = 0.5;  // exact tie
      } else {
        const int guess = rng.uniform() < hit_rate ? actual : 1 - actual;
        const double hi = 0.5 + 0.5 * rng.uniform() + 1e-9, lo = 0.5 * rng.uniform();
        pred[2 * i + guess] = hi;
        pred[2 * i + 1 - guess] = lo;
      }
      const int predicted = pred[2 * i + 1] > pred[2 * i] ? 1 : 0;
      if (actual == 1) ++(predicted == 1 ? tp : fn);
      else ++(predicted == 1 ? fp : tn);
    }
    // Accumulate in uneven batches to exercise merging.
    ConfusionMatrix cm;
    for (std::size_t begin = 0; begin < kPerStream;) {
      const std::size_t n = std::min<std::size_t>(1 + rng.below(97), kPerStream - begin);
      const Tensor<double> p({n, 2}, std::vector<double>(pred.begin() + 2 * begin, pred.begin() + 2 * (begin + n)));
      const Tensor<double> y({n, 2},
                             std::vector<double>(labels.begin() + 2 * begin, labels.begin() + 2 * (begin + n)));
      cm = accumulate(p, y, cm);
      begin += n;
    }
    if (!(cm == ConfusionMatrix{tp, tn, fp, fn})) {
      ++mismatches;
      continue;
    }
    const MetricReport report = metrics(cm);
    const OracleMetrics oracle = oracle_metrics(tp, tn, fp, fn);
    for (int i = 0; i < 7; ++i) {
      const auto got = report_value(report, i);
      const auto want = oracle.values[i];
      if (got.has_value() != want.has_value() || (got && std::abs(*got - *want) > 1e-12)) ++mismatches;
    }
  }
  ok = ok && mismatches == 0;
  detail << kStreams * kPerStream << " samples recounted, " << mismatches << " mismatches; ";

  std::size_t f1_checked = 0, f1_failed = 0;
  for (std::uint64_t tp = 0; tp <= 20; ++tp)
    for (std::uint64_t tn = 0; tn <= 20; ++tn)
      for (std::uint64_t fp = 0; fp <= 20; ++fp)
        for (std::uint64_t fn = 0; fn <= 20; ++fn) {
          if (tp + tn + fp + fn == 0) continue;
          const MetricReport report = metrics({tp, tn, fp, fn});
          if (!report.precision_ppv || !report.recall_sensitivity) continue;
          if (2 * tp + fp + fn == 0) continue;
          const double identity = static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
          ++f1_checked;
          // 2PR/(P+R) is undefined when P = R = 0 although the identity gives 0.
          if (tp == 0) {
            if (report.f1 && *report.f1 != 0.0) ++f1_failed;
            continue;
          }
          if (!report.f1 || std::abs(*report.f1 - identity) > 1e-12) ++f1_failed;
        }
  ok = ok && f1_failed == 0;
  detail << "F1 identity on " << f1_checked << " matrices, " << f1_failed << " failures";
  return {"metric_oracle", ok, detail.str()};
}

CheckResult split_check() {
  struct Stratum {
    std::string group;
    int label;
    std::size_t n;
  };
  const std::vector<Stratum> strata = {
      {"40X", 0, 625},  {"40X", 1, 1370},  {"100X", 0, 644}, {"100X", 1, 1437},
      {"200X", 0, 623}, {"200X", 1, 1390}, {"400X", 0, 588}, {"400X", 1, 1232},
  };
  const std::map<std::string, std::size_t> totals = {{"40X", 1995}, {"100X", 2081}, {"200X", 2013}, {"400X", 1820}};

  bool ok = true;
  std::ostringstream detail;
  const data::SplitRatios ratios;

  // Published sizes for the 40X strata, then the integer floor rule everywhere.
  const auto b40 = data::split_counts(625, ratios);
  const auto m40 = data::split_counts(1370, ratios);
  ok = ok && b40.train == 437 && b40.val == 93 && b40.test == 95;
  ok = ok && m40.train == 959 && m40.val == 205 && m40.test == 206;
  detail << "40X benign " << b40.train << '/' << b40.val << '/' << b40.test << ", malignant " << m40.train << '/'
         << m40.val << '/' << m40.test << "; ";

  data::DatasetManifest manifest;
  manifest.class_names = {"benign", "malignant"};
  std::map<std::string, std::size_t> group_sizes;
  for (const auto& s : strata) {
    const auto counts = data::split_counts(s.n, ratios);
    ok = ok && counts.train == s.n * 70 / 100 && counts.val == s.n * 15 / 100 &&
         counts.test == s.n - s.n * 70 / 100 - s.n * 15 / 100;
    for (std::size_t i = 0; i < s.n; ++i) {
      manifest.records.push_back({s.group + "/" + manifest.class_names[s.label] + "/" + std::to_string(i) + ".png",
                                  s.label, s.group, data::Split::kUnassigned});
    }
    group_sizes[s.group] += s.n;
  }
  ok = ok && group_sizes == totals;

  const auto a = data::split_manifest(manifest, ratios, 7);
  const auto b = data::split_manifest(manifest, ratios, 7);
  const auto c = data::split_manifest(manifest, ratios, 8);
  ok = ok && a.records == b.records;

  std::size_t differing = 0;
  std::set<std::string> seen;
  std::map<std::tuple<std::string, int, data::Split>, std::size_t> counts_a, counts_c;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& r = a.records[i];
    ok = ok && r.split != data::Split::kUnassigned && seen.insert(r.path).second;
    ++counts_a[{r.group, r.label, r.split}];
    ++counts_c[{c.records[i].group, c.records[i].label, c.records[i].split}];
    if (r.split != c.records[i].split) ++differing;
  }
  ok = ok && seen.size() == manifest.records.size() && counts_a == counts_c && differing > 0;
  for (const auto& s : strata) {
    const auto counts = data::split_counts(s.n, ratios);
    ok = ok && counts_a[{s.group, s.label, data::Split::kTrain}] == counts.train &&
         counts_a[{s.group, s.label, data::Split::kVal}] == counts.val &&
         counts_a[{s.group, s.label, data::Split::kTest}] == counts.test;
  }
  detail << manifest.records.size() << " records partitioned, seed 7 repeatable, seed 8 reassigns " << differing;
  return {"split_arithmetic", ok, detail.str()};
}

std::vector<CheckResult> run_verify(const VerifyOptions& options) {
  std::vector<CheckResult> results = gradient_checks(options.fast ? 3 : 20, options.mutation);
  results.push_back(shape_oracle_check());
  results.push_back(parameter_count_check());
  results.push_back(metric_reconstruction_check(options.mutation));
  results.push_back(metric_oracle_check(options.mutation));
  results.push_back(split_check());
  return results;
}

}  // namespace cnet::app
