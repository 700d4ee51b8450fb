#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cnet/config.hpp"
#include "cnet/layers.hpp"
#include "cnet/metrics.hpp"

namespace cnet::app {

/// Deliberate defects the verify suite must catch.
enum class Mutation { kNone, kConvBackwardSign, kMccSwap };

/// "none", "conv-sign" or "mcc-swap".
Mutation parse_mutation(std::string_view text);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

using ConvOp = std::function<Tensor<double>(const Tensor<double>&, const Conv2D<double>&, Tape<double>*)>;
using MetricsFn = std::function<MetricReport(const ConfusionMatrix&)>;

/// The library conv, or one whose recorded backward has its sign flipped.
ConvOp conv_op(Mutation mutation);
/// compute_metrics, or a copy whose MCC denominator uses FP where FN belongs.
MetricsFn metrics_fn(Mutation mutation);

inline constexpr double kGradTolerance = 1e-4;
inline constexpr double kGradStep = 1e-5;
inline constexpr double kMetricTolerance = 0.01;  // percentage points

/// Central-difference checks of every differentiable layer, `seeds` random
/// draws each. One result per layer.
std::vector<CheckResult> gradient_checks(std::size_t seeds, Mutation mutation = Mutation::kNone);

/// Flatten width and every stage extent at 224 and 375 input against the
/// closed-form pooling chain.
CheckResult shape_oracle_check();

/// Closed-form trainable parameter count, independent of the model builder.
std::size_t analytic_parameter_count(const CNetConfig& config);

/// Builds the default network at 224 and compares its counted parameters
/// with analytic_parameter_count(). The detail line reports the total
/// against the 30M budget.
CheckResult parameter_count_check();

/// Published 40X and NCT-vs-VT columns from their confusion matrices.
CheckResult metric_reconstruction_check(Mutation mutation = Mutation::kNone);

/// Per-sample recount over random streams plus the exhaustive F1 identity.
CheckResult metric_oracle_check(Mutation mutation = Mutation::kNone);

/// Split sizes of the magnification strata, partition, stratification and
/// seed determinism of split_manifest().
CheckResult split_check();

struct VerifyOptions {
  bool fast = false;  // 3 gradient seeds instead of 20
  Mutation mutation = Mutation::kNone;
};

std::vector<CheckResult> run_verify(const VerifyOptions& options);

}  // namespace cnet::app
