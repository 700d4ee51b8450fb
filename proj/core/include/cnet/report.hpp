#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cnet/metrics.hpp"

namespace cnet {

enum class ReportFormat { kCsv, kJson };

ReportFormat parse_report_format(std::string_view text);

/// Round half to even at two decimals, e.g. 99.3375 -> 99.34.
double round_percent(double fraction);

/// One table row: metrics as percentages rounded to two decimals.
struct ReportRow {
  std::string group;
  ConfusionMatrix confusion;
  std::map<std::string, std::optional<double>> percent;  // keyed by metric name
  /// Metrics whose average skipped at least one undefined entry.
  std::vector<std::string> partial;
};

/// Metric names in column order.
const std::vector<std::string>& metric_names();

/// Per-group rows followed by an "Average" row holding the arithmetic mean
/// of the defined values of each metric and the summed counts.
std::vector<ReportRow> build_report(const std::map<std::string, MetricReport>& reports);

/// CSV columns: group,tp,tn,fp,fn,accuracy,precision,npv,recall,
/// specificity,f1,mcc,partial. Undefined values are empty fields. JSON is
/// {"rows": [...]} with the same fields and null for undefined values.
/// Throws kIoError, or kEmptyMatrix when `reports` is empty.
void emit_report(const std::map<std::string, MetricReport>& reports, ReportFormat format,
                 const std::filesystem::path& path);

std::string render_report(const std::map<std::string, MetricReport>& reports, ReportFormat format);

}  // namespace cnet
