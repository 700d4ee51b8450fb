#include "cnet/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "cnet/error.hpp"

namespace cnet {
namespace {

std::vector<std::optional<double>> values_of(const MetricReport& r) {
  return {r.accuracy, r.precision_ppv, r.npv, r.recall_sensitivity, r.specificity, r.f1, r.mcc};
}

std::string format_percent(const std::optional<double>& value) {
  if (!value) return "";
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << *value;
  return out.str();
}

std::string join(const std::vector<std::string>& items, char separator) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += separator;
    out += items[i];
  }
  return out;
}

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  throw Error(ErrorCode::kConfigInvalid, "unknown report format '" + std::string(text) + "'");
}

double round_percent(double fraction) {
  // nearbyint honours the current rounding mode, which defaults to
  // round-half-even.
  return std::nearbyint(fraction * 100.0 * 100.0) / 100.0;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"accuracy", "precision", "npv", "recall",
                                                 "specificity", "f1", "mcc"};
  return names;
}

std::vector<ReportRow> build_report(const std::map<std::string, MetricReport>& reports) {
  if (reports.empty()) throw Error(ErrorCode::kEmptyMatrix, "no groups to report");
  const auto& names = metric_names();
  std::vector<ReportRow> rows;
  std::vector<double> sums(names.size(), 0.0);
  std::vector<std::size_t> defined(names.size(), 0);
  ConfusionMatrix total;

  for (const auto& [group, report] : reports) {
    ReportRow row;
    row.group = group;
    row.confusion = report.confusion;
    const auto values = values_of(report);
    for (std::size_t m = 0; m < names.size(); ++m) {
      row.percent[names[m]] = values[m] ? std::optional<double>(round_percent(*values[m])) : std::nullopt;
      if (values[m]) {
        sums[m] += *values[m];
        ++defined[m];
      }
    }
    total += report.confusion;
    rows.push_back(std::move(row));
  }

  ReportRow average;
  average.group = "Average";
  average.confusion = total;
  for (std::size_t m = 0; m < names.size(); ++m) {
    if (defined[m] == 0) {
      average.percent[names[m]] = std::nullopt;
    } else {
      average.percent[names[m]] = round_percent(sums[m] / static_cast<double>(defined[m]));
    }
    if (defined[m] < reports.size()) average.partial.push_back(names[m]);
  }
  rows.push_back(std::move(average));
  return rows;
}

std::string render_report(const std::map<std::string, MetricReport>& reports, ReportFormat format) {
  const auto rows = build_report(reports);
  const auto& names = metric_names();
  if (format == ReportFormat::kCsv) {
    std::ostringstream out;
    out << "group,tp,tn,fp,fn," << join(names, ',') << ",partial\n";
    for (const auto& row : rows) {
      out << row.group << ',' << row.confusion.tp << ',' << row.confusion.tn << ',' << row.confusion.fp << ','
          << row.confusion.fn;
      for (const auto& name : names) out << ',' << format_percent(row.percent.at(name));
      out << ',' << join(row.partial, ';') << '\n';
    }
    return out.str();
  }

  nlohmann::ordered_json doc;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json entry;
    entry["group"] = row.group;
    entry["tp"] = row.confusion.tp;
    entry["tn"] = row.confusion.tn;
    entry["fp"] = row.confusion.fp;
    entry["fn"] = row.confusion.fn;
    for (const auto& name : names) {
      const auto& value = row.percent.at(name);
      entry[name] = value ? nlohmann::ordered_json(*value) : nlohmann::ordered_json(nullptr);
    }
    entry["partial"] = row.partial;
    doc["rows"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

void emit_report(const std::map<std::string, MetricReport>& reports, ReportFormat format,
                 const std::filesystem::path& path) {
  const std::string text = render_report(reports, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write report " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "failed writing report " + path.string());
}

}  // namespace cnet
