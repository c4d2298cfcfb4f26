// Copyright 2026 The stdgat Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Report tables: tab-separated text with a header row, plus a JSON-lines twin
// holding one record per row with the per-day breakdown.

#pragma once

#include <cstdio>
#include <span>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "stdgat/evaluation.hpp"

namespace stdgat {

inline constexpr const char* kReportFormatVersion = "1.0";

namespace detail {

inline std::string fmt_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline nlohmann::ordered_json metric_json(const MetricReport& m) {
  return {{"rmse", m.rmse},
          {"mape", m.mape},
          {"mae", m.mae},
          {"n_samples", m.n_samples},
          {"n_excluded_mape", m.n_excluded_mape}};
}

}  // namespace detail

inline std::string report_tsv_header(const std::string& lead_columns = "name") {
  return "format_version\t" + lead_columns + "\trmse\tmape\tmae\tn_samples\tn_excluded_mape\tconfig\n";
}

inline std::string report_tsv_line(const std::string& lead, const MetricReport& m, const std::string& config) {
  std::ostringstream out;
  out << kReportFormatVersion << '\t' << lead << '\t' << detail::fmt_metric(m.rmse) << '\t'
      << detail::fmt_metric(m.mape) << '\t' << detail::fmt_metric(m.mae) << '\t' << m.n_samples << '\t'
      << m.n_excluded_mape << '\t' << config << '\n';
  return out.str();
}

inline nlohmann::ordered_json report_json(const ReportRow& row, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["format_version"] = kReportFormatVersion;
  j["name"] = row.name;
  j["seed"] = seed;
  j["overall"] = detail::metric_json(row.report.overall);
  if (row.report.weekdays) j["weekdays"] = detail::metric_json(*row.report.weekdays);
  if (row.report.weekends) j["weekends"] = detail::metric_json(*row.report.weekends);
  nlohmann::ordered_json days = nlohmann::ordered_json::object();
  for (int d = 0; d < 7; ++d) {
    if (row.report.by_day[d]) days[kWeekdayNames[d]] = detail::metric_json(*row.report.by_day[d]);
  }
  j["by_day"] = days;
  j["config"] = row.config;
  return j;
}

// One line per row, overall metrics.
inline std::string rows_tsv(std::span<const ReportRow> rows) {
  std::string out = report_tsv_header();
  for (const auto& r : rows) out += report_tsv_line(r.name, r.report.overall, r.config);
  return out;
}

// One line per (row, subset) with subsets all, weekdays, weekends, mon..sun.
inline std::string breakdown_tsv(std::span<const ReportRow> rows) {
  std::string out = report_tsv_header("name\tsubset");
  for (const auto& r : rows) {
    out += report_tsv_line(r.name + "\tall", r.report.overall, r.config);
    if (r.report.weekdays) out += report_tsv_line(r.name + "\tweekdays", *r.report.weekdays, r.config);
    if (r.report.weekends) out += report_tsv_line(r.name + "\tweekends", *r.report.weekends, r.config);
    for (int d = 0; d < 7; ++d) {
      if (r.report.by_day[d]) out += report_tsv_line(r.name + "\t" + kWeekdayNames[d], *r.report.by_day[d], r.config);
    }
  }
  return out;
}

inline std::string rows_jsonl(std::span<const ReportRow> rows, std::uint64_t seed) {
  std::string out;
  for (const auto& r : rows) out += report_json(r, seed).dump() + "\n";
  return out;
}

inline std::string sweep_tsv(std::span<const SweepRow> rows) {
  std::string out = report_tsv_header("axis\tvalue");
  for (const auto& r : rows) {
    out += report_tsv_line(std::string(sweep_axis_name(r.axis)) + "\t" + std::to_string(r.value), r.row.report.overall,
                           r.row.config);
  }
  return out;
}

inline std::string sweep_jsonl(std::span<const SweepRow> rows, std::uint64_t seed) {
  std::string out;
  for (const auto& r : rows) {
    auto j = report_json(r.row, seed);
    j["axis"] = sweep_axis_name(r.axis);
    j["value"] = r.value;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace stdgat
