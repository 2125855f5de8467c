#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metrics.hpp"

namespace mobeval {

enum class ReportFormat { kJson, kCsv };

/// Accepts "json" or "csv". Throws std::invalid_argument otherwise.
ReportFormat report_format_from_name(std::string_view name);

/// Report serializers. Field order is fixed and reals carry 6 significant
/// digits, so write -> read -> write is byte-identical. CSV output always
/// has a header row; JSON arrays put one row object per line.
std::string write_report(const MetricsReport& report, ReportFormat format);
std::string write_sweep(std::span<const SweepRow> rows, ReportFormat format);
std::string write_pr_curve(std::span<const PrPoint> curve, ReportFormat format,
                           std::span<const double> envelope = {});

/// Inverse parsers; throw ParseError on malformed input.
MetricsReport read_report(const std::string& text, ReportFormat format);
std::vector<SweepRow> read_sweep(const std::string& text, ReportFormat format);
std::vector<PrPoint> read_pr_curve(const std::string& text, ReportFormat format);

}  // namespace mobeval
