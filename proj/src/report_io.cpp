#include "report_io.hpp"

#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "errors.hpp"

namespace mobeval {

namespace {

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

nlohmann::json parse_json(const std::string& text, const char* what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid ") + what + " JSON: " + e.what());
  }
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                std::size_t min_columns,
                                                const char* what) {
  std::vector<std::vector<std::string>> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    start = end + 1;
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::size_t field_start = 0;
    while (true) {
      const std::size_t comma = line.find(',', field_start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(field_start));
        break;
      }
      fields.push_back(line.substr(field_start, comma - field_start));
      field_start = comma + 1;
    }
    if (fields.size() < min_columns) {
      throw ParseError(std::string("invalid ") + what + " CSV row: '" + line +
                       "'");
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) {
    throw ParseError(std::string("empty ") + what + " CSV");
  }
  return rows;
}

double to_double(const std::string& field, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("invalid number in ") + what + ": '" + field +
                     "'");
  }
}

}  // namespace

ReportFormat report_format_from_name(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  throw std::invalid_argument("unknown report format: '" + std::string(name) +
                              "'");
}

std::string write_report(const MetricsReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    std::string out = "{\n";
    out += "  \"precision\": " + g6(report.precision) + ",\n";
    out += "  \"recall\": " + g6(report.recall) + ",\n";
    out += "  \"average_precision\": " + g6(report.average_precision) + ",\n";
    out += "  \"true_positives\": " + std::to_string(report.true_positives) +
           ",\n";
    out += "  \"false_positives\": " + std::to_string(report.false_positives) +
           ",\n";
    out += "  \"false_negatives\": " + std::to_string(report.false_negatives);
    if (report.avg_time_per_image_s) {
      out += ",\n  \"avg_time_per_image_s\": " + g6(*report.avg_time_per_image_s);
    }
    out += "\n}\n";
    return out;
  }

  std::string header =
      "precision,recall,average_precision,true_positives,false_positives,"
      "false_negatives";
  std::string row = g6(report.precision) + "," + g6(report.recall) + "," +
                    g6(report.average_precision) + "," +
                    std::to_string(report.true_positives) + "," +
                    std::to_string(report.false_positives) + "," +
                    std::to_string(report.false_negatives);
  if (report.avg_time_per_image_s) {
    header += ",avg_time_per_image_s";
    row += "," + g6(*report.avg_time_per_image_s);
  }
  return header + "\n" + row + "\n";
}

std::string write_sweep(std::span<const SweepRow> rows, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    if (rows.empty()) return "[]\n";
    std::string out = "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out += "{\"score_threshold\": " + g6(rows[i].score_threshold) +
             ", \"precision\": " + g6(rows[i].precision) +
             ", \"recall\": " + g6(rows[i].recall) +
             ", \"average_precision\": " + g6(rows[i].average_precision) + "}";
      out += i + 1 < rows.size() ? ",\n" : "\n";
    }
    out += "]\n";
    return out;
  }

  std::string out = "score_threshold,precision,recall,average_precision\n";
  for (const SweepRow& row : rows) {
    out += g6(row.score_threshold) + "," + g6(row.precision) + "," +
           g6(row.recall) + "," + g6(row.average_precision) + "\n";
  }
  return out;
}

std::string write_pr_curve(std::span<const PrPoint> curve, ReportFormat format,
                           std::span<const double> envelope) {
  if (!envelope.empty() && envelope.size() != curve.size()) {
    throw std::invalid_argument("envelope size does not match curve size");
  }

  if (format == ReportFormat::kJson) {
    if (curve.empty()) return "[]\n";
    std::string out = "[\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      out += "{\"recall\": " + g6(curve[i].recall) +
             ", \"precision\": " + g6(curve[i].precision) +
             ", \"score_cutoff\": " + g6(curve[i].score_cutoff);
      if (!envelope.empty()) {
        out += ", \"precision_envelope\": " + g6(envelope[i]);
      }
      out += "}";
      out += i + 1 < curve.size() ? ",\n" : "\n";
    }
    out += "]\n";
    return out;
  }

  std::string out = "recall,precision,score_cutoff";
  if (!envelope.empty()) out += ",precision_envelope";
  out += "\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += g6(curve[i].recall) + "," + g6(curve[i].precision) + "," +
           g6(curve[i].score_cutoff);
    if (!envelope.empty()) out += "," + g6(envelope[i]);
    out += "\n";
  }
  return out;
}

MetricsReport read_report(const std::string& text, ReportFormat format) {
  MetricsReport report;
  if (format == ReportFormat::kJson) {
    const nlohmann::json doc = parse_json(text, "report");
    try {
      report.precision = doc.at("precision").get<double>();
      report.recall = doc.at("recall").get<double>();
      report.average_precision = doc.at("average_precision").get<double>();
      report.true_positives = doc.at("true_positives").get<std::size_t>();
      report.false_positives = doc.at("false_positives").get<std::size_t>();
      report.false_negatives = doc.at("false_negatives").get<std::size_t>();
      if (doc.contains("avg_time_per_image_s")) {
        report.avg_time_per_image_s =
            doc.at("avg_time_per_image_s").get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid report JSON: ") + e.what());
    }
    return report;
  }

  const auto rows = parse_csv(text, 6, "report");
  if (rows.size() != 2) {
    throw ParseError("report CSV must have a header and one row");
  }
  const auto& row = rows[1];
  report.precision = to_double(row[0], "report");
  report.recall = to_double(row[1], "report");
  report.average_precision = to_double(row[2], "report");
  report.true_positives = static_cast<std::size_t>(to_double(row[3], "report"));
  report.false_positives = static_cast<std::size_t>(to_double(row[4], "report"));
  report.false_negatives = static_cast<std::size_t>(to_double(row[5], "report"));
  if (row.size() > 6) {
    report.avg_time_per_image_s = to_double(row[6], "report");
  }
  return report;
}

std::vector<SweepRow> read_sweep(const std::string& text, ReportFormat format) {
  std::vector<SweepRow> rows;
  if (format == ReportFormat::kJson) {
    const nlohmann::json doc = parse_json(text, "sweep");
    if (!doc.is_array()) throw ParseError("sweep JSON must be an array");
    for (const auto& entry : doc) {
      try {
        rows.push_back(SweepRow{entry.at("score_threshold").get<double>(),
                                entry.at("precision").get<double>(),
                                entry.at("recall").get<double>(),
                                entry.at("average_precision").get<double>()});
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid sweep JSON: ") + e.what());
      }
    }
    return rows;
  }

  const auto parsed = parse_csv(text, 4, "sweep");
  for (std::size_t i = 1; i < parsed.size(); ++i) {
    rows.push_back(SweepRow{
        to_double(parsed[i][0], "sweep"), to_double(parsed[i][1], "sweep"),
        to_double(parsed[i][2], "sweep"), to_double(parsed[i][3], "sweep")});
  }
  return rows;
}

std::vector<PrPoint> read_pr_curve(const std::string& text,
                                   ReportFormat format) {
  std::vector<PrPoint> curve;
  if (format == ReportFormat::kJson) {
    const nlohmann::json doc = parse_json(text, "pr curve");
    if (!doc.is_array()) throw ParseError("pr curve JSON must be an array");
    for (const auto& entry : doc) {
      try {
        curve.push_back(PrPoint{entry.at("recall").get<double>(),
                                entry.at("precision").get<double>(),
                                entry.at("score_cutoff").get<double>()});
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid pr curve JSON: ") + e.what());
      }
    }
    return curve;
  }

  const auto parsed = parse_csv(text, 3, "pr curve");
  for (std::size_t i = 1; i < parsed.size(); ++i) {
    curve.push_back(PrPoint{to_double(parsed[i][0], "pr curve"),
                            to_double(parsed[i][1], "pr curve"),
                            to_double(parsed[i][2], "pr curve")});
  }
  return curve;
}

}  // namespace mobeval
