#include "detection_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "errors.hpp"

namespace mobeval {

namespace {

constexpr std::array<std::string_view, 7> kColumns = {
    "image_id", "class", "score", "xmin", "ymin", "xmax", "ymax"};

std::string format_double(double v) {
  std::array<char, 32> buf;
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

double parse_double(std::string_view text, std::size_t line,
                    std::string_view field) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError("line " + std::to_string(line) + ": invalid number in '" +
                     std::string(field) + "': '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_lines(const std::string& content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string_view line(content.data() + start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == content.size()) break;
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_csv_row(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

Detection make_detection(std::string image_id, std::string class_label,
                         double score, double xmin, double ymin, double xmax,
                         double ymax, std::size_t line) {
  try {
    Detection det{BBox(xmin, ymin, xmax, ymax), score, std::move(class_label),
                  std::move(image_id)};
    validate(det);
    return det;
  } catch (const std::invalid_argument& e) {
    throw ParseError("line " + std::to_string(line) + ": " + e.what());
  }
}

std::vector<Detection> read_jsonl(const std::string& content,
                                  std::vector<std::string>* warnings) {
  std::vector<Detection> dets;
  std::set<std::string> warned;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.empty()) continue;
    const std::size_t line_no = i + 1;

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object()) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": record is not a JSON object");
    }

    auto require = [&](const char* key) -> const nlohmann::json& {
      const auto it = record.find(key);
      if (it == record.end()) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": missing field '" + key + "'");
      }
      return *it;
    };
    auto require_string = [&](const char* key) {
      const auto& v = require(key);
      if (!v.is_string()) {
        throw ParseError("line " + std::to_string(line_no) + ": field '" + key +
                         "' is not a string");
      }
      return v.get<std::string>();
    };
    auto require_num = [&](const char* key) {
      const auto& v = require(key);
      if (!v.is_number()) {
        throw ParseError("line " + std::to_string(line_no) + ": field '" + key +
                         "' is not a number");
      }
      return v.get<double>();
    };

    if (warnings) {
      for (const auto& [key, value] : record.items()) {
        if (std::find(kColumns.begin(), kColumns.end(), key) == kColumns.end() &&
            warned.insert(key).second) {
          warnings->push_back("ignoring unknown field '" + key + "'");
        }
      }
    }

    dets.push_back(make_detection(require_string("image_id"),
                                  require_string("class"), require_num("score"),
                                  require_num("xmin"), require_num("ymin"),
                                  require_num("xmax"), require_num("ymax"),
                                  line_no));
  }
  return dets;
}

std::vector<Detection> read_csv(const std::string& content,
                                std::vector<std::string>* warnings) {
  const auto lines = split_lines(content);
  if (lines.empty() || lines[0].empty()) {
    throw ParseError("line 1: missing CSV header");
  }

  const auto header = split_csv_row(lines[0]);
  std::vector<int> column_of(kColumns.size(), -1);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto it = std::find(kColumns.begin(), kColumns.end(), header[c]);
    if (it == kColumns.end()) {
      if (warnings) {
        warnings->push_back("ignoring unknown column '" + std::string(header[c]) +
                            "'");
      }
      continue;
    }
    column_of[static_cast<std::size_t>(it - kColumns.begin())] =
        static_cast<int>(c);
  }
  for (std::size_t f = 0; f < kColumns.size(); ++f) {
    if (column_of[f] < 0) {
      throw ParseError("line 1: missing column '" + std::string(kColumns[f]) +
                       "'");
    }
  }

  std::vector<Detection> dets;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line_no = i + 1;
    const auto fields = split_csv_row(lines[i]);
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    auto field = [&](std::size_t f) {
      return fields[static_cast<std::size_t>(column_of[f])];
    };
    dets.push_back(make_detection(
        std::string(field(0)), std::string(field(1)),
        parse_double(field(2), line_no, "score"),
        parse_double(field(3), line_no, "xmin"),
        parse_double(field(4), line_no, "ymin"),
        parse_double(field(5), line_no, "xmax"),
        parse_double(field(6), line_no, "ymax"), line_no));
  }
  return dets;
}

}  // namespace

DumpFormat dump_format_from_name(std::string_view name) {
  if (name == "jsonl" || name == "json") return DumpFormat::kJsonl;
  if (name == "csv") return DumpFormat::kCsv;
  throw std::invalid_argument("unknown detection dump format: '" +
                              std::string(name) + "'");
}

DumpFormat dump_format_from_path(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") return DumpFormat::kJsonl;
  if (ext == ".csv") return DumpFormat::kCsv;
  throw std::invalid_argument("cannot infer dump format from '" + path.string() +
                              "'; pass jsonl or csv explicitly");
}

std::vector<Detection> read_detections(const std::string& content,
                                       DumpFormat format,
                                       std::vector<std::string>* warnings) {
  return format == DumpFormat::kJsonl ? read_jsonl(content, warnings)
                                      : read_csv(content, warnings);
}

std::string write_detections(std::span<const Detection> dets,
                             DumpFormat format) {
  std::string out;
  if (format == DumpFormat::kJsonl) {
    for (const Detection& d : dets) {
      nlohmann::ordered_json record{
          {"image_id", d.image_id}, {"class", d.class_label},
          {"score", d.score},       {"xmin", d.box.xmin},
          {"ymin", d.box.ymin},     {"xmax", d.box.xmax},
          {"ymax", d.box.ymax}};
      out += record.dump();
      out += '\n';
    }
    return out;
  }

  out = "image_id,class,score,xmin,ymin,xmax,ymax\n";
  for (const Detection& d : dets) {
    // the CSV dialect is unquoted
    for (const std::string* text : {&d.image_id, &d.class_label}) {
      if (text->find_first_of(",\r\n") != std::string::npos) {
        throw std::invalid_argument("'" + *text +
                                    "' cannot be written to unquoted CSV");
      }
    }
    out += d.image_id;
    out += ',';
    out += d.class_label;
    out += ',';
    out += format_double(d.score);
    out += ',';
    out += format_double(d.box.xmin);
    out += ',';
    out += format_double(d.box.ymin);
    out += ',';
    out += format_double(d.box.xmax);
    out += ',';
    out += format_double(d.box.ymax);
    out += '\n';
  }
  return out;
}

std::vector<Detection> read_detections_file(const std::filesystem::path& path,
                                            std::optional<DumpFormat> format,
                                            std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open detection file: " + path.string());
  }
  std::ostringstream content;
  content << in.rdbuf();
  return read_detections(content.str(),
                         format ? *format : dump_format_from_path(path),
                         warnings);
}

void write_detections_file(const std::filesystem::path& path,
                           std::span<const Detection> dets,
                           std::optional<DumpFormat> format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write detection file: " + path.string());
  }
  out << write_detections(dets, format ? *format : dump_format_from_path(path));
}

}  // namespace mobeval
