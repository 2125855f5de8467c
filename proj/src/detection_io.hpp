#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "detection.hpp"

namespace mobeval {

/// Detection dump encodings: newline-delimited JSON records or CSV with a
/// header row. Both carry image_id, class, score, xmin, ymin, xmax, ymax.
enum class DumpFormat { kJsonl, kCsv };

/// Accepts "jsonl", "json", or "csv". Throws std::invalid_argument
/// otherwise.
DumpFormat dump_format_from_name(std::string_view name);

/// Picks the format from a file extension (.jsonl/.json/.csv).
DumpFormat dump_format_from_path(const std::filesystem::path& path);

/// Parses a detection dump. Record order is preserved. Unknown fields are
/// skipped and noted in `warnings` (once per field). Throws ParseError
/// (with the line number) for malformed records, out-of-range scores, or
/// degenerate boxes.
std::vector<Detection> read_detections(const std::string& content,
                                       DumpFormat format,
                                       std::vector<std::string>* warnings = nullptr);

/// Serializes detections; inverse of read_detections. UTF-8, LF line
/// endings, and round-trip-exact numbers, so write -> read -> write is
/// byte-identical.
std::string write_detections(std::span<const Detection> dets, DumpFormat format);

std::vector<Detection> read_detections_file(
    const std::filesystem::path& path,
    std::optional<DumpFormat> format = std::nullopt,
    std::vector<std::string>* warnings = nullptr);

void write_detections_file(const std::filesystem::path& path,
                           std::span<const Detection> dets,
                           std::optional<DumpFormat> format = std::nullopt);

}  // namespace mobeval
