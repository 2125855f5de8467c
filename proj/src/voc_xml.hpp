#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "detection.hpp"

namespace mobeval {

/// One parsed annotation file: the image it describes and its labeled
/// objects. image_id is the annotation filename stem.
struct AnnotationFile {
  std::string image_id;
  double image_width = 0.0;
  double image_height = 0.0;
  std::vector<GroundTruth> objects;
};

/// Parses one VOC XML annotation document. Each <object> must provide
/// <name> and a <bndbox> with xmin/ymin/xmax/ymax (integers or decimals);
/// boxes must be non-degenerate and lie within [0, width] x [0, height].
/// Unsupported object fields (pose, truncated, ...) are skipped and noted
/// in `warnings` when given. Throws ParseError on malformed XML (with line
/// info), missing fields, or invalid boxes.
AnnotationFile parse_voc_xml(const std::string& content,
                             const std::string& image_id,
                             std::vector<std::string>* warnings = nullptr);

/// Parses every *.xml file in `dir` (sorted by filename; image_id is the
/// file stem). Throws IoError when the directory cannot be read and
/// ParseError when any file is invalid.
std::vector<AnnotationFile> load_annotation_dir(
    const std::filesystem::path& dir,
    std::vector<std::string>* warnings = nullptr);

/// Flattens the per-file objects into one label list.
std::vector<GroundTruth> all_labels(std::span<const AnnotationFile> files);

}  // namespace mobeval
