#include "voc_xml.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "errors.hpp"

namespace mobeval {

namespace {

namespace pt = boost::property_tree;

double require_number(const pt::ptree& node, const std::string& path,
                      const std::string& context) {
  const auto child = node.get_child_optional(path);
  if (!child) {
    throw ParseError(context + ": missing <" + path + ">");
  }
  const auto value = child->get_value_optional<double>();
  if (!value) {
    throw ParseError(context + ": invalid number in <" + path + ">: '" +
                     child->get_value<std::string>() + "'");
  }
  return *value;
}

}  // namespace

AnnotationFile parse_voc_xml(const std::string& content,
                             const std::string& image_id,
                             std::vector<std::string>* warnings) {
  pt::ptree doc;
  std::istringstream stream(content);
  try {
    pt::read_xml(stream, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(image_id + ":" + std::to_string(e.line()) +
                     ": malformed XML: " + e.message());
  }

  const auto root = doc.get_child_optional("annotation");
  if (!root) {
    throw ParseError(image_id + ": missing <annotation> root element");
  }

  AnnotationFile file;
  file.image_id = image_id;
  const auto size = root->get_child_optional("size");
  if (!size) {
    throw ParseError(image_id + ": missing <size> element");
  }
  file.image_width = require_number(*size, "width", image_id);
  file.image_height = require_number(*size, "height", image_id);
  if (!(file.image_width > 0.0) || !(file.image_height > 0.0)) {
    throw ParseError(image_id + ": non-positive image size");
  }

  std::set<std::string> warned_fields;
  std::size_t object_index = 0;
  for (const auto& [key, node] : *root) {
    if (key != "object") continue;
    const std::string context =
        image_id + ": object " + std::to_string(object_index);

    const auto name = node.get_optional<std::string>("name");
    if (!name || name->empty()) {
      throw ParseError(context + ": missing <name>");
    }
    const auto bndbox = node.get_child_optional("bndbox");
    if (!bndbox) {
      throw ParseError(context + ": missing <bndbox>");
    }
    const double xmin = require_number(*bndbox, "xmin", context);
    const double ymin = require_number(*bndbox, "ymin", context);
    const double xmax = require_number(*bndbox, "xmax", context);
    const double ymax = require_number(*bndbox, "ymax", context);
    if (xmin >= xmax || ymin >= ymax) {
      throw ParseError(context + ": degenerate box (" + std::to_string(xmin) +
                       ", " + std::to_string(ymin) + ", " + std::to_string(xmax) +
                       ", " + std::to_string(ymax) + ")");
    }
    if (xmin < 0.0 || ymin < 0.0 || xmax > file.image_width ||
        ymax > file.image_height) {
      throw ParseError(context + ": box outside image bounds");
    }

    if (warnings) {
      for (const auto& [child_key, child_node] : node) {
        if (child_key == "name" || child_key == "bndbox") continue;
        if (warned_fields.insert(child_key).second) {
          warnings->push_back(image_id + ": ignoring object field <" +
                              child_key + ">");
        }
      }
    }

    file.objects.push_back(
        GroundTruth{BBox(xmin, ymin, xmax, ymax), *name, image_id});
    ++object_index;
  }
  return file;
}

std::vector<AnnotationFile> load_annotation_dir(
    const std::filesystem::path& dir, std::vector<std::string>* warnings) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError("annotation directory not readable: " + dir.string());
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".xml") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<AnnotationFile> parsed;
  parsed.reserve(files.size());
  std::set<std::string> warned;
  for (const fs::path& path : files) {
    std::ifstream in(path);
    if (!in) {
      throw IoError("cannot open annotation file: " + path.string());
    }
    std::ostringstream content;
    content << in.rdbuf();
    std::vector<std::string> file_warnings;
    parsed.push_back(parse_voc_xml(content.str(), path.stem().string(),
                                   warnings ? &file_warnings : nullptr));
    if (warnings) {
      // one note per field name per directory load keeps output readable
      for (const std::string& w : file_warnings) {
        const auto field = w.substr(w.find('<'));
        if (warned.insert(field).second) warnings->push_back(w);
      }
    }
  }
  return parsed;
}

std::vector<GroundTruth> all_labels(std::span<const AnnotationFile> files) {
  std::vector<GroundTruth> labels;
  for (const AnnotationFile& file : files) {
    labels.insert(labels.end(), file.objects.begin(), file.objects.end());
  }
  return labels;
}

}  // namespace mobeval
