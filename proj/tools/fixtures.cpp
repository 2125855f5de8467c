#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <vector>

#include <mobeval.h>

namespace mobeval_cli {

namespace {

namespace fs = std::filesystem;

struct Box {
  int xmin, ymin, xmax, ymax;
};

std::string voc_document(int width, int height,
                         const std::vector<Box>& objects) {
  std::string xml = "<annotation>\n";
  xml += "  <size>\n";
  xml += "    <width>" + std::to_string(width) + "</width>\n";
  xml += "    <height>" + std::to_string(height) + "</height>\n";
  xml += "    <depth>3</depth>\n";
  xml += "  </size>\n";
  for (const Box& b : objects) {
    xml += "  <object>\n";
    xml += "    <name>person</name>\n";
    xml += "    <bndbox>\n";
    xml += "      <xmin>" + std::to_string(b.xmin) + "</xmin>\n";
    xml += "      <ymin>" + std::to_string(b.ymin) + "</ymin>\n";
    xml += "      <xmax>" + std::to_string(b.xmax) + "</xmax>\n";
    xml += "      <ymax>" + std::to_string(b.ymax) + "</ymax>\n";
    xml += "    </bndbox>\n";
    xml += "  </object>\n";
  }
  xml += "</annotation>\n";
  return xml;
}

}  // namespace

int generate_fixtures(const FixtureOptions& options) {
  if (options.images < 1 || options.max_gt_per_image < 1 ||
      options.dets_per_gt < 1 || options.fp_per_image < 0 ||
      options.object_size < 4 ||
      options.image_width < 4 * options.object_size ||
      options.image_height < 4 * options.object_size) {
    std::cerr << "mobeval: error: unusable fixture configuration\n";
    return 2;
  }

  const fs::path root(options.output_dir);
  const fs::path ann_dir = root / "annotations";
  std::error_code ec;
  fs::create_directories(ann_dir, ec);
  if (ec) {
    std::cerr << "mobeval: error: cannot create " << ann_dir.string() << "\n";
    return 2;
  }

  std::mt19937 rng(options.seed);
  std::uniform_int_distribution<int> gt_count(1, options.max_gt_per_image);
  std::uniform_int_distribution<int> det_count(1, options.dets_per_gt);
  std::uniform_int_distribution<int> size_jitter(-options.object_size / 4,
                                                 options.object_size / 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution grouped(0.4);

  std::unique_ptr<mobeval_detections, void (*)(mobeval_detections*)> dets(
      mobeval_detections_new(), &mobeval_detections_free);

  std::size_t total_objects = 0;
  for (int image = 0; image < options.images; ++image) {
    char name[32];
    std::snprintf(name, sizeof name, "synth%04d", image);

    const int side = options.object_size;
    std::uniform_int_distribution<int> x_origin(0, options.image_width - 2 * side);
    std::uniform_int_distribution<int> y_origin(0,
                                                options.image_height - 2 * side);

    std::vector<Box> objects;
    const int n = gt_count(rng);
    while (static_cast<int>(objects.size()) < n) {
      const int base_x = x_origin(rng);
      const int base_y = y_origin(rng);
      // a group drops several objects near one anchor, mirroring how
      // people tend to appear together in search imagery
      const int group = grouped(rng)
                            ? std::min<int>(2 + static_cast<int>(unit(rng) * 3),
                                            n - static_cast<int>(objects.size()))
                            : 1;
      for (int g = 0; g < group; ++g) {
        const int dx = static_cast<int>(unit(rng) * side * 2.5);
        const int dy = static_cast<int>(unit(rng) * side * 2.5);
        const int w = side + size_jitter(rng);
        const int h = side + size_jitter(rng);
        const int xmin = std::clamp(base_x + dx, 0, options.image_width - w - 1);
        const int ymin = std::clamp(base_y + dy, 0, options.image_height - h - 1);
        objects.push_back(Box{xmin, ymin, xmin + w, ymin + h});
      }
    }
    total_objects += objects.size();

    std::ofstream xml(ann_dir / (std::string(name) + ".xml"), std::ios::binary);
    if (!xml) {
      std::cerr << "mobeval: error: cannot write annotation for " << name
                << "\n";
      return 1;
    }
    xml << voc_document(options.image_width, options.image_height, objects);

    // jittered detections around each object
    for (const Box& b : objects) {
      const int copies = det_count(rng);
      for (int c = 0; c < copies; ++c) {
        const double jx = (unit(rng) - 0.5) * side * 0.6;
        const double jy = (unit(rng) - 0.5) * side * 0.6;
        const double grow = 1.0 + (unit(rng) - 0.3) * 0.4;
        const double w = (b.xmax - b.xmin) * grow;
        const double h = (b.ymax - b.ymin) * grow;
        const double xmin = b.xmin + jx;
        const double ymin = b.ymin + jy;
        mobeval_detection record{name,       "person", 0.3 + 0.69 * unit(rng),
                                 xmin,       ymin,     xmin + w,
                                 ymin + h};
        if (mobeval_detections_push(dets.get(), &record) != MOBEVAL_OK) {
          std::cerr << "mobeval: error: " << mobeval_last_error() << "\n";
          return 1;
        }
      }
    }

    // low-confidence background clutter
    for (int f = 0; f < options.fp_per_image; ++f) {
      const double w = side * (0.5 + unit(rng));
      const double h = side * (0.5 + unit(rng));
      const double xmin = unit(rng) * (options.image_width - w - 1);
      const double ymin = unit(rng) * (options.image_height - h - 1);
      mobeval_detection record{name,       "person", 0.05 + 0.5 * unit(rng),
                               xmin,       ymin,     xmin + w,
                               ymin + h};
      if (mobeval_detections_push(dets.get(), &record) != MOBEVAL_OK) {
        std::cerr << "mobeval: error: " << mobeval_last_error() << "\n";
        return 1;
      }
    }
  }

  const fs::path dump = root / "detections.jsonl";
  if (mobeval_detections_write(dets.get(), dump.c_str(), "jsonl") !=
      MOBEVAL_OK) {
    std::cerr << "mobeval: error: " << mobeval_last_error() << "\n";
    return 1;
  }

  std::cerr << "wrote " << options.images << " annotation files ("
            << total_objects << " objects) and "
            << mobeval_detections_count(dets.get()) << " detections under "
            << root.string() << "\n";
  return 0;
}

}  // namespace mobeval_cli
