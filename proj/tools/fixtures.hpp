#pragma once

#include <cstdint>
#include <string>

namespace mobeval_cli {

// Synthetic dataset generator for demos and pipeline testing: VOC XML
// annotations plus a matching detection dump with jittered boxes around
// each labeled object and a few background false positives.
struct FixtureOptions {
  std::string output_dir;
  int images = 8;
  std::uint32_t seed = 0;
  int image_width = 4000;
  int image_height = 3000;
  int max_gt_per_image = 6;   // at least one object per image
  int dets_per_gt = 3;        // 1..n jittered detections per object
  int fp_per_image = 2;
  int object_size = 60;       // nominal object width/height in pixels
};

// Writes <output_dir>/annotations/*.xml and <output_dir>/detections.jsonl.
// Returns a process exit code (0 ok, 2 unusable configuration or output
// location, 1 write failure).
int generate_fixtures(const FixtureOptions& options);

}  // namespace mobeval_cli
