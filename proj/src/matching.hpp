#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "detection.hpp"

namespace mobeval {

/// Ground-truth matching parameters. epsilon is the IoU threshold for a
/// match, g_max caps how many labels one prediction may claim, and a_min
/// is the minimum prediction/label area ratio (strict) for a match.
struct SchemeParams {
  double epsilon = 0.5;
  std::size_t g_max = 1;
  double a_min = 0.0;

  static constexpr std::size_t kUnbounded =
      std::numeric_limits<std::size_t>::max();

  /// One-to-one matching at IoU >= 0.5, no size gate.
  static SchemeParams voc2012() { return {0.5, 1, 0.0}; }
  /// One-to-many matching at IoU >= 0.0025 with a quarter-area size gate.
  static SchemeParams sar_apd() { return {0.0025, kUnbounded, 0.25}; }
};

void validate(const SchemeParams& params);

/// Binary TP/FP outcome sequence paired with the originating prediction
/// scores; the sole input all metrics are computed from.
struct MatchSequence {
  std::vector<std::uint8_t> outcomes;  // 1 = TP, 0 = FP
  std::vector<double> scores;
  std::size_t n_ground_truth = 0;

  std::size_t true_positives() const;
};

/// Matches score-sorted predictions against labels. For each prediction,
/// labels still in the pool are ranked by descending IoU (ties by label
/// input order) and claimed while IoU >= epsilon, fewer than g_max labels
/// are claimed, and area(pred) > a_min * area(label); each claim records a
/// TP. A prediction that claims nothing records a single FP. Claimed labels
/// leave the pool before the next prediction. Labels that fail only the
/// size gate or the g_max cap stay available for later predictions.
/// Throws std::invalid_argument when predictions are not sorted by
/// non-increasing score or when prediction/label image or class disagree.
MatchSequence match_boxes_generic(std::span<const Detection> predictions,
                                  std::span<const GroundTruth> labels,
                                  const SchemeParams& params);

/// Groups detections and labels by (image_id, class_label), matches each
/// group (sorting detections by descending score, ties by input order), and
/// globally orders the concatenated outcomes by descending score with ties
/// broken by image_id then input order. n_ground_truth is the total label
/// count.
MatchSequence match_dataset(std::span<const Detection> detections,
                            std::span<const GroundTruth> labels,
                            const SchemeParams& params, int jobs = 1);

}  // namespace mobeval
