#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "aggregation.hpp"
#include "matching.hpp"

namespace mobeval {

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double score_cutoff = 0.0;
};

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double average_precision = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::optional<double> avg_time_per_image_s;
};

/// (precision, recall) with the empty-denominator conventions:
/// precision is 1 when there are no outcomes, recall is 1 when there is no
/// ground truth.
std::pair<double, double> precision_recall(const MatchSequence& m);

/// Sweeps a score cutoff across the distinct outcome scores from high to
/// low; outcomes sharing a score enter together. Recall is non-decreasing
/// along the returned curve. Throws std::invalid_argument when outcomes
/// are not sorted by non-increasing score.
std::vector<PrPoint> pr_curve(const MatchSequence& m);

/// Per-point interpolated precision: the maximum precision at any equal-or-
/// greater recall (the monotone envelope used for average precision).
std::vector<double> precision_envelope(std::span<const PrPoint> curve);

/// All-points interpolated average precision: integral of the monotone
/// precision envelope over recall from 0 to the maximum recall reached.
/// An empty curve yields 0.
double average_precision(std::span<const PrPoint> curve);

/// precision_recall + average_precision + TP/FP/FN counts in one report.
MetricsReport compute_metrics(const MatchSequence& m);

struct SweepRow {
  double score_threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double average_precision = 0.0;
};

/// For each threshold, runs the configured aggregation at that score
/// threshold, matches against the labels, and reports the metric triple.
/// Throws std::invalid_argument on an empty or out-of-range grid.
std::vector<SweepRow> threshold_sweep(std::span<const Detection> detections,
                                      std::span<const GroundTruth> labels,
                                      const SchemeParams& scheme,
                                      const BbaConfig& bba,
                                      std::span<const double> thresholds,
                                      int jobs = 1);

/// The calibration grid 0.05, 0.10, ..., 0.50.
std::vector<double> default_threshold_grid();

}  // namespace mobeval
