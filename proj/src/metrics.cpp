#include "metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "parallel.hpp"

namespace mobeval {

std::pair<double, double> precision_recall(const MatchSequence& m) {
  const std::size_t tp = m.true_positives();
  const std::size_t fp = m.outcomes.size() - tp;
  const double precision =
      tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = m.n_ground_truth == 0
                            ? 1.0
                            : static_cast<double>(tp) /
                                  static_cast<double>(m.n_ground_truth);
  return {precision, recall};
}

std::vector<PrPoint> pr_curve(const MatchSequence& m) {
  for (std::size_t i = 1; i < m.scores.size(); ++i) {
    if (m.scores[i] > m.scores[i - 1]) {
      throw std::invalid_argument("outcomes not score-sorted");
    }
  }

  std::vector<PrPoint> points;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < m.outcomes.size(); ++i) {
    if (m.outcomes[i]) {
      ++tp;
    } else {
      ++fp;
    }
    const bool closes_cutoff =
        i + 1 == m.outcomes.size() || m.scores[i + 1] != m.scores[i];
    if (closes_cutoff) {
      const double recall = m.n_ground_truth == 0
                                ? 1.0
                                : static_cast<double>(tp) /
                                      static_cast<double>(m.n_ground_truth);
      const double precision =
          static_cast<double>(tp) / static_cast<double>(tp + fp);
      points.push_back({recall, precision, m.scores[i]});
    }
  }
  return points;
}

std::vector<double> precision_envelope(std::span<const PrPoint> curve) {
  // recall is non-decreasing along the curve, so the maximum precision at
  // equal-or-greater recall is a suffix maximum
  std::vector<double> envelope(curve.size(), 0.0);
  double best = 0.0;
  for (std::size_t i = curve.size(); i-- > 0;) {
    best = std::max(best, curve[i].precision);
    envelope[i] = best;
  }
  return envelope;
}

double average_precision(std::span<const PrPoint> curve) {
  if (curve.empty()) return 0.0;
  const std::vector<double> envelope = precision_envelope(curve);
  double ap = 0.0;
  double previous_recall = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    ap += (curve[i].recall - previous_recall) * envelope[i];
    previous_recall = curve[i].recall;
  }
  return ap;
}

MetricsReport compute_metrics(const MatchSequence& m) {
  MetricsReport report;
  const auto [precision, recall] = precision_recall(m);
  report.precision = precision;
  report.recall = recall;
  report.average_precision = average_precision(pr_curve(m));
  report.true_positives = m.true_positives();
  report.false_positives = m.outcomes.size() - report.true_positives;
  report.false_negatives = m.n_ground_truth - report.true_positives;
  return report;
}

std::vector<SweepRow> threshold_sweep(std::span<const Detection> detections,
                                      std::span<const GroundTruth> labels,
                                      const SchemeParams& scheme,
                                      const BbaConfig& bba,
                                      std::span<const double> thresholds,
                                      int jobs) {
  if (thresholds.empty()) {
    throw std::invalid_argument("empty threshold grid");
  }
  for (double t : thresholds) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw std::invalid_argument("score threshold out of range [0, 1]");
    }
  }
  validate(scheme);
  if (bba.method == BbaMethod::kMob) validate(bba.mob);

  std::vector<SweepRow> rows(thresholds.size());
  parallel_for(thresholds.size(), jobs, [&](std::size_t i) {
    const double t = thresholds[i];
    const std::vector<Detection> aggregated = apply_bba(detections, bba, t);
    const MatchSequence matches = match_dataset(aggregated, labels, scheme);
    const MetricsReport report = compute_metrics(matches);
    rows[i] = {t, report.precision, report.recall, report.average_precision};
  });
  return rows;
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 10; ++i) grid.push_back(0.05 * i);
  return grid;
}

}  // namespace mobeval
