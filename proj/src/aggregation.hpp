#pragma once

#include <optional>
#include <span>
#include <vector>

#include "detection.hpp"

namespace mobeval {

enum class MergeStrategy { kEnclose, kAverage };

/// Full MOB parameterization. Defaults follow the values the algorithm is
/// normally run with: merge any positive overlap, three passes, output
/// boxes at most 100x the largest input box.
struct MobConfig {
  double omega = 0.0;              // boxes link when IoU > omega; must be < 1
  int max_iterations = 3;          // >= 1
  double max_inflation = 100.0;    // > 0; infinity disables the area bound
  std::optional<std::size_t> top_k;  // per-cluster pruning to the k best scores
  MergeStrategy strategy = MergeStrategy::kEnclose;
  // When true the area bound is recomputed from each iteration's input
  // boxes; when false it stays fixed at the first iteration's value.
  bool area_bound_per_iteration = true;
};

/// Throws std::invalid_argument when a field is out of range.
void validate(const MobConfig& config);

/// A set of detections treated as one merge unit. cluster_overlaps returns
/// connected components of the IoU > omega graph; subdivide may split them
/// further. `indices` are the members' positions in the clustered input and
/// stay parallel to `members`, in ascending order.
struct OverlapCluster {
  std::vector<Detection> members;
  std::vector<std::size_t> indices;
};

/// Greedy non-maximum suppression. Drops detections scoring below
/// `score_threshold`, then repeatedly keeps the best remaining detection
/// and discards every detection whose IoU with it exceeds `omega`.
/// Output is sorted by descending score (score ties keep input order).
/// Precondition: all detections share one image_id and class_label.
std::vector<Detection> nms(std::span<const Detection> dets, double omega,
                           double score_threshold);

/// Single-linkage overlap clustering: two detections share a cluster iff
/// they are connected by a chain of pairwise IoU > omega links. Clusters
/// are ordered by lowest member index, members by input order.
std::vector<OverlapCluster> cluster_overlaps(std::span<const Detection> dets,
                                             double omega);

/// Collapses a cluster into one detection. With top_k set, only the k
/// highest-scoring members (ties by input order) are retained first.
/// kEnclose returns the enclosing box of the retained members, kAverage
/// their coordinate-wise mean box; the score is the retained members'
/// mean score.
Detection merge_cluster(const OverlapCluster& cluster, MergeStrategy strategy,
                        std::optional<std::size_t> top_k = std::nullopt);

/// Splits the cluster until no piece's enclosing box exceeds `max_area`:
/// members are ordered by box center along the longer axis of the cluster's
/// enclosing box and cut at the median into ceil(n/2) + floor(n/2) halves.
/// A singleton that still exceeds the bound is returned unchanged.
std::vector<OverlapCluster> subdivide(const OverlapCluster& cluster,
                                      double max_area);

/// One MOB pass, recorded for bound verification and debugging.
struct MobIteration {
  std::vector<Detection> input;
  double area_bound = 0.0;  // infinity when unbounded
  std::vector<Detection> output;
};

/// Merging of overlapping boxes. Drops detections scoring below
/// `score_threshold`, then runs up to max_iterations passes of
/// cluster -> subdivide -> merge, stopping early once a single box remains
/// or a pass leaves the box set unchanged. Output is sorted by descending
/// score. Precondition: all detections share one image_id and class_label.
std::vector<Detection> mob(std::span<const Detection> dets,
                           const MobConfig& config, double score_threshold,
                           std::vector<MobIteration>* trace = nullptr);

/// Dataset-level entry points: split by (image_id, class_label), aggregate
/// each group (in parallel when jobs > 1), and concatenate the groups in
/// sorted key order.
std::vector<Detection> nms_dataset(std::span<const Detection> dets, double omega,
                                   double score_threshold, int jobs = 1);
std::vector<Detection> mob_dataset(std::span<const Detection> dets,
                                   const MobConfig& config,
                                   double score_threshold, int jobs = 1);

enum class BbaMethod { kNone, kNms, kMob };

struct BbaConfig {
  BbaMethod method = BbaMethod::kNone;
  double nms_omega = 0.5;
  MobConfig mob;
};

/// Applies the configured aggregation. kNone only filters by score and
/// preserves input order.
std::vector<Detection> apply_bba(std::span<const Detection> dets,
                                 const BbaConfig& config, double score_threshold,
                                 int jobs = 1);

}  // namespace mobeval
