#include "aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <stdexcept>

#include "parallel.hpp"

namespace mobeval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Detection> filter_by_score(std::span<const Detection> dets,
                                       double score_threshold) {
  std::vector<Detection> kept;
  kept.reserve(dets.size());
  for (const Detection& d : dets) {
    if (d.score >= score_threshold) kept.push_back(d);
  }
  return kept;
}

void sort_by_descending_score(std::vector<Detection>& dets) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) {
                     return a.score > b.score;
                   });
}

// Merged boxes can tie on score (means of disjoint member sets), so the
// final order falls back to coordinates to stay independent of the input
// permutation.
void sort_merged(std::vector<Detection>& dets) {
  std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto key = [](const Detection& d) {
      return std::tie(d.box.xmin, d.box.ymin, d.box.xmax, d.box.ymax);
    };
    return key(a) < key(b);
  });
}

std::vector<BBox> member_boxes(const OverlapCluster& cluster) {
  std::vector<BBox> boxes;
  boxes.reserve(cluster.members.size());
  for (const Detection& d : cluster.members) boxes.push_back(d.box);
  return boxes;
}

double largest_box_area(std::span<const Detection> dets) {
  double largest = 0.0;
  for (const Detection& d : dets) largest = std::max(largest, d.box.area());
  return largest;
}

void subdivide_into(const OverlapCluster& cluster, double max_area,
                    std::vector<OverlapCluster>& out) {
  if (cluster.members.size() <= 1) {
    out.push_back(cluster);
    return;
  }
  const std::vector<BBox> boxes = member_boxes(cluster);
  const BBox bounds = enclose(boxes);
  if (bounds.area() <= max_area) {
    out.push_back(cluster);
    return;
  }

  const bool split_x = bounds.width() >= bounds.height();
  const std::size_t n = cluster.members.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double ca = split_x ? boxes[a].center_x()
                                               : boxes[a].center_y();
                     const double cb = split_x ? boxes[b].center_x()
                                               : boxes[b].center_y();
                     return ca < cb;
                   });

  const std::size_t first_half = (n + 1) / 2;
  OverlapCluster low, high;
  for (std::size_t pos = 0; pos < n; ++pos) {
    OverlapCluster& target = pos < first_half ? low : high;
    target.members.push_back(cluster.members[order[pos]]);
    target.indices.push_back(cluster.indices[order[pos]]);
  }

  // restore ascending input order within each half
  for (OverlapCluster* piece : {&low, &high}) {
    std::vector<std::size_t> by_index(piece->members.size());
    std::iota(by_index.begin(), by_index.end(), 0);
    std::sort(by_index.begin(), by_index.end(), [&](std::size_t a, std::size_t b) {
      return piece->indices[a] < piece->indices[b];
    });
    OverlapCluster sorted;
    for (std::size_t pos : by_index) {
      sorted.members.push_back(std::move(piece->members[pos]));
      sorted.indices.push_back(piece->indices[pos]);
    }
    *piece = std::move(sorted);
  }

  subdivide_into(low, max_area, out);
  subdivide_into(high, max_area, out);
}

template <class Fn>
std::vector<Detection> per_group(std::span<const Detection> dets, int jobs,
                                 Fn&& aggregate_group) {
  const auto groups = group_by_image_class(dets);
  std::vector<std::vector<Detection>> results(groups.size());
  parallel_for(groups.size(), jobs, [&](std::size_t g) {
    std::vector<Detection> group_dets;
    group_dets.reserve(groups[g].second.size());
    for (std::size_t i : groups[g].second) group_dets.push_back(dets[i]);
    results[g] = aggregate_group(group_dets);
  });
  std::vector<Detection> merged;
  for (auto& r : results) {
    merged.insert(merged.end(), std::make_move_iterator(r.begin()),
                  std::make_move_iterator(r.end()));
  }
  return merged;
}

}  // namespace

void validate(const MobConfig& config) {
  if (!(config.omega >= 0.0 && config.omega < 1.0)) {
    throw std::invalid_argument("mob iou threshold must be in [0, 1)");
  }
  if (config.max_iterations < 1) {
    throw std::invalid_argument("mob iterations must be at least 1");
  }
  if (!(config.max_inflation > 0.0)) {
    throw std::invalid_argument("mob inflation factor must be positive");
  }
  if (config.top_k && *config.top_k == 0) {
    throw std::invalid_argument("mob top-k must be positive");
  }
}

std::vector<Detection> nms(std::span<const Detection> dets, double omega,
                           double score_threshold) {
  std::vector<Detection> pool = filter_by_score(dets, score_threshold);
  sort_by_descending_score(pool);

  std::vector<Detection> kept;
  std::vector<bool> suppressed(pool.size(), false);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(pool[i]);
    for (std::size_t k = i + 1; k < pool.size(); ++k) {
      if (!suppressed[k] && iou(pool[i].box, pool[k].box) > omega) {
        suppressed[k] = true;
      }
    }
  }
  return kept;
}

std::vector<OverlapCluster> cluster_overlaps(std::span<const Detection> dets,
                                             double omega) {
  const std::size_t n = dets.size();
  std::vector<bool> visited(n, false);
  std::vector<OverlapCluster> clusters;
  std::vector<std::size_t> stack;

  for (std::size_t seed = 0; seed < n; ++seed) {
    if (visited[seed]) continue;
    std::vector<std::size_t> component{seed};
    visited[seed] = true;
    stack.assign(1, seed);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      for (std::size_t k = 0; k < n; ++k) {
        if (!visited[k] && iou(dets[cur].box, dets[k].box) > omega) {
          visited[k] = true;
          stack.push_back(k);
          component.push_back(k);
        }
      }
    }
    std::sort(component.begin(), component.end());
    OverlapCluster cluster;
    for (std::size_t i : component) cluster.members.push_back(dets[i]);
    cluster.indices = std::move(component);
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

Detection merge_cluster(const OverlapCluster& cluster, MergeStrategy strategy,
                        std::optional<std::size_t> top_k) {
  const std::size_t n = cluster.members.size();
  if (n == 0) throw std::invalid_argument("empty cluster");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cluster.members[a].score != cluster.members[b].score) {
      return cluster.members[a].score > cluster.members[b].score;
    }
    return cluster.indices[a] < cluster.indices[b];
  });
  const std::size_t keep = top_k ? std::min(*top_k, n) : n;

  std::vector<BBox> boxes;
  double score_sum = 0.0;
  boxes.reserve(keep);
  for (std::size_t pos = 0; pos < keep; ++pos) {
    const Detection& d = cluster.members[order[pos]];
    boxes.push_back(d.box);
    score_sum += d.score;
  }

  BBox merged = strategy == MergeStrategy::kEnclose
                    ? enclose(boxes)
                    : [&] {
                        double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
                        for (const BBox& b : boxes) {
                          xmin += b.xmin;
                          ymin += b.ymin;
                          xmax += b.xmax;
                          ymax += b.ymax;
                        }
                        const double c = static_cast<double>(keep);
                        return BBox(xmin / c, ymin / c, xmax / c, ymax / c);
                      }();

  return Detection{merged, score_sum / static_cast<double>(keep),
                   cluster.members.front().class_label,
                   cluster.members.front().image_id};
}

std::vector<OverlapCluster> subdivide(const OverlapCluster& cluster,
                                      double max_area) {
  if (cluster.members.empty()) throw std::invalid_argument("empty cluster");
  std::vector<OverlapCluster> out;
  subdivide_into(cluster, max_area, out);
  return out;
}

std::vector<Detection> mob(std::span<const Detection> dets,
                           const MobConfig& config, double score_threshold,
                           std::vector<MobIteration>* trace) {
  validate(config);
  std::vector<Detection> current = filter_by_score(dets, score_threshold);
  if (current.empty()) return current;

  const bool bounded = std::isfinite(config.max_inflation);
  const double fixed_bound =
      bounded ? config.max_inflation * largest_box_area(current) : kInf;

  for (int iteration = 0; iteration < config.max_iterations; ++iteration) {
    double area_bound = kInf;
    if (bounded) {
      area_bound = config.area_bound_per_iteration
                       ? config.max_inflation * largest_box_area(current)
                       : fixed_bound;
    }

    std::vector<OverlapCluster> pieces;
    for (const OverlapCluster& cluster : cluster_overlaps(current, config.omega)) {
      subdivide_into(cluster, area_bound, pieces);
    }

    bool all_singletons = true;
    std::vector<Detection> merged;
    merged.reserve(pieces.size());
    for (const OverlapCluster& piece : pieces) {
      all_singletons = all_singletons && piece.members.size() == 1;
      merged.push_back(merge_cluster(piece, config.strategy, config.top_k));
    }

    if (trace) trace->push_back({std::move(current), area_bound, merged});
    current = std::move(merged);

    if (current.size() == 1) break;   // everything merged
    if (all_singletons) break;        // fixed point
  }

  sort_merged(current);
  return current;
}

std::vector<Detection> nms_dataset(std::span<const Detection> dets, double omega,
                                   double score_threshold, int jobs) {
  return per_group(dets, jobs, [&](std::span<const Detection> group) {
    return nms(group, omega, score_threshold);
  });
}

std::vector<Detection> mob_dataset(std::span<const Detection> dets,
                                   const MobConfig& config,
                                   double score_threshold, int jobs) {
  validate(config);
  return per_group(dets, jobs, [&](std::span<const Detection> group) {
    return mob(group, config, score_threshold);
  });
}

std::vector<Detection> apply_bba(std::span<const Detection> dets,
                                 const BbaConfig& config, double score_threshold,
                                 int jobs) {
  switch (config.method) {
    case BbaMethod::kNone:
      return filter_by_score(dets, score_threshold);
    case BbaMethod::kNms:
      return nms_dataset(dets, config.nms_omega, score_threshold, jobs);
    case BbaMethod::kMob:
      return mob_dataset(dets, config.mob, score_threshold, jobs);
  }
  throw std::invalid_argument("unknown aggregation method");
}

}  // namespace mobeval
