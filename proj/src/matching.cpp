#include "matching.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "parallel.hpp"

namespace mobeval {

namespace {

struct RawOutcome {
  std::uint8_t outcome;
  double score;
  std::size_t prediction;  // position within the prediction sequence
};

// Core of the generalized matcher; emits one record per TP claim plus one
// FP record for every prediction that claims nothing.
std::vector<RawOutcome> run_matcher(std::span<const Detection> predictions,
                                    std::span<const GroundTruth> labels,
                                    const SchemeParams& params) {
  for (std::size_t i = 1; i < predictions.size(); ++i) {
    if (predictions[i].score > predictions[i - 1].score) {
      throw std::invalid_argument("predictions not score-sorted");
    }
  }

  std::vector<RawOutcome> records;
  // live pool of unclaimed labels, kept in ascending input order
  std::vector<std::size_t> pool(labels.size());
  std::iota(pool.begin(), pool.end(), 0);

  std::vector<std::pair<double, std::size_t>> ranked;  // (iou, label index)
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    const Detection& pred = predictions[p];
    ranked.clear();
    for (std::size_t label : pool) {
      ranked.emplace_back(iou(pred.box, labels[label].box), label);
    }
    // descending IoU; stable keeps label input order on ties
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    std::size_t claimed = 0;
    std::vector<std::size_t> claimed_labels;
    for (const auto& [overlap, label] : ranked) {
      const bool size_ok =
          pred.box.area() > params.a_min * labels[label].box.area();
      if (overlap >= params.epsilon && claimed < params.g_max && size_ok) {
        claimed_labels.push_back(label);
        ++claimed;
        records.push_back({1, pred.score, p});
      }
    }
    if (claimed == 0) {
      records.push_back({0, pred.score, p});
    }
    if (!claimed_labels.empty()) {
      std::erase_if(pool, [&](std::size_t label) {
        return std::find(claimed_labels.begin(), claimed_labels.end(), label) !=
               claimed_labels.end();
      });
    }
  }
  return records;
}

}  // namespace

void validate(const SchemeParams& params) {
  if (!(params.epsilon >= 0.0 && params.epsilon <= 1.0)) {
    throw std::invalid_argument("matching iou threshold must be in [0, 1]");
  }
  if (params.g_max == 0) {
    throw std::invalid_argument("g_max must be positive");
  }
  if (!(params.a_min >= 0.0 && params.a_min <= 1.0)) {
    throw std::invalid_argument("minimum area ratio must be in [0, 1]");
  }
}

std::size_t MatchSequence::true_positives() const {
  return static_cast<std::size_t>(
      std::count(outcomes.begin(), outcomes.end(), std::uint8_t{1}));
}

MatchSequence match_boxes_generic(std::span<const Detection> predictions,
                                  std::span<const GroundTruth> labels,
                                  const SchemeParams& params) {
  validate(params);
  MatchSequence result;
  result.n_ground_truth = labels.size();
  for (const RawOutcome& r : run_matcher(predictions, labels, params)) {
    result.outcomes.push_back(r.outcome);
    result.scores.push_back(r.score);
  }
  return result;
}

MatchSequence match_dataset(std::span<const Detection> detections,
                            std::span<const GroundTruth> labels,
                            const SchemeParams& params, int jobs) {
  validate(params);
  const auto det_groups = group_by_image_class(detections);
  const auto label_groups = group_by_image_class(labels);

  struct GlobalRecord {
    std::uint8_t outcome;
    double score;
    const std::string* image_id;
    std::size_t input_index;  // originating detection's input position
  };

  std::vector<std::vector<GlobalRecord>> per_group(det_groups.size());
  parallel_for(det_groups.size(), jobs, [&](std::size_t g) {
    const auto& [key, det_indices] = det_groups[g];

    // detections sorted by descending score, ties by input order
    std::vector<std::size_t> order = det_indices;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return detections[a].score > detections[b].score;
    });
    std::vector<Detection> preds;
    preds.reserve(order.size());
    for (std::size_t i : order) preds.push_back(detections[i]);

    std::vector<GroundTruth> group_labels;
    auto it = std::lower_bound(
        label_groups.begin(), label_groups.end(), key,
        [](const auto& entry, const GroupKey& k) { return entry.first < k; });
    if (it != label_groups.end() && it->first == key) {
      for (std::size_t i : it->second) group_labels.push_back(labels[i]);
    }

    for (const RawOutcome& r : run_matcher(preds, group_labels, params)) {
      const std::size_t input_index = order[r.prediction];
      per_group[g].push_back(GlobalRecord{
          r.outcome, r.score, &detections[input_index].image_id, input_index});
    }
  });

  std::vector<GlobalRecord> all;
  for (const auto& records : per_group) {
    all.insert(all.end(), records.begin(), records.end());
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const GlobalRecord& a, const GlobalRecord& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (*a.image_id != *b.image_id) return *a.image_id < *b.image_id;
                     return a.input_index < b.input_index;
                   });

  MatchSequence merged;
  merged.n_ground_truth = labels.size();
  merged.outcomes.reserve(all.size());
  merged.scores.reserve(all.size());
  for (const GlobalRecord& r : all) {
    merged.outcomes.push_back(r.outcome);
    merged.scores.push_back(r.score);
  }
  return merged;
}

}  // namespace mobeval
