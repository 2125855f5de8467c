#pragma once

#include <algorithm>
#include <compare>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geometry.hpp"

namespace mobeval {

/// One predicted box with its confidence, as emitted by a detector.
struct Detection {
  BBox box;
  double score = 0.0;  // in [0, 1]
  std::string class_label;
  std::string image_id;
};

/// One annotated box.
struct GroundTruth {
  BBox box;
  std::string class_label;
  std::string image_id;
};

/// Throws std::invalid_argument when the score is outside [0, 1] or the
/// class label is empty. Box validity is enforced by BBox itself.
void validate(const Detection& d);
void validate(const GroundTruth& g);

struct GroupKey {
  std::string image_id;
  std::string class_label;

  auto operator<=>(const GroupKey&) const = default;
};

/// Splits items into (image_id, class_label) groups. Groups come back
/// sorted by key; indices within a group keep input order.
template <class T>
std::vector<std::pair<GroupKey, std::vector<std::size_t>>> group_by_image_class(
    std::span<const T> items) {
  std::vector<std::pair<GroupKey, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) {
    GroupKey key{items[i].image_id, items[i].class_label};
    auto it = std::lower_bound(
        groups.begin(), groups.end(), key,
        [](const auto& entry, const GroupKey& k) { return entry.first < k; });
    if (it == groups.end() || it->first != key) {
      it = groups.insert(it, {std::move(key), {}});
    }
    it->second.push_back(i);
  }
  return groups;
}

}  // namespace mobeval
