#include "detection.hpp"

#include <stdexcept>
#include <string>

namespace mobeval {

void validate(const Detection& d) {
  if (!(d.score >= 0.0 && d.score <= 1.0)) {
    throw std::invalid_argument("score out of range [0, 1]: " +
                                std::to_string(d.score));
  }
  if (d.class_label.empty()) {
    throw std::invalid_argument("empty class label");
  }
}

void validate(const GroundTruth& g) {
  if (g.class_label.empty()) {
    throw std::invalid_argument("empty class label");
  }
}

}  // namespace mobeval
