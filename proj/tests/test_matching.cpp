#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "matching.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mobeval;

namespace {

Detection pred(double xmin, double ymin, double xmax, double ymax, double score,
               const std::string& image = "img0") {
  return Detection{BBox(xmin, ymin, xmax, ymax), score, "person", image};
}

GroundTruth label(double xmin, double ymin, double xmax, double ymax,
                  const std::string& image = "img0") {
  return GroundTruth{BBox(xmin, ymin, xmax, ymax), "person", image};
}

// five 60x60 ground-truth boxes in a tight group plus one large prediction
// covering the whole group
struct GroupScene {
  std::vector<GroundTruth> labels;
  std::vector<Detection> preds;
};

GroupScene group_scene() {
  GroupScene scene;
  const double offsets[5][2] = {
      {0, 0}, {90, 20}, {180, 10}, {40, 130}, {150, 140}};
  for (const auto& offset : offsets) {
    scene.labels.push_back(label(offset[0], offset[1], offset[0] + 60,
                                 offset[1] + 60));
  }
  scene.preds.push_back(pred(-20, -20, 260, 220, 0.9));
  return scene;
}

std::vector<std::uint8_t> outcomes_of(const MatchSequence& m) {
  return m.outcomes;
}

}  // namespace

TEST_CASE("scheme presets and validation") {
  const SchemeParams voc = SchemeParams::voc2012();
  CHECK(voc.epsilon == 0.5);
  CHECK(voc.g_max == 1);
  CHECK(voc.a_min == 0.0);

  const SchemeParams sar = SchemeParams::sar_apd();
  CHECK(sar.epsilon == 0.0025);
  CHECK(sar.g_max == SchemeParams::kUnbounded);
  CHECK(sar.a_min == 0.25);

  CHECK_THROWS_AS(validate(SchemeParams{1.5, 1, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SchemeParams{0.5, 0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(SchemeParams{0.5, 1, -0.1}), std::invalid_argument);
}

TEST_CASE("one large prediction against a tight group") {
  const GroupScene scene = group_scene();

  SUBCASE("sar-apd scheme awards one TP per covered label") {
    const auto m =
        match_boxes_generic(scene.preds, scene.labels, SchemeParams::sar_apd());
    CHECK(outcomes_of(m) == std::vector<std::uint8_t>{1, 1, 1, 1, 1});
    CHECK(m.n_ground_truth == 5);
    for (double s : m.scores) CHECK(s == 0.9);
  }

  SUBCASE("voc2012 scheme scores the same prediction as one FP") {
    for (const auto& l : scene.labels) {
      CHECK(iou(scene.preds[0].box, l.box) < 0.5);
    }
    const auto m =
        match_boxes_generic(scene.preds, scene.labels, SchemeParams::voc2012());
    CHECK(outcomes_of(m) == std::vector<std::uint8_t>{0});
    CHECK(m.true_positives() == 0);
  }
}

TEST_CASE("duplicate detections become false positives one-to-one") {
  const std::vector<GroundTruth> labels{label(0, 0, 60, 60)};
  const std::vector<Detection> preds{pred(2, 2, 62, 62, 0.9),
                                     pred(-2, -2, 58, 58, 0.8)};
  for (const auto& p : preds) CHECK(iou(p.box, labels[0].box) > 0.5);

  const auto m = match_boxes_generic(preds, labels, SchemeParams::voc2012());
  CHECK(outcomes_of(m) == std::vector<std::uint8_t>{1, 0});
}

TEST_CASE("the size gate blocks tiny predictions at full containment") {
  const std::vector<GroundTruth> labels{label(0, 0, 60, 60)};
  const std::vector<Detection> preds{pred(25, 25, 35, 35, 0.9)};  // area 100
  // IoU = 100/3600, enough for the relaxed threshold
  CHECK(iou(preds[0].box, labels[0].box) >= 0.0025);

  SchemeParams params = SchemeParams::sar_apd();  // a_min = 0.25
  const auto gated = match_boxes_generic(preds, labels, params);
  CHECK(outcomes_of(gated) == std::vector<std::uint8_t>{0});

  params.a_min = 0.0;  // lifting the gate flips the outcome
  const auto open = match_boxes_generic(preds, labels, params);
  CHECK(outcomes_of(open) == std::vector<std::uint8_t>{1});
}

TEST_CASE("a label passed over by the size gate stays claimable") {
  // big label first in IoU order for the small prediction; the small
  // prediction fails the gate against it but must not consume it
  const std::vector<GroundTruth> labels{label(0, 0, 100, 100)};
  const std::vector<Detection> preds{pred(40, 40, 50, 50, 0.9),
                                     pred(5, 5, 95, 95, 0.8)};
  SchemeParams params{0.001, 1, 0.25};
  const auto m = match_boxes_generic(preds, labels, params);
  CHECK(outcomes_of(m) == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("g_max caps claims per prediction") {
  const std::vector<GroundTruth> labels{label(0, 0, 10, 10), label(20, 0, 30, 10),
                                        label(40, 0, 50, 10)};
  const std::vector<Detection> preds{pred(-5, -5, 55, 15, 0.9)};
  SchemeParams params{0.001, 2, 0.0};
  const auto m = match_boxes_generic(preds, labels, params);
  CHECK(outcomes_of(m) == std::vector<std::uint8_t>{1, 1});
  CHECK(m.true_positives() == 2);
}

TEST_CASE("labels are claimed in descending IoU order") {
  // the prediction overlaps two labels; the better-aligned one is claimed
  const std::vector<GroundTruth> labels{label(0, 0, 10, 10),
                                        label(6, 0, 16, 10)};
  const std::vector<Detection> preds{pred(5, 0, 15, 10, 0.9),
                                     pred(0, 0, 10, 10, 0.8)};
  SchemeParams params{0.01, 1, 0.0};
  const auto m = match_boxes_generic(preds, labels, params);
  // first prediction claims the second label (higher IoU), leaving the
  // first label for the second prediction
  CHECK(outcomes_of(m) == std::vector<std::uint8_t>{1, 1});
}

TEST_CASE("unsorted predictions are rejected") {
  const std::vector<Detection> preds{pred(0, 0, 10, 10, 0.5),
                                     pred(20, 20, 30, 30, 0.9)};
  CHECK_THROWS_WITH_AS(
      match_boxes_generic(preds, {}, SchemeParams::voc2012()),
      "predictions not score-sorted", std::invalid_argument);
}

TEST_CASE("voc2012 matching equals the classic reference matcher") {
  std::mt19937 rng(59);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    auto preds = test::random_detections(rng, 10, 200.0, 80.0);
    std::stable_sort(preds.begin(), preds.end(),
                     [](const Detection& a, const Detection& b) {
                       return a.score > b.score;
                     });
    std::vector<GroundTruth> labels;
    for (const BBox& b : test::random_boxes(rng, 10, 200.0, 80.0)) {
      labels.push_back(GroundTruth{b, "person", "img0"});
    }

    const auto m = match_boxes_generic(preds, labels, SchemeParams::voc2012());
    CHECK(m.outcomes == test::voc_match_oracle(preds, labels, 0.5));
    CHECK(m.outcomes.size() == preds.size());  // one-to-one scheme
  }
}

TEST_CASE("outcome sequence is scale invariant") {
  std::mt19937 rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    auto preds = test::random_detections(rng, 10, 200.0, 80.0);
    std::stable_sort(preds.begin(), preds.end(),
                     [](const Detection& a, const Detection& b) {
                       return a.score > b.score;
                     });
    std::vector<GroundTruth> labels;
    for (const BBox& b : test::random_boxes(rng, 10, 200.0, 80.0)) {
      labels.push_back(GroundTruth{b, "person", "img0"});
    }

    for (const SchemeParams& params :
         {SchemeParams::voc2012(), SchemeParams::sar_apd()}) {
      const auto baseline = match_boxes_generic(preds, labels, params);
      for (const double s : {0.1, 10.0}) {
        auto scaled_preds = preds;
        for (auto& p : scaled_preds) {
          p.box = BBox(p.box.xmin * s, p.box.ymin * s, p.box.xmax * s,
                       p.box.ymax * s);
        }
        auto scaled_labels = labels;
        for (auto& l : scaled_labels) {
          l.box = BBox(l.box.xmin * s, l.box.ymin * s, l.box.xmax * s,
                       l.box.ymax * s);
        }
        const auto scaled =
            match_boxes_generic(scaled_preds, scaled_labels, params);
        CHECK(scaled.outcomes == baseline.outcomes);
      }
    }
  }
}

TEST_CASE("tp conservation and g_max cap on random instances") {
  std::mt19937 rng(67);
  std::uniform_real_distribution<double> eps(0.0, 0.6);
  std::uniform_int_distribution<std::size_t> cap(1, 4);
  for (int trial = 0; trial < 500; ++trial) {
    auto preds = test::random_detections(rng, 12, 150.0, 80.0);
    std::stable_sort(preds.begin(), preds.end(),
                     [](const Detection& a, const Detection& b) {
                       return a.score > b.score;
                     });
    std::vector<GroundTruth> labels;
    for (const BBox& b : test::random_boxes(rng, 12, 150.0, 80.0)) {
      labels.push_back(GroundTruth{b, "person", "img0"});
    }
    SchemeParams params{eps(rng), trial % 2 == 0 ? cap(rng)
                                                 : SchemeParams::kUnbounded,
                        trial % 3 == 0 ? 0.25 : 0.0};

    const auto m = match_boxes_generic(preds, labels, params);
    CHECK(m.true_positives() <= m.n_ground_truth);

    // random scores are distinct, so a prediction's claims are exactly the
    // TPs carrying its score
    if (params.g_max != SchemeParams::kUnbounded) {
      std::size_t run = 0;
      for (std::size_t i = 0; i < m.outcomes.size(); ++i) {
        if (i > 0 && m.scores[i] != m.scores[i - 1]) run = 0;
        if (m.outcomes[i] == 1) {
          ++run;
          CHECK(run <= params.g_max);
        }
      }
    }
  }
}

TEST_CASE("monotone relaxation: lowering epsilon never loses TPs") {
  std::mt19937 rng(71);
  for (int trial = 0; trial < 300; ++trial) {
    auto preds = test::random_detections(rng, 10, 150.0, 80.0);
    std::stable_sort(preds.begin(), preds.end(),
                     [](const Detection& a, const Detection& b) {
                       return a.score > b.score;
                     });
    std::vector<GroundTruth> labels;
    for (const BBox& b : test::random_boxes(rng, 10, 150.0, 80.0)) {
      labels.push_back(GroundTruth{b, "person", "img0"});
    }

    std::size_t previous = 0;
    for (const double eps : {0.7, 0.5, 0.3, 0.1, 0.01, 0.0}) {
      const auto m =
          match_boxes_generic(preds, labels, SchemeParams{eps, 1, 0.0});
      // iterate thresholds downward: TPs may only grow
      if (eps != 0.7) CHECK(m.true_positives() >= previous);
      previous = m.true_positives();
    }
  }
}

TEST_CASE("match_dataset") {
  SUBCASE("two perfect single-detection images") {
    const std::vector<GroundTruth> labels{label(0, 0, 60, 60, "a"),
                                          label(10, 10, 70, 70, "b")};
    const std::vector<Detection> dets{pred(0, 0, 60, 60, 0.8, "a"),
                                      pred(10, 10, 70, 70, 0.9, "b")};
    const auto m = match_dataset(dets, labels, SchemeParams::voc2012());
    CHECK(m.outcomes == std::vector<std::uint8_t>{1, 1});
    CHECK(m.n_ground_truth == 2);
    CHECK(m.scores == std::vector<double>{0.9, 0.8});
  }

  SUBCASE("detections on an unlabeled image are all FPs") {
    const std::vector<GroundTruth> labels{label(0, 0, 60, 60, "a")};
    const std::vector<Detection> dets{pred(0, 0, 60, 60, 0.9, "ghost")};
    const auto m = match_dataset(dets, labels, SchemeParams::voc2012());
    CHECK(m.outcomes == std::vector<std::uint8_t>{0});
    CHECK(m.n_ground_truth == 1);
  }

  SUBCASE("class labels partition matching") {
    std::vector<GroundTruth> labels{label(0, 0, 60, 60, "a")};
    labels[0].class_label = "car";
    const std::vector<Detection> dets{pred(0, 0, 60, 60, 0.9, "a")};
    const auto m = match_dataset(dets, labels, SchemeParams::voc2012());
    CHECK(m.outcomes == std::vector<std::uint8_t>{0});  // person vs car
  }

  SUBCASE("empty detections keep the full ground-truth count") {
    const std::vector<GroundTruth> labels{label(0, 0, 60, 60, "a"),
                                          label(0, 0, 60, 60, "b")};
    const auto m = match_dataset({}, labels, SchemeParams::voc2012());
    CHECK(m.outcomes.empty());
    CHECK(m.n_ground_truth == 2);
  }

  SUBCASE("global order matches the flatten-and-sort oracle") {
    std::mt19937 rng(73);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<Detection> dets;
      std::vector<GroundTruth> labels;
      for (const char* image : {"img0", "img1", "img2"}) {
        for (auto& d : test::random_detections(rng, 8, 150.0, 80.0)) {
          d.image_id = image;
          dets.push_back(d);
        }
        for (const BBox& b : test::random_boxes(rng, 8, 150.0, 80.0)) {
          labels.push_back(GroundTruth{b, "person", image});
        }
      }
      const auto m = match_dataset(dets, labels, SchemeParams::voc2012());

      // oracle: match each image separately, then stable-sort records
      struct Record {
        std::uint8_t outcome;
        double score;
        std::string image;
      };
      std::vector<Record> expected;
      for (const char* image : {"img0", "img1", "img2"}) {
        std::vector<Detection> group;
        for (const auto& d : dets) {
          if (d.image_id == image) group.push_back(d);
        }
        std::stable_sort(group.begin(), group.end(),
                         [](const Detection& a, const Detection& b) {
                           return a.score > b.score;
                         });
        std::vector<GroundTruth> group_labels;
        for (const auto& l : labels) {
          if (l.image_id == image) group_labels.push_back(l);
        }
        const auto seq =
            match_boxes_generic(group, group_labels, SchemeParams::voc2012());
        for (std::size_t i = 0; i < seq.outcomes.size(); ++i) {
          expected.push_back({seq.outcomes[i], seq.scores[i], image});
        }
      }
      std::stable_sort(expected.begin(), expected.end(),
                       [](const Record& a, const Record& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.image < b.image;
                       });

      REQUIRE(m.outcomes.size() == expected.size());
      for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(m.outcomes[i] == expected[i].outcome);
        CHECK(m.scores[i] == expected[i].score);
      }
      CHECK(m.n_ground_truth == labels.size());
    }
  }

  SUBCASE("jobs do not change the outcome") {
    std::mt19937 rng(79);
    std::vector<Detection> dets;
    std::vector<GroundTruth> labels;
    for (int image = 0; image < 10; ++image) {
      const std::string id = "img" + std::to_string(image);
      for (auto& d : test::random_detections(rng, 10, 150.0, 80.0)) {
        d.image_id = id;
        dets.push_back(d);
      }
      for (const BBox& b : test::random_boxes(rng, 10, 150.0, 80.0)) {
        labels.push_back(GroundTruth{b, "person", id});
      }
    }
    const auto serial = match_dataset(dets, labels, SchemeParams::sar_apd(), 1);
    const auto parallel =
        match_dataset(dets, labels, SchemeParams::sar_apd(), 4);
    CHECK(serial.outcomes == parallel.outcomes);
    CHECK(serial.scores == parallel.scores);
  }
}
