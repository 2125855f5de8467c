// Drives the installed CLI binary end to end. The binary path comes from
// the MOBEVAL_CLI_PATH compile definition set by the build.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream content;
  content << in.rdbuf();
  return content.str();
}

struct TempDir {
  fs::path path;

  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("mobeval_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path out = fs::temp_directory_path() /
                       ("mobeval_cli_out_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter));
  const fs::path err = fs::temp_directory_path() /
                       ("mobeval_cli_err_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter));
  ++counter;

  const std::string command = std::string(MOBEVAL_CLI_PATH) + " " + args +
                              " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(command.c_str());

  RunResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out);
  result.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return result;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::string voc_box(int xmin, int ymin, int xmax, int ymax) {
  return "<object><name>person</name><bndbox><xmin>" + std::to_string(xmin) +
         "</xmin><ymin>" + std::to_string(ymin) + "</ymin><xmax>" +
         std::to_string(xmax) + "</xmax><ymax>" + std::to_string(ymax) +
         "</ymax></bndbox></object>";
}

std::string voc_doc(const std::string& objects) {
  return "<annotation><size><width>4000</width><height>3000</height></size>" +
         objects + "</annotation>";
}

std::string jsonl_det(const std::string& image, double score, double xmin,
                      double ymin, double xmax, double ymax) {
  std::ostringstream line;
  line << "{\"image_id\":\"" << image << "\",\"class\":\"person\",\"score\":"
       << score << ",\"xmin\":" << xmin << ",\"ymin\":" << ymin
       << ",\"xmax\":" << xmax << ",\"ymax\":" << ymax << "}\n";
  return line.str();
}

// five clustered persons plus overlapping raw detections covering them
struct GroupFixture {
  TempDir dir{"group"};
  fs::path gt;
  fs::path dets;

  GroupFixture() {
    gt = dir.path / "annotations";
    fs::create_directories(gt);
    write_file(gt / "scene.xml",
               voc_doc(voc_box(100, 100, 160, 160) + voc_box(190, 120, 250, 180) +
                       voc_box(280, 110, 340, 170) + voc_box(140, 230, 200, 290) +
                       voc_box(250, 240, 310, 300)));
    dets = dir.path / "dets.jsonl";
    write_file(dets, jsonl_det("scene", 0.90, 90, 90, 180, 180) +
                         jsonl_det("scene", 0.85, 150, 100, 260, 200) +
                         jsonl_det("scene", 0.80, 240, 100, 350, 190) +
                         jsonl_det("scene", 0.75, 120, 200, 220, 300) +
                         jsonl_det("scene", 0.70, 200, 210, 330, 310) +
                         jsonl_det("scene", 0.65, 130, 130, 290, 260));
  }
};

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run("--help").exit_code == 0);
  CHECK(run("").exit_code == 2);
  CHECK(run("evaluate").exit_code == 2);              // missing required flags
  CHECK(run("frobnicate --x 1").exit_code == 2);      // unknown subcommand
}

TEST_CASE("gen-fixtures is deterministic per seed") {
  TempDir a("gen_a");
  TempDir b("gen_b");
  CHECK(run("gen-fixtures --output " + (a.path / "d").string() +
            " --images 3 --seed 11")
            .exit_code == 0);
  CHECK(run("gen-fixtures --output " + (b.path / "d").string() +
            " --images 3 --seed 11")
            .exit_code == 0);
  CHECK(slurp(a.path / "d" / "detections.jsonl") ==
        slurp(b.path / "d" / "detections.jsonl"));
  CHECK(slurp(a.path / "d" / "annotations" / "synth0000.xml") ==
        slurp(b.path / "d" / "annotations" / "synth0000.xml"));

  TempDir c("gen_c");
  CHECK(run("gen-fixtures --output " + (c.path / "d").string() +
            " --images 3 --seed 12")
            .exit_code == 0);
  CHECK(slurp(a.path / "d" / "detections.jsonl") !=
        slurp(c.path / "d" / "detections.jsonl"));
}

TEST_CASE("evaluate on the group fixture under both schemes") {
  GroupFixture fixture;

  SUBCASE("mob plus sar-apd finds every person") {
    const auto result = run("evaluate --gt-dir " + fixture.gt.string() +
                            " --detections " + fixture.dets.string() +
                            " --scheme sar-apd --bba mob");
    REQUIRE(result.exit_code == 0);
    const auto report = nlohmann::json::parse(result.out);
    CHECK(report["true_positives"] == 5);
    CHECK(report["false_positives"] == 0);
    CHECK(report["false_negatives"] == 0);
    CHECK(report["precision"] == 1.0);
    CHECK(report["recall"] == 1.0);
    CHECK(report.count("avg_time_per_image_s") == 0);
    CHECK(result.err.find("avg time per image") != std::string::npos);
  }

  SUBCASE("the same pipeline under voc2012 scores zero") {
    const auto result = run("evaluate --gt-dir " + fixture.gt.string() +
                            " --detections " + fixture.dets.string() +
                            " --scheme voc2012 --bba mob");
    REQUIRE(result.exit_code == 0);
    const auto report = nlohmann::json::parse(result.out);
    CHECK(report["true_positives"] == 0);
    CHECK(report["false_positives"] == 1);
    CHECK(report["false_negatives"] == 5);
  }

  SUBCASE("timing lands in the report only with --timing") {
    const auto result = run("evaluate --gt-dir " + fixture.gt.string() +
                            " --detections " + fixture.dets.string() +
                            " --scheme sar-apd --bba mob --timing");
    REQUIRE(result.exit_code == 0);
    const auto report = nlohmann::json::parse(result.out);
    CHECK(report.count("avg_time_per_image_s") == 1);
    CHECK(report["avg_time_per_image_s"].get<double>() >= 0.0);
  }

  SUBCASE("csv report carries the same numbers") {
    const auto result = run("evaluate --gt-dir " + fixture.gt.string() +
                            " --detections " + fixture.dets.string() +
                            " --scheme sar-apd --bba mob --format csv");
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.starts_with(
        "precision,recall,average_precision,true_positives,"));
    CHECK(result.out.find("\n1,1,1,5,0,0\n") != std::string::npos);
  }
}

TEST_CASE("evaluate with perfect detections reports all ones") {
  TempDir dir("perfect");
  const fs::path gt = dir.path / "gt";
  fs::create_directories(gt);
  write_file(gt / "img1.xml", voc_doc(voc_box(10, 10, 70, 70)));
  write_file(gt / "img2.xml", voc_doc(voc_box(200, 200, 260, 260)));
  const fs::path dets = dir.path / "dets.jsonl";
  write_file(dets, jsonl_det("img1", 0.9, 10, 10, 70, 70) +
                       jsonl_det("img2", 0.8, 200, 200, 260, 260));

  const auto result = run("evaluate --gt-dir " + gt.string() +
                          " --detections " + dets.string());
  REQUIRE(result.exit_code == 0);
  const auto report = nlohmann::json::parse(result.out);
  CHECK(report["precision"] == 1.0);
  CHECK(report["recall"] == 1.0);
  CHECK(report["average_precision"] == 1.0);
}

TEST_CASE("aggregate") {
  GroupFixture fixture;

  SUBCASE("bba none with threshold zero reproduces a canonical dump") {
    // canonicalize the hand-written fixture through the library first
    const fs::path canonical = fixture.dir.path / "canonical.jsonl";
    REQUIRE(run("aggregate --detections " + fixture.dets.string() +
                " --bba none --score-threshold 0 --output " +
                canonical.string())
                .exit_code == 0);
    const auto result = run("aggregate --detections " + canonical.string() +
                            " --bba none --score-threshold 0");
    REQUIRE(result.exit_code == 0);
    CHECK(result.out == slurp(canonical));
    // per-image counts go to stderr
    CHECK(result.err.find("scene: 6 -> 6") != std::string::npos);
  }

  SUBCASE("score threshold filters the dump") {
    const auto result = run("aggregate --detections " + fixture.dets.string() +
                            " --bba none --score-threshold 0.78");
    REQUIRE(result.exit_code == 0);
    CHECK(result.err.find("scene: 6 -> 3") != std::string::npos);
  }

  SUBCASE("mob collapses the fixture to one box per cluster") {
    const auto result = run("aggregate --detections " + fixture.dets.string() +
                            " --bba mob");
    REQUIRE(result.exit_code == 0);
    CHECK(result.err.find("scene: 6 -> 1") != std::string::npos);
    const auto record = nlohmann::json::parse(result.out);
    CHECK(record["xmin"] == 90.0);
    CHECK(record["ymax"] == 310.0);
  }

  SUBCASE("nms on a two-box overlap keeps one") {
    TempDir dir("nmsfix");
    const fs::path dets = dir.path / "two.jsonl";
    write_file(dets, jsonl_det("i", 0.9, 0, 0, 10, 10) +
                         jsonl_det("i", 0.8, 1, 1, 11, 11));
    const auto result = run("aggregate --detections " + dets.string() +
                            " --bba nms --score-threshold 0");
    REQUIRE(result.exit_code == 0);
    const auto record = nlohmann::json::parse(result.out);
    CHECK(record["score"] == 0.9);
    CHECK(result.err.find("i: 2 -> 1") != std::string::npos);
  }

  SUBCASE("csv output format") {
    const auto result = run("aggregate --detections " + fixture.dets.string() +
                            " --bba none --score-threshold 0 --format csv");
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.starts_with("image_id,class,score,xmin,ymin,xmax,ymax\n"));
  }
}

TEST_CASE("sweep") {
  GroupFixture fixture;

  SUBCASE("default grid emits ten rows with non-increasing recall") {
    const auto result = run("sweep --gt-dir " + fixture.gt.string() +
                            " --detections " + fixture.dets.string() +
                            " --scheme sar-apd --bba mob");
    REQUIRE(result.exit_code == 0);
    std::istringstream rows(result.out);
    std::string line;
    std::getline(rows, line);
    CHECK(line == "score_threshold,precision,recall,average_precision");
    int count = 0;
    double previous_recall = 2.0;
    while (std::getline(rows, line)) {
      if (line.empty()) continue;
      ++count;
      const auto first = line.find(',');
      const auto second = line.find(',', first + 1);
      const auto third = line.find(',', second + 1);
      const double recall =
          std::stod(line.substr(second + 1, third - second - 1));
      CHECK(recall <= previous_recall);
      previous_recall = recall;
    }
    CHECK(count == 10);
  }

  SUBCASE("single-value grid matches evaluate") {
    const auto sweep_result = run("sweep --gt-dir " + fixture.gt.string() +
                                  " --detections " + fixture.dets.string() +
                                  " --scheme sar-apd --bba mob --thresholds "
                                  "0.05:0.05:1 --format json");
    REQUIRE(sweep_result.exit_code == 0);
    const auto rows = nlohmann::json::parse(sweep_result.out);
    REQUIRE(rows.size() == 1);

    const auto eval_result = run("evaluate --gt-dir " + fixture.gt.string() +
                                 " --detections " + fixture.dets.string() +
                                 " --scheme sar-apd --bba mob "
                                 "--score-threshold 0.05");
    const auto report = nlohmann::json::parse(eval_result.out);
    CHECK(rows[0]["precision"] == report["precision"]);
    CHECK(rows[0]["recall"] == report["recall"]);
    CHECK(rows[0]["average_precision"] == report["average_precision"]);
  }

  SUBCASE("malformed grid is a usage error") {
    CHECK(run("sweep --gt-dir " + fixture.gt.string() + " --detections " +
              fixture.dets.string() + " --thresholds nonsense")
              .exit_code == 2);
  }
}

TEST_CASE("pr-curve") {
  GroupFixture fixture;

  SUBCASE("perfect pipeline gives the single point (1, 1)") {
    const auto result = run("pr-curve --gt-dir " + fixture.gt.string() +
                            " --detections " + fixture.dets.string() +
                            " --scheme sar-apd --bba mob");
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.starts_with("recall,precision,score_cutoff\n"));
    CHECK(result.out.find("\n1,1,0.775\n") != std::string::npos);
  }

  SUBCASE("envelope column appears on request") {
    const auto result = run("pr-curve --gt-dir " + fixture.gt.string() +
                            " --detections " + fixture.dets.string() +
                            " --scheme sar-apd --bba mob --envelope");
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.starts_with(
        "recall,precision,score_cutoff,precision_envelope\n"));
  }

  SUBCASE("empty detections give a bare header") {
    TempDir dir("empty");
    const fs::path dets = dir.path / "none.jsonl";
    write_file(dets, "");
    const auto result = run("pr-curve --gt-dir " + fixture.gt.string() +
                            " --detections " + dets.string());
    REQUIRE(result.exit_code == 0);
    CHECK(result.out == "recall,precision,score_cutoff\n");
  }
}

TEST_CASE("exit codes") {
  GroupFixture fixture;

  SUBCASE("unreadable detection file") {
    CHECK(run("evaluate --gt-dir " + fixture.gt.string() +
              " --detections /nonexistent.jsonl")
              .exit_code == 2);
  }

  SUBCASE("empty ground-truth directory") {
    TempDir dir("nogt");
    CHECK(run("evaluate --gt-dir " + dir.path.string() + " --detections " +
              fixture.dets.string())
              .exit_code == 2);
  }

  SUBCASE("mob flags with bba nms") {
    CHECK(run("aggregate --detections " + fixture.dets.string() +
              " --bba nms --mob-iters 5")
              .exit_code == 2);
  }

  SUBCASE("malformed detection content is a runtime error") {
    TempDir dir("badcontent");
    const fs::path dets = dir.path / "bad.jsonl";
    write_file(dets, "{\"image_id\":\"a\",\"class\":\"person\",\"score\":2.0,"
                     "\"xmin\":0,\"ymin\":0,\"xmax\":1,\"ymax\":1}\n");
    const auto result = run("aggregate --detections " + dets.string());
    CHECK(result.exit_code == 1);
    CHECK(result.err.find("mobeval: error:") != std::string::npos);
  }

  SUBCASE("detections for unknown images warn but succeed") {
    TempDir dir("ghost");
    const fs::path dets = dir.path / "ghost.jsonl";
    write_file(dets, jsonl_det("ghost", 0.9, 0, 0, 10, 10));
    const auto result = run("evaluate --gt-dir " + fixture.gt.string() +
                            " --detections " + dets.string());
    CHECK(result.exit_code == 0);
    CHECK(result.err.find("ghost") != std::string::npos);
    const auto report = nlohmann::json::parse(result.out);
    CHECK(report["false_positives"] == 1);
    CHECK(report["false_negatives"] == 5);
  }
}

TEST_CASE("outputs are byte-identical across runs and job counts") {
  TempDir dir("determinism");
  const fs::path data = dir.path / "data";
  REQUIRE(run("gen-fixtures --output " + data.string() +
              " --images 12 --seed 3")
              .exit_code == 0);

  const std::string common = "--gt-dir " + (data / "annotations").string() +
                             " --detections " + (data / "detections.jsonl").string() +
                             " --scheme sar-apd --bba mob";
  const fs::path out1 = dir.path / "r1.json";
  const fs::path out2 = dir.path / "r2.json";
  const fs::path out4 = dir.path / "r4.json";
  REQUIRE(run("evaluate " + common + " --jobs 1 --output " + out1.string())
              .exit_code == 0);
  REQUIRE(run("evaluate " + common + " --jobs 1 --output " + out2.string())
              .exit_code == 0);
  REQUIRE(run("evaluate " + common + " --jobs 4 --output " + out4.string())
              .exit_code == 0);
  const std::string r1 = slurp(out1);
  CHECK(r1 == slurp(out2));
  CHECK(r1 == slurp(out4));

  const fs::path sweep1 = dir.path / "s1.csv";
  const fs::path sweep4 = dir.path / "s4.csv";
  REQUIRE(run("sweep " + common + " --jobs 1 --output " + sweep1.string())
              .exit_code == 0);
  REQUIRE(run("sweep " + common + " --jobs 4 --output " + sweep4.string())
              .exit_code == 0);
  CHECK(slurp(sweep1) == slurp(sweep4));
}
