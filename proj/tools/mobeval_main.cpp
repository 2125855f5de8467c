// mobeval command line: aggregate detector outputs, evaluate them against
// VOC XML ground truth, sweep score thresholds, and dump PR curves. Links
// against the C API only.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <mobeval.h>

#include "fixtures.hpp"

namespace {

using DetectionsPtr =
    std::unique_ptr<mobeval_detections, void (*)(mobeval_detections*)>;
using AnnotationsPtr =
    std::unique_ptr<mobeval_annotations, void (*)(mobeval_annotations*)>;
using MatchPtr = std::unique_ptr<mobeval_match, void (*)(mobeval_match*)>;

DetectionsPtr own(mobeval_detections* p) {
  return DetectionsPtr(p, &mobeval_detections_free);
}
AnnotationsPtr own(mobeval_annotations* p) {
  return AnnotationsPtr(p, &mobeval_annotations_free);
}
MatchPtr own(mobeval_match* p) { return MatchPtr(p, &mobeval_match_free); }

int exit_code_for(mobeval_status status) {
  switch (status) {
    case MOBEVAL_OK:
      return 0;
    case MOBEVAL_ERROR_INVALID_ARGUMENT:
    case MOBEVAL_ERROR_IO:
      return 2;  // usage or unusable inputs
    default:
      return 1;  // parse or internal failure while processing content
  }
}

int fail(mobeval_status status) {
  std::cerr << "mobeval: error: " << mobeval_last_error() << "\n";
  return exit_code_for(status);
}

int fail_usage(const std::string& message) {
  std::cerr << "mobeval: error: " << message << "\n";
  return 2;
}

void print_warnings() {
  const std::string warnings = mobeval_last_warnings();
  if (warnings.empty()) return;
  std::size_t start = 0;
  while (start < warnings.size()) {
    std::size_t end = warnings.find('\n', start);
    if (end == std::string::npos) end = warnings.size();
    std::cerr << "mobeval: warning: " << warnings.substr(start, end - start)
              << "\n";
    start = end + 1;
  }
}

int write_text_output(const std::string& text, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) return fail_usage("cannot write output file: " + output);
  out << text;
  return 0;
}

// ---------------------------------------------------------------------
// shared option blocks
// ---------------------------------------------------------------------

struct BbaOptions {
  std::string method = "none";
  double score_threshold = -1.0;  // negative: pick the per-method default
  double nms_iou = 0.5;
  double mob_iou = 0.0;
  int mob_iters = 3;
  double mob_inflation = 100.0;  // <= 0 disables the bound
  long mob_top_k = 0;
  std::string mob_strategy = "enclose";
  bool mob_fixed_bound = false;

  CLI::Option* nms_iou_opt = nullptr;
  std::vector<CLI::Option*> mob_opts;
};

void add_bba_options(CLI::App* cmd, BbaOptions& options) {
  cmd->add_option("--bba", options.method, "Aggregation method")
      ->check(CLI::IsMember({"none", "nms", "mob"}))
      ->capture_default_str();
  cmd->add_option("--score-threshold,-t", options.score_threshold,
                  "Drop detections scoring below this before aggregation "
                  "(default 0 for none, 0.25 for nms, 0.05 for mob)");
  options.nms_iou_opt =
      cmd->add_option("--nms-iou", options.nms_iou,
                      "NMS suppression IoU threshold")
          ->capture_default_str();
  options.mob_opts = {
      cmd->add_option("--mob-iou", options.mob_iou,
                      "MOB overlap IoU threshold (boxes link when IoU exceeds "
                      "it)")
          ->capture_default_str(),
      cmd->add_option("--mob-iters", options.mob_iters,
                      "Maximum MOB merge passes")
          ->capture_default_str(),
      cmd->add_option("--mob-inflation", options.mob_inflation,
                      "Merged box area bound as a multiple of the largest "
                      "input box; 0 or less disables it")
          ->capture_default_str(),
      cmd->add_option("--mob-top-k", options.mob_top_k,
                      "Keep only the k best-scoring boxes per cluster"),
      cmd->add_option("--mob-strategy", options.mob_strategy,
                      "Cluster merge strategy")
          ->check(CLI::IsMember({"enclose", "average"}))
          ->capture_default_str(),
      cmd->add_flag("--mob-fixed-bound", options.mob_fixed_bound,
                    "Freeze the area bound at the first pass instead of "
                    "recomputing it each pass"),
  };
}

// flags for a method that is not selected are configuration errors
int check_bba_consistency(const BbaOptions& options) {
  if (options.method != "nms" && options.nms_iou_opt->count() > 0) {
    return fail_usage("--nms-iou requires --bba nms");
  }
  if (options.method != "mob") {
    for (const CLI::Option* opt : options.mob_opts) {
      if (opt->count() > 0) {
        return fail_usage(opt->get_name() + " requires --bba mob");
      }
    }
  }
  return 0;
}

mobeval_bba_params to_params(const BbaOptions& options) {
  mobeval_bba_params params;
  mobeval_bba_params_defaults(&params);
  if (options.method == "nms") params.method = MOBEVAL_BBA_NMS;
  if (options.method == "mob") params.method = MOBEVAL_BBA_MOB;
  params.nms_iou = options.nms_iou;
  params.mob.iou_threshold = options.mob_iou;
  params.mob.max_iterations = options.mob_iters;
  params.mob.max_inflation = options.mob_inflation;
  params.mob.top_k = options.mob_top_k;
  params.mob.merge_strategy = options.mob_strategy == "average"
                                  ? MOBEVAL_MERGE_AVERAGE
                                  : MOBEVAL_MERGE_ENCLOSE;
  params.mob.bound_per_iteration = options.mob_fixed_bound ? 0 : 1;
  return params;
}

double effective_threshold(const BbaOptions& options) {
  if (options.score_threshold >= 0.0) return options.score_threshold;
  if (options.method == "nms") return 0.25;
  if (options.method == "mob") return 0.05;
  return 0.0;
}

struct SchemeOptions {
  std::string name = "voc2012";
  double eps = -1.0;
  long gmax = -1;
  double amin = -1.0;

  CLI::Option* eps_opt = nullptr;
  CLI::Option* gmax_opt = nullptr;
  CLI::Option* amin_opt = nullptr;
};

void add_scheme_options(CLI::App* cmd, SchemeOptions& options) {
  cmd->add_option("--scheme", options.name, "Ground-truth matching scheme")
      ->check(CLI::IsMember({"voc2012", "sar-apd", "custom"}))
      ->capture_default_str();
  options.eps_opt = cmd->add_option(
      "--eps", options.eps, "Matching IoU threshold (overrides the scheme)");
  options.gmax_opt =
      cmd->add_option("--gmax", options.gmax,
                      "Maximum labels one prediction may match; 0 means "
                      "unlimited (overrides the scheme)");
  options.amin_opt = cmd->add_option(
      "--amin", options.amin,
      "Minimum prediction/label area ratio (overrides the scheme)");
}

mobeval_scheme_params to_params(const SchemeOptions& options) {
  mobeval_scheme_params params;
  if (options.name == "sar-apd") {
    mobeval_scheme_params_sar_apd(&params);
  } else {
    mobeval_scheme_params_voc2012(&params);  // also the custom baseline
  }
  if (options.eps_opt->count() > 0) params.iou_threshold = options.eps;
  if (options.gmax_opt->count() > 0) {
    params.max_matches_per_prediction = options.gmax;
  }
  if (options.amin_opt->count() > 0) params.min_area_ratio = options.amin;
  return params;
}

int to_format(const std::string& name) {
  return name == "csv" ? MOBEVAL_FORMAT_CSV : MOBEVAL_FORMAT_JSON;
}

// ---------------------------------------------------------------------
// input loading
// ---------------------------------------------------------------------

int load_detections(const std::string& path, DetectionsPtr& out) {
  mobeval_detections* raw = nullptr;
  const mobeval_status status =
      mobeval_detections_read(path.c_str(), nullptr, &raw);
  if (status != MOBEVAL_OK) return fail(status);
  print_warnings();
  out = own(raw);
  return 0;
}

int load_annotations(const std::string& dir, AnnotationsPtr& out) {
  mobeval_annotations* raw = nullptr;
  const mobeval_status status = mobeval_annotations_read_dir(dir.c_str(), &raw);
  if (status != MOBEVAL_OK) return fail(status);
  print_warnings();
  if (mobeval_annotations_image_count(raw) == 0) {
    mobeval_annotations_free(raw);
    return fail_usage("no annotation files in " + dir);
  }
  out = own(raw);
  return 0;
}

void warn_unknown_images(const mobeval_detections* dets,
                         const mobeval_annotations* anns) {
  std::set<std::string> known;
  for (std::size_t i = 0; i < mobeval_annotations_image_count(anns); ++i) {
    known.insert(mobeval_annotations_image_id(anns, i));
  }
  std::set<std::string> warned;
  for (std::size_t i = 0; i < mobeval_detections_count(dets); ++i) {
    mobeval_detection record{};
    mobeval_detections_get(dets, i, &record);
    const std::string image = record.image_id;
    if (!known.count(image) && warned.insert(image).second) {
      std::cerr << "mobeval: warning: image '" << image
                << "' has no annotation file; treating it as zero ground "
                   "truth\n";
    }
  }
}

// ---------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------

int run_aggregate(const std::string& det_file, const BbaOptions& bba,
                  const std::string& format, const std::string& output,
                  int jobs) {
  if (int code = check_bba_consistency(bba)) return code;
  mobeval_set_parallelism(jobs);

  DetectionsPtr dets(nullptr, &mobeval_detections_free);
  if (int code = load_detections(det_file, dets)) return code;

  const mobeval_bba_params params = to_params(bba);
  mobeval_detections* raw = nullptr;
  const mobeval_status status =
      mobeval_aggregate(dets.get(), &params, effective_threshold(bba), &raw);
  if (status != MOBEVAL_OK) return fail(status);
  DetectionsPtr aggregated = own(raw);

  // per-image counts before and after
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < mobeval_detections_count(dets.get()); ++i) {
    mobeval_detection record{};
    mobeval_detections_get(dets.get(), i, &record);
    counts[record.image_id].first++;
  }
  for (std::size_t i = 0; i < mobeval_detections_count(aggregated.get()); ++i) {
    mobeval_detection record{};
    mobeval_detections_get(aggregated.get(), i, &record);
    counts[record.image_id].second++;
  }
  for (const auto& [image, pair] : counts) {
    std::cerr << image << ": " << pair.first << " -> " << pair.second << "\n";
  }

  if (output.empty() || output == "-") {
    // stream the dump through a temporary file-less path: write to stdout
    // via the same serializer the file path uses
    const char* tmp = "/dev/stdout";
    const mobeval_status write_status =
        mobeval_detections_write(aggregated.get(), tmp, format.c_str());
    if (write_status != MOBEVAL_OK) return fail(write_status);
    return 0;
  }
  const mobeval_status write_status = mobeval_detections_write(
      aggregated.get(), output.c_str(), format.c_str());
  if (write_status != MOBEVAL_OK) return fail(write_status);
  return 0;
}

struct EvalInputs {
  DetectionsPtr dets{nullptr, &mobeval_detections_free};
  AnnotationsPtr anns{nullptr, &mobeval_annotations_free};
};

int load_eval_inputs(const std::string& gt_dir, const std::string& det_file,
                     EvalInputs& inputs) {
  if (int code = load_annotations(gt_dir, inputs.anns)) return code;
  if (int code = load_detections(det_file, inputs.dets)) return code;
  warn_unknown_images(inputs.dets.get(), inputs.anns.get());
  return 0;
}

int run_evaluate(const std::string& gt_dir, const std::string& det_file,
                 const SchemeOptions& scheme, const BbaOptions& bba,
                 const std::string& format, const std::string& output,
                 bool timing, int jobs) {
  if (int code = check_bba_consistency(bba)) return code;
  mobeval_set_parallelism(jobs);

  EvalInputs inputs;
  if (int code = load_eval_inputs(gt_dir, det_file, inputs)) return code;

  const mobeval_bba_params bba_params = to_params(bba);
  const mobeval_scheme_params scheme_params = to_params(scheme);

  const auto start = std::chrono::steady_clock::now();
  mobeval_detections* aggregated_raw = nullptr;
  mobeval_status status = mobeval_aggregate(
      inputs.dets.get(), &bba_params, effective_threshold(bba), &aggregated_raw);
  if (status != MOBEVAL_OK) return fail(status);
  DetectionsPtr aggregated = own(aggregated_raw);

  mobeval_match* match_raw = nullptr;
  status = mobeval_match_dataset(aggregated.get(), inputs.anns.get(),
                                 &scheme_params, &match_raw);
  if (status != MOBEVAL_OK) return fail(status);
  MatchPtr match = own(match_raw);
  const auto stop = std::chrono::steady_clock::now();

  mobeval_metrics metrics{};
  status = mobeval_metrics_compute(match.get(), &metrics);
  if (status != MOBEVAL_OK) return fail(status);

  const std::size_t images = mobeval_annotations_image_count(inputs.anns.get());
  const double seconds = std::chrono::duration<double>(stop - start).count();
  metrics.avg_time_per_image_s = seconds / static_cast<double>(images);
  std::cerr << "avg time per image: " << metrics.avg_time_per_image_s << " s ("
            << images << " images)\n";

  char* text = nullptr;
  status = mobeval_metrics_format(&metrics, to_format(format), timing ? 1 : 0,
                                  &text);
  if (status != MOBEVAL_OK) return fail(status);
  const std::string report(text);
  mobeval_string_free(text);
  return write_text_output(report, output);
}

int parse_threshold_grid(const std::string& spec, std::vector<double>& grid) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 ||
      step <= 0.0 || lo > hi || lo < 0.0 || hi > 1.0) {
    return fail_usage("bad --thresholds; expected lo:hi:step within [0,1]");
  }
  grid.clear();
  for (int i = 0;; ++i) {
    const double value = lo + step * i;
    if (value > hi + 1e-9) break;
    grid.push_back(value);
  }
  return 0;
}

int run_sweep(const std::string& gt_dir, const std::string& det_file,
              const SchemeOptions& scheme, const BbaOptions& bba,
              const std::string& thresholds, const std::string& format,
              const std::string& output, int jobs) {
  if (int code = check_bba_consistency(bba)) return code;
  mobeval_set_parallelism(jobs);

  std::vector<double> grid;
  if (int code = parse_threshold_grid(thresholds, grid)) return code;

  EvalInputs inputs;
  if (int code = load_eval_inputs(gt_dir, det_file, inputs)) return code;

  const mobeval_bba_params bba_params = to_params(bba);
  const mobeval_scheme_params scheme_params = to_params(scheme);

  std::vector<mobeval_sweep_row> rows(grid.size());
  mobeval_status status = mobeval_threshold_sweep(
      inputs.dets.get(), inputs.anns.get(), &scheme_params, &bba_params,
      grid.data(), grid.size(), rows.data());
  if (status != MOBEVAL_OK) return fail(status);

  char* text = nullptr;
  status = mobeval_sweep_format(rows.data(), rows.size(), to_format(format),
                                &text);
  if (status != MOBEVAL_OK) return fail(status);
  const std::string table(text);
  mobeval_string_free(text);
  return write_text_output(table, output);
}

int run_pr_curve(const std::string& gt_dir, const std::string& det_file,
                 const SchemeOptions& scheme, const BbaOptions& bba,
                 bool envelope, const std::string& format,
                 const std::string& output, int jobs) {
  if (int code = check_bba_consistency(bba)) return code;
  mobeval_set_parallelism(jobs);

  EvalInputs inputs;
  if (int code = load_eval_inputs(gt_dir, det_file, inputs)) return code;

  const mobeval_bba_params bba_params = to_params(bba);
  const mobeval_scheme_params scheme_params = to_params(scheme);

  mobeval_detections* aggregated_raw = nullptr;
  mobeval_status status = mobeval_aggregate(
      inputs.dets.get(), &bba_params, effective_threshold(bba), &aggregated_raw);
  if (status != MOBEVAL_OK) return fail(status);
  DetectionsPtr aggregated = own(aggregated_raw);

  mobeval_match* match_raw = nullptr;
  status = mobeval_match_dataset(aggregated.get(), inputs.anns.get(),
                                 &scheme_params, &match_raw);
  if (status != MOBEVAL_OK) return fail(status);
  MatchPtr match = own(match_raw);

  std::size_t count = 0;
  status = mobeval_pr_curve(match.get(), nullptr, 0, &count);
  if (status != MOBEVAL_OK) return fail(status);
  std::vector<mobeval_pr_point> points(count);
  if (count > 0) {
    status = mobeval_pr_curve(match.get(), points.data(), count, &count);
    if (status != MOBEVAL_OK) return fail(status);
  }

  std::vector<double> env;
  if (envelope && count > 0) {
    env.resize(count);
    status = mobeval_pr_envelope(points.data(), count, env.data());
    if (status != MOBEVAL_OK) return fail(status);
  }

  char* text = nullptr;
  status = mobeval_pr_curve_format(points.data(), count,
                                   env.empty() ? nullptr : env.data(),
                                   to_format(format), &text);
  if (status != MOBEVAL_OK) return fail(status);
  const std::string curve(text);
  mobeval_string_free(text);
  return write_text_output(curve, output);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounding-box aggregation (NMS, MOB) and detection evaluation "
               "against VOC XML ground truth"};
  app.require_subcommand(1);

  // aggregate ---------------------------------------------------------
  auto* aggregate = app.add_subcommand(
      "aggregate", "Postprocess a detection dump and write the result");
  std::string agg_dets, agg_format = "jsonl", agg_output;
  int agg_jobs = 1;
  BbaOptions agg_bba;
  aggregate->add_option("--detections,-d", agg_dets, "Detection dump file")
      ->required();
  add_bba_options(aggregate, agg_bba);
  aggregate->add_option("--format,-f", agg_format, "Output dump format")
      ->check(CLI::IsMember({"jsonl", "json", "csv"}))
      ->capture_default_str();
  aggregate->add_option("--output,-o", agg_output,
                        "Output file (stdout when omitted)");
  aggregate->add_option("--jobs,-j", agg_jobs, "Worker threads")
      ->capture_default_str();

  // evaluate ----------------------------------------------------------
  auto* evaluate = app.add_subcommand(
      "evaluate", "Aggregate, match against ground truth, and report metrics");
  std::string eval_gt, eval_dets, eval_format = "json", eval_output;
  bool eval_timing = false;
  int eval_jobs = 1;
  BbaOptions eval_bba;
  SchemeOptions eval_scheme;
  evaluate->add_option("--gt-dir,-g", eval_gt, "VOC XML annotation directory")
      ->required();
  evaluate->add_option("--detections,-d", eval_dets, "Detection dump file")
      ->required();
  add_scheme_options(evaluate, eval_scheme);
  add_bba_options(evaluate, eval_bba);
  evaluate->add_option("--format,-f", eval_format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  evaluate->add_option("--output,-o", eval_output,
                       "Report file (stdout when omitted)");
  evaluate->add_flag("--timing", eval_timing,
                     "Include the measured avg_time_per_image_s in the report "
                     "(timing always prints to stderr)");
  evaluate->add_option("--jobs,-j", eval_jobs, "Worker threads")
      ->capture_default_str();

  // sweep ---------------------------------------------------------------
  auto* sweep = app.add_subcommand(
      "sweep", "Metric table over a score-threshold calibration grid");
  std::string sweep_gt, sweep_dets, sweep_format = "csv", sweep_output;
  std::string sweep_thresholds = "0.05:0.5:0.05";
  int sweep_jobs = 1;
  BbaOptions sweep_bba;
  SchemeOptions sweep_scheme;
  sweep->add_option("--gt-dir,-g", sweep_gt, "VOC XML annotation directory")
      ->required();
  sweep->add_option("--detections,-d", sweep_dets, "Detection dump file")
      ->required();
  add_scheme_options(sweep, sweep_scheme);
  add_bba_options(sweep, sweep_bba);
  sweep->add_option("--thresholds", sweep_thresholds,
                    "Score threshold grid as lo:hi:step")
      ->capture_default_str();
  sweep->add_option("--format,-f", sweep_format, "Table format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sweep->add_option("--output,-o", sweep_output,
                    "Table file (stdout when omitted)");
  sweep->add_option("--jobs,-j", sweep_jobs, "Worker threads")
      ->capture_default_str();

  // pr-curve ------------------------------------------------------------
  auto* pr = app.add_subcommand("pr-curve",
                                "Precision-recall curve after matching");
  std::string pr_gt, pr_dets, pr_format = "csv", pr_output;
  bool pr_envelope = false;
  int pr_jobs = 1;
  BbaOptions pr_bba;
  SchemeOptions pr_scheme;
  pr->add_option("--gt-dir,-g", pr_gt, "VOC XML annotation directory")
      ->required();
  pr->add_option("--detections,-d", pr_dets, "Detection dump file")->required();
  add_scheme_options(pr, pr_scheme);
  add_bba_options(pr, pr_bba);
  pr->add_flag("--envelope", pr_envelope,
               "Add the interpolated precision envelope column");
  pr->add_option("--format,-f", pr_format, "Curve format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  pr->add_option("--output,-o", pr_output, "Curve file (stdout when omitted)");
  pr->add_option("--jobs,-j", pr_jobs, "Worker threads")
      ->capture_default_str();

  // gen-fixtures ----------------------------------------------------------
  auto* gen = app.add_subcommand(
      "gen-fixtures",
      "Generate a synthetic VOC dataset with matching detections");
  mobeval_cli::FixtureOptions fixture_options;
  gen->add_option("--output,-o", fixture_options.output_dir,
                  "Destination directory")
      ->required();
  gen->add_option("--images", fixture_options.images, "Number of images")
      ->capture_default_str();
  gen->add_option("--seed", fixture_options.seed, "Generator seed")
      ->capture_default_str();
  gen->add_option("--image-width", fixture_options.image_width, "Image width")
      ->capture_default_str();
  gen->add_option("--image-height", fixture_options.image_height,
                  "Image height")
      ->capture_default_str();
  gen->add_option("--max-gt", fixture_options.max_gt_per_image,
                  "Maximum objects per image")
      ->capture_default_str();
  gen->add_option("--dets-per-gt", fixture_options.dets_per_gt,
                  "Maximum detections per object")
      ->capture_default_str();
  gen->add_option("--fp-per-image", fixture_options.fp_per_image,
                  "Background false positives per image")
      ->capture_default_str();
  gen->add_option("--object-size", fixture_options.object_size,
                  "Nominal object size in pixels")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int cli_code = app.exit(e);  // prints help or the error message
    return cli_code == 0 ? 0 : 2;
  }

  if (aggregate->parsed()) {
    return run_aggregate(agg_dets, agg_bba, agg_format, agg_output, agg_jobs);
  }
  if (evaluate->parsed()) {
    return run_evaluate(eval_gt, eval_dets, eval_scheme, eval_bba, eval_format,
                        eval_output, eval_timing, eval_jobs);
  }
  if (sweep->parsed()) {
    return run_sweep(sweep_gt, sweep_dets, sweep_scheme, sweep_bba,
                     sweep_thresholds, sweep_format, sweep_output, sweep_jobs);
  }
  if (pr->parsed()) {
    return run_pr_curve(pr_gt, pr_dets, pr_scheme, pr_bba, pr_envelope,
                        pr_format, pr_output, pr_jobs);
  }
  if (gen->parsed()) {
    return mobeval_cli::generate_fixtures(fixture_options);
  }
  return 2;
}
