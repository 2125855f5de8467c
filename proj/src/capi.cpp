#include "mobeval.h"

#include <atomic>
#include <cstring>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#include "aggregation.hpp"
#include "detection.hpp"
#include "detection_io.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "matching.hpp"
#include "metrics.hpp"
#include "report_io.hpp"
#include "voc_xml.hpp"

struct mobeval_detections {
  std::vector<mobeval::Detection> items;
};

struct mobeval_annotations {
  std::vector<mobeval::AnnotationFile> files;
  std::vector<mobeval::GroundTruth> labels;  // flattened

  void rebuild_labels() {
    labels = mobeval::all_labels(files);
  }
};

struct mobeval_match {
  mobeval::MatchSequence sequence;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_warnings;
std::atomic<int> g_jobs{1};

void store_warnings(const std::vector<std::string>& warnings) {
  g_last_warnings.clear();
  for (std::size_t i = 0; i < warnings.size(); ++i) {
    if (i > 0) g_last_warnings += '\n';
    g_last_warnings += warnings[i];
  }
}

template <class Fn>
mobeval_status wrap(Fn&& fn) {
  try {
    fn();
    return MOBEVAL_OK;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return MOBEVAL_ERROR_INVALID_ARGUMENT;
  } catch (const mobeval::ParseError& e) {
    g_last_error = e.what();
    return MOBEVAL_ERROR_PARSE;
  } catch (const mobeval::IoError& e) {
    g_last_error = e.what();
    return MOBEVAL_ERROR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MOBEVAL_ERROR_INTERNAL;
  }
}

mobeval_status require(bool ok, const char* message) {
  if (ok) return MOBEVAL_OK;
  g_last_error = message;
  return MOBEVAL_ERROR_INVALID_ARGUMENT;
}

mobeval::MobConfig to_config(const mobeval_mob_params& params) {
  mobeval::MobConfig config;
  config.omega = params.iou_threshold;
  config.max_iterations = params.max_iterations;
  config.max_inflation = params.max_inflation <= 0.0
                             ? std::numeric_limits<double>::infinity()
                             : params.max_inflation;
  if (params.top_k > 0) {
    config.top_k = static_cast<std::size_t>(params.top_k);
  }
  if (params.merge_strategy != MOBEVAL_MERGE_ENCLOSE &&
      params.merge_strategy != MOBEVAL_MERGE_AVERAGE) {
    throw std::invalid_argument("unknown merge strategy");
  }
  config.strategy = params.merge_strategy == MOBEVAL_MERGE_ENCLOSE
                        ? mobeval::MergeStrategy::kEnclose
                        : mobeval::MergeStrategy::kAverage;
  config.area_bound_per_iteration = params.bound_per_iteration != 0;
  return config;
}

mobeval::BbaConfig to_config(const mobeval_bba_params& params) {
  mobeval::BbaConfig config;
  switch (params.method) {
    case MOBEVAL_BBA_NONE:
      config.method = mobeval::BbaMethod::kNone;
      break;
    case MOBEVAL_BBA_NMS:
      config.method = mobeval::BbaMethod::kNms;
      break;
    case MOBEVAL_BBA_MOB:
      config.method = mobeval::BbaMethod::kMob;
      break;
    default:
      throw std::invalid_argument("unknown aggregation method");
  }
  config.nms_omega = params.nms_iou;
  config.mob = to_config(params.mob);
  return config;
}

mobeval::SchemeParams to_scheme(const mobeval_scheme_params& params) {
  mobeval::SchemeParams scheme;
  scheme.epsilon = params.iou_threshold;
  scheme.g_max = params.max_matches_per_prediction <= 0
                     ? mobeval::SchemeParams::kUnbounded
                     : static_cast<std::size_t>(params.max_matches_per_prediction);
  scheme.a_min = params.min_area_ratio;
  return scheme;
}

mobeval::ReportFormat to_format(int format) {
  switch (format) {
    case MOBEVAL_FORMAT_JSON:
      return mobeval::ReportFormat::kJson;
    case MOBEVAL_FORMAT_CSV:
      return mobeval::ReportFormat::kCsv;
    default:
      throw std::invalid_argument("unknown report format");
  }
}

char* copy_to_c_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* mobeval_last_error(void) { return g_last_error.c_str(); }

const char* mobeval_last_warnings(void) { return g_last_warnings.c_str(); }

const char* mobeval_version(void) { return "1.0.0"; }

void mobeval_set_parallelism(int jobs) { g_jobs.store(jobs < 1 ? 1 : jobs); }

int mobeval_parallelism(void) { return g_jobs.load(); }

/* --- detections ---------------------------------------------------- */

mobeval_detections* mobeval_detections_new(void) {
  return new mobeval_detections();
}

void mobeval_detections_free(mobeval_detections* dets) { delete dets; }

mobeval_status mobeval_detections_push(mobeval_detections* dets,
                                       const mobeval_detection* record) {
  if (auto bad = require(dets && record, "null argument")) return bad;
  if (auto bad = require(record->image_id && record->class_label,
                         "null string field")) {
    return bad;
  }
  return wrap([&] {
    mobeval::Detection det{
        mobeval::BBox(record->xmin, record->ymin, record->xmax, record->ymax),
        record->score, record->class_label, record->image_id};
    mobeval::validate(det);
    dets->items.push_back(std::move(det));
  });
}

size_t mobeval_detections_count(const mobeval_detections* dets) {
  return dets ? dets->items.size() : 0;
}

mobeval_status mobeval_detections_get(const mobeval_detections* dets, size_t i,
                                      mobeval_detection* out) {
  if (auto bad = require(dets && out, "null argument")) return bad;
  if (auto bad = require(i < dets->items.size(), "index out of range")) {
    return bad;
  }
  const mobeval::Detection& det = dets->items[i];
  out->image_id = det.image_id.c_str();
  out->class_label = det.class_label.c_str();
  out->score = det.score;
  out->xmin = det.box.xmin;
  out->ymin = det.box.ymin;
  out->xmax = det.box.xmax;
  out->ymax = det.box.ymax;
  return MOBEVAL_OK;
}

mobeval_status mobeval_detections_read(const char* path, const char* format,
                                       mobeval_detections** out) {
  if (auto bad = require(path && out, "null argument")) return bad;
  return wrap([&] {
    std::optional<mobeval::DumpFormat> dump_format;
    if (format) dump_format = mobeval::dump_format_from_name(format);
    std::vector<std::string> warnings;
    auto items = mobeval::read_detections_file(path, dump_format, &warnings);
    store_warnings(warnings);
    *out = new mobeval_detections{std::move(items)};
  });
}

mobeval_status mobeval_detections_write(const mobeval_detections* dets,
                                        const char* path, const char* format) {
  if (auto bad = require(dets && path, "null argument")) return bad;
  return wrap([&] {
    std::optional<mobeval::DumpFormat> dump_format;
    if (format) dump_format = mobeval::dump_format_from_name(format);
    mobeval::write_detections_file(path, dets->items, dump_format);
  });
}

/* --- annotations ---------------------------------------------------- */

mobeval_annotations* mobeval_annotations_new(void) {
  return new mobeval_annotations();
}

void mobeval_annotations_free(mobeval_annotations* anns) { delete anns; }

mobeval_status mobeval_annotations_add_xml(mobeval_annotations* anns,
                                           const char* xml_text,
                                           const char* image_id) {
  if (auto bad = require(anns && xml_text && image_id, "null argument")) {
    return bad;
  }
  return wrap([&] {
    std::vector<std::string> warnings;
    anns->files.push_back(
        mobeval::parse_voc_xml(xml_text, image_id, &warnings));
    store_warnings(warnings);
    anns->rebuild_labels();
  });
}

mobeval_status mobeval_annotations_read_dir(const char* dir,
                                            mobeval_annotations** out) {
  if (auto bad = require(dir && out, "null argument")) return bad;
  return wrap([&] {
    std::vector<std::string> warnings;
    auto handle = new mobeval_annotations();
    try {
      handle->files = mobeval::load_annotation_dir(dir, &warnings);
    } catch (...) {
      delete handle;
      throw;
    }
    store_warnings(warnings);
    handle->rebuild_labels();
    *out = handle;
  });
}

size_t mobeval_annotations_image_count(const mobeval_annotations* anns) {
  return anns ? anns->files.size() : 0;
}

size_t mobeval_annotations_label_count(const mobeval_annotations* anns) {
  return anns ? anns->labels.size() : 0;
}

const char* mobeval_annotations_image_id(const mobeval_annotations* anns,
                                         size_t i) {
  if (!anns || i >= anns->files.size()) return nullptr;
  return anns->files[i].image_id.c_str();
}

mobeval_status mobeval_annotations_object_count(const mobeval_annotations* anns,
                                                size_t i, size_t* out) {
  if (auto bad = require(anns && out, "null argument")) return bad;
  if (auto bad = require(i < anns->files.size(), "index out of range")) {
    return bad;
  }
  *out = anns->files[i].objects.size();
  return MOBEVAL_OK;
}

/* --- aggregation ---------------------------------------------------- */

void mobeval_mob_params_defaults(mobeval_mob_params* params) {
  if (!params) return;
  params->iou_threshold = 0.0;
  params->max_iterations = 3;
  params->max_inflation = 100.0;
  params->top_k = 0;
  params->merge_strategy = MOBEVAL_MERGE_ENCLOSE;
  params->bound_per_iteration = 1;
}

void mobeval_bba_params_defaults(mobeval_bba_params* params) {
  if (!params) return;
  params->method = MOBEVAL_BBA_NONE;
  params->nms_iou = 0.5;
  mobeval_mob_params_defaults(&params->mob);
}

mobeval_status mobeval_nms(const mobeval_detections* dets, double iou_threshold,
                           double score_threshold, mobeval_detections** out) {
  if (auto bad = require(dets && out, "null argument")) return bad;
  return wrap([&] {
    *out = new mobeval_detections{mobeval::nms_dataset(
        dets->items, iou_threshold, score_threshold, g_jobs.load())};
  });
}

mobeval_status mobeval_mob(const mobeval_detections* dets,
                           const mobeval_mob_params* params,
                           double score_threshold, mobeval_detections** out) {
  if (auto bad = require(dets && params && out, "null argument")) return bad;
  return wrap([&] {
    *out = new mobeval_detections{mobeval::mob_dataset(
        dets->items, to_config(*params), score_threshold, g_jobs.load())};
  });
}

mobeval_status mobeval_aggregate(const mobeval_detections* dets,
                                 const mobeval_bba_params* params,
                                 double score_threshold,
                                 mobeval_detections** out) {
  if (auto bad = require(dets && params && out, "null argument")) return bad;
  return wrap([&] {
    *out = new mobeval_detections{mobeval::apply_bba(
        dets->items, to_config(*params), score_threshold, g_jobs.load())};
  });
}

/* --- matching and metrics ------------------------------------------- */

void mobeval_scheme_params_voc2012(mobeval_scheme_params* params) {
  if (!params) return;
  params->iou_threshold = 0.5;
  params->max_matches_per_prediction = 1;
  params->min_area_ratio = 0.0;
}

void mobeval_scheme_params_sar_apd(mobeval_scheme_params* params) {
  if (!params) return;
  params->iou_threshold = 0.0025;
  params->max_matches_per_prediction = 0;  /* unbounded */
  params->min_area_ratio = 0.25;
}

mobeval_status mobeval_match_dataset(const mobeval_detections* dets,
                                     const mobeval_annotations* anns,
                                     const mobeval_scheme_params* params,
                                     mobeval_match** out) {
  if (auto bad = require(dets && anns && params && out, "null argument")) {
    return bad;
  }
  return wrap([&] {
    *out = new mobeval_match{mobeval::match_dataset(
        dets->items, anns->labels, to_scheme(*params), g_jobs.load())};
  });
}

void mobeval_match_free(mobeval_match* match) { delete match; }

size_t mobeval_match_count(const mobeval_match* match) {
  return match ? match->sequence.outcomes.size() : 0;
}

size_t mobeval_match_ground_truth_count(const mobeval_match* match) {
  return match ? match->sequence.n_ground_truth : 0;
}

mobeval_status mobeval_match_outcome(const mobeval_match* match, size_t i,
                                     int* is_tp, double* score) {
  if (auto bad = require(match && is_tp && score, "null argument")) return bad;
  if (auto bad = require(i < match->sequence.outcomes.size(),
                         "index out of range")) {
    return bad;
  }
  *is_tp = match->sequence.outcomes[i] ? 1 : 0;
  *score = match->sequence.scores[i];
  return MOBEVAL_OK;
}

mobeval_status mobeval_metrics_compute(const mobeval_match* match,
                                       mobeval_metrics* out) {
  if (auto bad = require(match && out, "null argument")) return bad;
  return wrap([&] {
    const mobeval::MetricsReport report =
        mobeval::compute_metrics(match->sequence);
    out->precision = report.precision;
    out->recall = report.recall;
    out->average_precision = report.average_precision;
    out->true_positives = report.true_positives;
    out->false_positives = report.false_positives;
    out->false_negatives = report.false_negatives;
    out->avg_time_per_image_s = -1.0;
  });
}

mobeval_status mobeval_pr_curve(const mobeval_match* match,
                                mobeval_pr_point* buf, size_t capacity,
                                size_t* count) {
  if (auto bad = require(match && count, "null argument")) return bad;
  return wrap([&] {
    const auto curve = mobeval::pr_curve(match->sequence);
    *count = curve.size();
    if (!buf) return;
    if (capacity < curve.size()) {
      throw std::invalid_argument("buffer too small for pr curve");
    }
    for (std::size_t i = 0; i < curve.size(); ++i) {
      buf[i] = {curve[i].recall, curve[i].precision, curve[i].score_cutoff};
    }
  });
}

mobeval_status mobeval_pr_envelope(const mobeval_pr_point* points, size_t n,
                                   double* envelope) {
  if (auto bad = require((points || n == 0) && (envelope || n == 0),
                         "null argument")) {
    return bad;
  }
  return wrap([&] {
    std::vector<mobeval::PrPoint> curve;
    curve.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      curve.push_back({points[i].recall, points[i].precision,
                       points[i].score_cutoff});
    }
    const auto env = mobeval::precision_envelope(curve);
    for (size_t i = 0; i < n; ++i) envelope[i] = env[i];
  });
}

mobeval_status mobeval_threshold_sweep(const mobeval_detections* dets,
                                       const mobeval_annotations* anns,
                                       const mobeval_scheme_params* scheme,
                                       const mobeval_bba_params* bba,
                                       const double* thresholds,
                                       size_t n_thresholds,
                                       mobeval_sweep_row* rows) {
  if (auto bad = require(dets && anns && scheme && bba && thresholds && rows,
                         "null argument")) {
    return bad;
  }
  return wrap([&] {
    const auto result = mobeval::threshold_sweep(
        dets->items, anns->labels, to_scheme(*scheme), to_config(*bba),
        std::span<const double>(thresholds, n_thresholds), g_jobs.load());
    for (std::size_t i = 0; i < result.size(); ++i) {
      rows[i] = {result[i].score_threshold, result[i].precision,
                 result[i].recall, result[i].average_precision};
    }
  });
}

/* --- closed-form bounds ---------------------------------------------- */

mobeval_status mobeval_max_prediction_width(double epsilon, double avg_width,
                                            double* out) {
  if (auto bad = require(out != nullptr, "null argument")) return bad;
  return wrap([&] { *out = mobeval::max_pred_width(epsilon, avg_width); });
}

mobeval_status mobeval_max_tp_area_width(double epsilon, double avg_width,
                                         double* out) {
  if (auto bad = require(out != nullptr, "null argument")) return bad;
  return wrap([&] { *out = mobeval::max_tp_area_width(epsilon, avg_width); });
}

mobeval_status mobeval_pixels_to_ground(double pixel_width,
                                        double meters_per_pixel, double* out) {
  if (auto bad = require(out != nullptr, "null argument")) return bad;
  return wrap(
      [&] { *out = mobeval::pixels_to_ground(pixel_width, meters_per_pixel); });
}

/* --- report formatting ----------------------------------------------- */

mobeval_status mobeval_metrics_format(const mobeval_metrics* metrics,
                                      int format, int include_timing,
                                      char** out) {
  if (auto bad = require(metrics && out, "null argument")) return bad;
  return wrap([&] {
    mobeval::MetricsReport report;
    report.precision = metrics->precision;
    report.recall = metrics->recall;
    report.average_precision = metrics->average_precision;
    report.true_positives = metrics->true_positives;
    report.false_positives = metrics->false_positives;
    report.false_negatives = metrics->false_negatives;
    if (include_timing && metrics->avg_time_per_image_s >= 0.0) {
      report.avg_time_per_image_s = metrics->avg_time_per_image_s;
    }
    *out = copy_to_c_string(mobeval::write_report(report, to_format(format)));
  });
}

mobeval_status mobeval_sweep_format(const mobeval_sweep_row* rows, size_t n,
                                    int format, char** out) {
  if (auto bad = require((rows || n == 0) && out, "null argument")) return bad;
  return wrap([&] {
    std::vector<mobeval::SweepRow> sweep;
    sweep.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      sweep.push_back({rows[i].score_threshold, rows[i].precision,
                       rows[i].recall, rows[i].average_precision});
    }
    *out = copy_to_c_string(mobeval::write_sweep(sweep, to_format(format)));
  });
}

mobeval_status mobeval_pr_curve_format(const mobeval_pr_point* points, size_t n,
                                       const double* envelope, int format,
                                       char** out) {
  if (auto bad = require((points || n == 0) && out, "null argument")) return bad;
  return wrap([&] {
    std::vector<mobeval::PrPoint> curve;
    curve.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      curve.push_back({points[i].recall, points[i].precision,
                       points[i].score_cutoff});
    }
    const std::span<const double> env =
        envelope ? std::span<const double>(envelope, n)
                 : std::span<const double>();
    *out = copy_to_c_string(
        mobeval::write_pr_curve(curve, to_format(format), env));
  });
}

void mobeval_string_free(char* text) { delete[] text; }

}  // extern "C"
