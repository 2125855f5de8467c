/*
 * mobeval — bounding-box aggregation and detection evaluation.
 *
 * C interface to the mobeval core. The library postprocesses object
 * detector outputs (greedy NMS or MOB overlap merging), matches predictions
 * against VOC XML ground truth under configurable schemes (voc2012,
 * sar-apd, or custom), and computes precision/recall/AP metrics,
 * precision-recall curves, and score-threshold calibration sweeps.
 *
 * Conventions:
 *   - Every fallible function returns a mobeval_status; 0 means success.
 *     On failure, mobeval_last_error() describes what went wrong (the
 *     message is thread-local and valid until the next failing call on the
 *     same thread).
 *   - Objects are opaque handles created and destroyed by the library.
 *     Out-parameters are written only on success.
 *   - Boxes use continuous pixel coordinates (xmin, ymin, xmax, ymax) with
 *     xmin < xmax and ymin < ymax; area is (xmax-xmin)*(ymax-ymin).
 *   - Scores and IoU thresholds live in [0, 1].
 */

#ifndef MOBEVAL_H
#define MOBEVAL_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mobeval_status {
  MOBEVAL_OK = 0,
  MOBEVAL_ERROR_INVALID_ARGUMENT = 1, /* bad parameter or config value */
  MOBEVAL_ERROR_PARSE = 2,            /* malformed XML/JSONL/CSV content */
  MOBEVAL_ERROR_IO = 3,               /* missing or unreadable file */
  MOBEVAL_ERROR_INTERNAL = 4
} mobeval_status;

/* Message for the most recent failure on this thread; never NULL. */
const char *mobeval_last_error(void);

/* Newline-joined non-fatal notes from the most recent parse call on this
 * thread (unknown fields, skipped annotation attributes); empty when the
 * last call produced none. */
const char *mobeval_last_warnings(void);

const char *mobeval_version(void);

/* Worker threads used by dataset-level calls (aggregation, matching,
 * sweeps). Values below 1 are clamped to 1. Results never depend on the
 * thread count. */
void mobeval_set_parallelism(int jobs);
int mobeval_parallelism(void);

/* ------------------------------------------------------------------ */
/* detections                                                          */
/* ------------------------------------------------------------------ */

typedef struct mobeval_detections mobeval_detections;

typedef struct mobeval_detection {
  const char *image_id;
  const char *class_label;
  double score;
  double xmin, ymin, xmax, ymax;
} mobeval_detection;

mobeval_detections *mobeval_detections_new(void);
void mobeval_detections_free(mobeval_detections *dets);

/* Appends a record; the strings are copied. */
mobeval_status mobeval_detections_push(mobeval_detections *dets,
                                       const mobeval_detection *record);

size_t mobeval_detections_count(const mobeval_detections *dets);

/* Fills `out` with a view of record i. String pointers stay valid until
 * the list is modified or freed. */
mobeval_status mobeval_detections_get(const mobeval_detections *dets, size_t i,
                                      mobeval_detection *out);

/* Reads a detection dump. `format` is "jsonl", "json", "csv", or NULL to
 * infer from the file extension. */
mobeval_status mobeval_detections_read(const char *path, const char *format,
                                       mobeval_detections **out);

mobeval_status mobeval_detections_write(const mobeval_detections *dets,
                                        const char *path, const char *format);

/* ------------------------------------------------------------------ */
/* ground-truth annotations                                            */
/* ------------------------------------------------------------------ */

typedef struct mobeval_annotations mobeval_annotations;

mobeval_annotations *mobeval_annotations_new(void);
void mobeval_annotations_free(mobeval_annotations *anns);

/* Parses one VOC XML document and adds its objects under `image_id`. */
mobeval_status mobeval_annotations_add_xml(mobeval_annotations *anns,
                                           const char *xml_text,
                                           const char *image_id);

/* Parses every *.xml file in `dir` (image ids are the file stems). */
mobeval_status mobeval_annotations_read_dir(const char *dir,
                                            mobeval_annotations **out);

size_t mobeval_annotations_image_count(const mobeval_annotations *anns);
size_t mobeval_annotations_label_count(const mobeval_annotations *anns);

/* Image id of annotation file i (sorted by filename). */
const char *mobeval_annotations_image_id(const mobeval_annotations *anns,
                                         size_t i);

/* Number of labeled objects in annotation file i. */
mobeval_status mobeval_annotations_object_count(const mobeval_annotations *anns,
                                                size_t i, size_t *out);

/* ------------------------------------------------------------------ */
/* aggregation                                                         */
/* ------------------------------------------------------------------ */

typedef enum mobeval_merge_strategy {
  MOBEVAL_MERGE_ENCLOSE = 0,
  MOBEVAL_MERGE_AVERAGE = 1
} mobeval_merge_strategy;

typedef struct mobeval_mob_params {
  double iou_threshold;  /* boxes link when IoU > this; in [0, 1) */
  int max_iterations;    /* >= 1 */
  double max_inflation;  /* output area <= this x largest input box area;
                            <= 0 disables the bound */
  long top_k;            /* keep the k best-scoring boxes per cluster;
                            <= 0 keeps all */
  int merge_strategy;    /* mobeval_merge_strategy */
  int bound_per_iteration; /* 1: recompute the area bound from each pass's
                              boxes (default); 0: freeze it at the first
                              pass's value */
} mobeval_mob_params;

/* iou_threshold 0, 3 iterations, inflation 100, no top-k, enclose merge,
 * per-iteration bound. */
void mobeval_mob_params_defaults(mobeval_mob_params *params);

typedef enum mobeval_bba_method {
  MOBEVAL_BBA_NONE = 0,
  MOBEVAL_BBA_NMS = 1,
  MOBEVAL_BBA_MOB = 2
} mobeval_bba_method;

typedef struct mobeval_bba_params {
  int method;      /* mobeval_bba_method */
  double nms_iou;  /* NMS suppression threshold; 0.5 is the usual default */
  mobeval_mob_params mob;
} mobeval_bba_params;

/* method NONE, nms_iou 0.5, mob defaults. */
void mobeval_bba_params_defaults(mobeval_bba_params *params);

/* Greedy NMS per (image, class) group after dropping scores below
 * score_threshold. */
mobeval_status mobeval_nms(const mobeval_detections *dets, double iou_threshold,
                           double score_threshold, mobeval_detections **out);

/* MOB merging per (image, class) group after dropping scores below
 * score_threshold: transitively overlapping boxes cluster and collapse to
 * one box per cluster, iterated until stable (bounded by max_iterations),
 * with oversized clusters subdivided to respect max_inflation. */
mobeval_status mobeval_mob(const mobeval_detections *dets,
                           const mobeval_mob_params *params,
                           double score_threshold, mobeval_detections **out);

/* Runs the configured method; NONE just filters by score. */
mobeval_status mobeval_aggregate(const mobeval_detections *dets,
                                 const mobeval_bba_params *params,
                                 double score_threshold,
                                 mobeval_detections **out);

/* ------------------------------------------------------------------ */
/* matching and metrics                                                */
/* ------------------------------------------------------------------ */

typedef struct mobeval_scheme_params {
  double iou_threshold;           /* match when IoU >= this */
  long max_matches_per_prediction; /* <= 0 means unbounded */
  double min_area_ratio;          /* match when area(pred) > this x area(gt) */
} mobeval_scheme_params;

/* voc2012: (0.5, 1, 0) — strict one-to-one localization. */
void mobeval_scheme_params_voc2012(mobeval_scheme_params *params);

/* sar-apd: (0.0025, unbounded, 0.25) — approximate group localization. */
void mobeval_scheme_params_sar_apd(mobeval_scheme_params *params);

typedef struct mobeval_match mobeval_match;

/* Matches detections against labels per (image, class) group and merges
 * the TP/FP outcomes into one score-ordered sequence. */
mobeval_status mobeval_match_dataset(const mobeval_detections *dets,
                                     const mobeval_annotations *anns,
                                     const mobeval_scheme_params *params,
                                     mobeval_match **out);

void mobeval_match_free(mobeval_match *match);

size_t mobeval_match_count(const mobeval_match *match);
size_t mobeval_match_ground_truth_count(const mobeval_match *match);

/* Outcome i: *is_tp is 1 for a true positive, 0 for a false positive;
 * *score is the originating prediction's confidence. */
mobeval_status mobeval_match_outcome(const mobeval_match *match, size_t i,
                                     int *is_tp, double *score);

typedef struct mobeval_metrics {
  double precision;
  double recall;
  double average_precision;
  size_t true_positives;
  size_t false_positives;
  size_t false_negatives;
  double avg_time_per_image_s; /* negative when not measured */
} mobeval_metrics;

mobeval_status mobeval_metrics_compute(const mobeval_match *match,
                                       mobeval_metrics *out);

typedef struct mobeval_pr_point {
  double recall;
  double precision;
  double score_cutoff;
} mobeval_pr_point;

/* Precision-recall curve over descending score cutoffs. Call with buf NULL
 * to query the point count, then again with a buffer of that capacity. */
mobeval_status mobeval_pr_curve(const mobeval_match *match,
                                mobeval_pr_point *buf, size_t capacity,
                                size_t *count);

/* Monotone precision envelope (max precision at equal-or-greater recall)
 * for `n` curve points, written to envelope[0..n-1]. */
mobeval_status mobeval_pr_envelope(const mobeval_pr_point *points, size_t n,
                                   double *envelope);

typedef struct mobeval_sweep_row {
  double score_threshold;
  double precision;
  double recall;
  double average_precision;
} mobeval_sweep_row;

/* For each threshold: aggregate at that score threshold, match, and report
 * the metric triple. rows must hold n_thresholds entries. */
mobeval_status mobeval_threshold_sweep(const mobeval_detections *dets,
                                       const mobeval_annotations *anns,
                                       const mobeval_scheme_params *scheme,
                                       const mobeval_bba_params *bba,
                                       const double *thresholds,
                                       size_t n_thresholds,
                                       mobeval_sweep_row *rows);

/* ------------------------------------------------------------------ */
/* closed-form localization bounds                                     */
/* ------------------------------------------------------------------ */

/* Largest prediction width reaching IoU epsilon over a contained object of
 * width avg_width: avg_width / sqrt(epsilon). */
mobeval_status mobeval_max_prediction_width(double epsilon, double avg_width,
                                            double *out);

/* Width of the region a maximum-sized unity-aspect prediction may occupy:
 * 2 * max_prediction_width - avg_width. */
mobeval_status mobeval_max_tp_area_width(double epsilon, double avg_width,
                                         double *out);

/* Pixel width to ground meters at a meters-per-pixel resolution. */
mobeval_status mobeval_pixels_to_ground(double pixel_width,
                                        double meters_per_pixel, double *out);

/* ------------------------------------------------------------------ */
/* report formatting                                                   */
/* ------------------------------------------------------------------ */

typedef enum mobeval_format {
  MOBEVAL_FORMAT_JSON = 0,
  MOBEVAL_FORMAT_CSV = 1
} mobeval_format;

/* Serializers with fixed field order and 6-significant-digit reals; CSV
 * output carries a header row. *out is allocated by the library; release
 * it with mobeval_string_free. Pass include_timing 0 to omit the
 * avg_time_per_image_s field even when measured. */
mobeval_status mobeval_metrics_format(const mobeval_metrics *metrics,
                                      int format, int include_timing,
                                      char **out);

mobeval_status mobeval_sweep_format(const mobeval_sweep_row *rows, size_t n,
                                    int format, char **out);

/* envelope may be NULL; when given it must hold n entries and adds a
 * precision_envelope column. */
mobeval_status mobeval_pr_curve_format(const mobeval_pr_point *points, size_t n,
                                       const double *envelope, int format,
                                       char **out);

void mobeval_string_free(char *text);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MOBEVAL_H */
