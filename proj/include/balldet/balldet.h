#ifndef BALLDET_BALLDET_H
#define BALLDET_BALLDET_H

#include <stddef.h>
#include <stdint.h>

#if defined(BALLDET_BUILDING)
#define BD_API __attribute__((visibility("default")))
#else
#define BD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bd_status {
    BD_OK = 0,
    BD_ERR_FORMAT = 1,
    BD_ERR_DIMENSION = 2,
    BD_ERR_BOUNDS = 3,
    BD_ERR_PARSE = 4,
    BD_ERR_UNSUPPORTED_MODEL = 5,
    BD_ERR_VALIDATION = 6,
    BD_ERR_TRAINING = 7,
    BD_ERR_PARAMETER = 8,
    BD_ERR_IO = 9,
    BD_ERR_INPUT = 10,
    BD_ERR_NULL_ARGUMENT = 11,
    BD_ERR_INTERNAL = 12
} bd_status;

typedef struct bd_image bd_image;
typedef struct bd_model bd_model;
typedef struct bd_perceptor bd_perceptor;

/* Message of the last failed call on this thread ("" if none). */
BD_API const char* bd_last_error(void);
BD_API const char* bd_status_name(bd_status status);

/* Releases strings returned through char** out-parameters. */
BD_API void bd_string_free(char* s);

/* ---- images (8-bit grayscale) ---- */

/* PGM (P5) or PNG, chosen by file signature. */
BD_API bd_status bd_image_load(const char* path, bd_image** out);
/* `pixels` may be NULL (zero-filled); otherwise width*height bytes, row-major. */
BD_API bd_status bd_image_create(int width, int height, const uint8_t* pixels, bd_image** out);
/* Luma of a packed YUV 4:2:2 buffer (Y on even bytes). */
BD_API bd_status bd_image_from_yuv422(const uint8_t* buffer, size_t size, int width, int height, bd_image** out);
BD_API bd_status bd_image_downscale(const bd_image* img, int factor, bd_image** out);
BD_API bd_status bd_image_save_pgm(const bd_image* img, const char* path);
BD_API bd_status bd_image_draw_rect(bd_image* img, int x, int y, int w, int h, uint8_t value);
BD_API int bd_image_width(const bd_image* img);
BD_API int bd_image_height(const bd_image* img);
BD_API const uint8_t* bd_image_pixels(const bd_image* img);
BD_API void bd_image_free(bd_image* img);

/* ---- cascade models (OpenCV LBP cascade XML) ---- */

BD_API bd_status bd_model_load(const char* path, bd_model** out);
BD_API bd_status bd_model_parse(const char* xml, bd_model** out);
BD_API bd_status bd_model_serialize(const bd_model* model, char** xml);
BD_API bd_status bd_model_save(const bd_model* model, const char* path);
/* JSON: window size, feature count, per-stage weak counts and thresholds. */
BD_API bd_status bd_model_summary(const bd_model* model, char** json);
BD_API void bd_model_free(bd_model* model);

/* ---- detection ---- */

typedef struct bd_detect_params {
    double scale_factor;
    int min_neighbors;
    int min_size; /* 0 = model window */
    int max_size; /* 0 = unbounded */
    int step;
    double group_eps;
} bd_detect_params;

typedef struct bd_detection {
    int x, y, w, h;
    int neighbors;
    double score;
} bd_detection;

BD_API void bd_detect_params_default(bd_detect_params* params);

/* `params` may be NULL for defaults. `*out` is released with bd_detections_free.
   `windows_evaluated` may be NULL. */
BD_API bd_status bd_detect(const bd_model* model, const bd_image* img, const bd_detect_params* params,
                           bd_detection** out, size_t* count, uint64_t* windows_evaluated);
BD_API void bd_detections_free(bd_detection* detections);

/* ---- scheduled perception and tracking ---- */

typedef struct bd_perceptor_config {
    int patrol_count;
    double patrol_overlap;
    double margin_factor;
    int base_neighbors;
    int obstacle_neighbors_boost;
    long long high_res_area_cutoff;
    double ball_size_slack;
    int patrol_max_ball_size; /* 0 = tile size */
    double scale_factor;
    int step;
    double group_eps;
    double process_accel_std;
    double measurement_std;
} bd_perceptor_config;

BD_API void bd_perceptor_config_default(bd_perceptor_config* cfg);
/* The model is copied; `cfg` may be NULL for defaults. */
BD_API bd_status bd_perceptor_create(const bd_model* model, const bd_perceptor_config* cfg, bd_perceptor** out);
/* One JSON object per frame. `high_res` may be NULL or exactly twice the frame size. */
BD_API bd_status bd_perceptor_process(bd_perceptor* p, const bd_image* frame, const bd_image* high_res,
                                      double timestamp, int obstacle_hint, char** frame_json);
BD_API bd_status bd_perceptor_process_full_frame(bd_perceptor* p, const bd_image* frame, double timestamp,
                                                 char** frame_json);
BD_API void bd_perceptor_free(bd_perceptor* p);

/* ---- training ---- */

typedef struct bd_train_params {
    int num_stages;
    double min_hit_rate;
    double max_false_alarm_rate;
    int num_pos;
    int num_neg;
    int win_w;
    int win_h;
    double acceptance_ratio_break_value;
    int max_weak_count;
    double weight_trim_rate;
    double scale_factor;
    uint64_t seed;
} bd_train_params;

BD_API void bd_train_params_default(bd_train_params* params);
BD_API void bd_train_params_desk_scale(bd_train_params* params);

/* Called once per finished stage with a JSON stage report. */
typedef void (*bd_progress_fn)(const char* stage_json, void* user);

/* `report_json` (may be NULL) receives {stages: [...], stopReason, finalAcceptanceRatio}. */
BD_API bd_status bd_train(const char* positives_file, const char* negatives_file, const bd_train_params* params,
                          bd_progress_fn progress, void* user, bd_model** out, char** report_json);

/* ---- datasets, evaluation, synthetic data ---- */

/* One "<path> 1 0 0 <w> <h>" line per image; `warnings` (may be NULL) gets one per line. */
BD_API bd_status bd_dataset_create_positives(const char* dir, char** text, char** warnings);
/* Absolute image paths under `dir`, recursively, one per line. */
BD_API bd_status bd_dataset_list_negatives(const char* dir, char** text);

/* Both inputs are JSON lines of {frame, ball}. */
BD_API bd_status bd_evaluate(const char* truth_jsonl, const char* detections_jsonl, double iou_threshold,
                             char** report_json);

/* Writes pos/NNNN.pgm, neg/NNNN.pgm, positives.txt and negatives.txt under `dir`. */
BD_API bd_status bd_synth_dataset(const char* dir, int num_positives, int num_negative_images, uint64_t seed);
/* Writes frames/NNNN.pgm, hires/NNNN.pgm and truth.jsonl under `dir`. */
BD_API bd_status bd_synth_sequence(const char* dir, int frames, int ball_present, uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif
