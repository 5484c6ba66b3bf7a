#include "balldet/balldet.h"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include "balldet/dataset.hpp"
#include "balldet/error.hpp"
#include "balldet/evaluation.hpp"
#include "balldet/lbp_cascade.hpp"
#include "balldet/patch_scheduler.hpp"
#include "balldet/synthetic.hpp"
#include "balldet/training.hpp"

struct bd_image {
    balldet::GrayImage img;
};

struct bd_model {
    balldet::CascadeModel model;
};

struct bd_perceptor {
    balldet::BallPerceptor perceptor;
};

namespace {

namespace fs = std::filesystem;
using namespace balldet;

thread_local std::string g_lastError;

bd_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::Format: return BD_ERR_FORMAT;
        case ErrorCode::Dimension: return BD_ERR_DIMENSION;
        case ErrorCode::Bounds: return BD_ERR_BOUNDS;
        case ErrorCode::Parse: return BD_ERR_PARSE;
        case ErrorCode::UnsupportedModel: return BD_ERR_UNSUPPORTED_MODEL;
        case ErrorCode::Validation: return BD_ERR_VALIDATION;
        case ErrorCode::Training: return BD_ERR_TRAINING;
        case ErrorCode::Parameter: return BD_ERR_PARAMETER;
        case ErrorCode::Io: return BD_ERR_IO;
        case ErrorCode::Input: return BD_ERR_INPUT;
    }
    return BD_ERR_INTERNAL;
}

bd_status set_error(bd_status s, const std::string& msg) {
    g_lastError = msg;
    return s;
}

struct NullArgument {
    const char* name;
};

template <class T>
T* need(T* p, const char* name) {
    if (p == nullptr) throw NullArgument{name};
    return p;
}

template <class F>
bd_status guarded(F&& body) {
    try {
        body();
        g_lastError.clear();
        return BD_OK;
    } catch (const NullArgument& e) {
        return set_error(BD_ERR_NULL_ARGUMENT, std::string("null argument: ") + e.name);
    } catch (const Error& e) {
        return set_error(status_of(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(BD_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(BD_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(BD_ERR_INTERNAL, "unknown error");
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

DetectParams to_params(const bd_detect_params* p) {
    DetectParams out;
    if (p != nullptr) {
        out.scaleFactor = p->scale_factor;
        out.minNeighbors = p->min_neighbors;
        out.minSize = p->min_size;
        out.maxSize = p->max_size;
        out.step = p->step;
        out.groupEps = p->group_eps;
    }
    return out;
}

TrainParams to_params(const bd_train_params& p) {
    TrainParams out;
    out.numStages = p.num_stages;
    out.minHitRate = p.min_hit_rate;
    out.maxFalseAlarmRate = p.max_false_alarm_rate;
    out.numPos = p.num_pos;
    out.numNeg = p.num_neg;
    out.winW = p.win_w;
    out.winH = p.win_h;
    out.acceptanceRatioBreakValue = p.acceptance_ratio_break_value;
    out.maxWeakCount = p.max_weak_count;
    out.weightTrimRate = p.weight_trim_rate;
    out.scaleFactor = p.scale_factor;
    out.seed = p.seed;
    return out;
}

void from_params(const TrainParams& p, bd_train_params* out) {
    out->num_stages = p.numStages;
    out->min_hit_rate = p.minHitRate;
    out->max_false_alarm_rate = p.maxFalseAlarmRate;
    out->num_pos = p.numPos;
    out->num_neg = p.numNeg;
    out->win_w = p.winW;
    out->win_h = p.winH;
    out->acceptance_ratio_break_value = p.acceptanceRatioBreakValue;
    out->max_weak_count = p.maxWeakCount;
    out->weight_trim_rate = p.weightTrimRate;
    out->scale_factor = p.scaleFactor;
    out->seed = p.seed;
}

std::string numbered(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d.pgm", i);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
}

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create directory '" + dir.string() + "': " + ec.message());
}

}  // namespace

extern "C" {

const char* bd_last_error(void) { return g_lastError.c_str(); }

const char* bd_status_name(bd_status status) {
    switch (status) {
        case BD_OK: return "ok";
        case BD_ERR_FORMAT: return to_string(ErrorCode::Format);
        case BD_ERR_DIMENSION: return to_string(ErrorCode::Dimension);
        case BD_ERR_BOUNDS: return to_string(ErrorCode::Bounds);
        case BD_ERR_PARSE: return to_string(ErrorCode::Parse);
        case BD_ERR_UNSUPPORTED_MODEL: return to_string(ErrorCode::UnsupportedModel);
        case BD_ERR_VALIDATION: return to_string(ErrorCode::Validation);
        case BD_ERR_TRAINING: return to_string(ErrorCode::Training);
        case BD_ERR_PARAMETER: return to_string(ErrorCode::Parameter);
        case BD_ERR_IO: return to_string(ErrorCode::Io);
        case BD_ERR_INPUT: return to_string(ErrorCode::Input);
        case BD_ERR_NULL_ARGUMENT: return "null-argument";
        case BD_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

void bd_string_free(char* s) { std::free(s); }

bd_status bd_image_load(const char* path, bd_image** out) {
    return guarded([&] {
        need(out, "out");
        *out = new bd_image{read_image(need(path, "path"))};
    });
}

bd_status bd_image_create(int width, int height, const uint8_t* pixels, bd_image** out) {
    return guarded([&] {
        need(out, "out");
        if (pixels == nullptr) {
            *out = new bd_image{GrayImage(width, height)};
        } else {
            if (width < 1 || height < 1) fail(ErrorCode::Dimension, "image dimensions must be positive");
            const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
            *out = new bd_image{GrayImage(width, height, std::vector<std::uint8_t>(pixels, pixels + n))};
        }
    });
}

bd_status bd_image_from_yuv422(const uint8_t* buffer, size_t size, int width, int height, bd_image** out) {
    return guarded([&] {
        need(out, "out");
        *out = new bd_image{luma_from_yuv422({need(buffer, "buffer"), size}, width, height)};
    });
}

bd_status bd_image_downscale(const bd_image* img, int factor, bd_image** out) {
    return guarded([&] {
        need(out, "out");
        *out = new bd_image{downscale(need(img, "img")->img, factor)};
    });
}

bd_status bd_image_save_pgm(const bd_image* img, const char* path) {
    return guarded([&] { write_pgm(need(img, "img")->img, need(path, "path")); });
}

bd_status bd_image_draw_rect(bd_image* img, int x, int y, int w, int h, uint8_t value) {
    return guarded([&] { draw_rect(need(img, "img")->img, {x, y, w, h}, value); });
}

int bd_image_width(const bd_image* img) { return img ? img->img.width() : 0; }
int bd_image_height(const bd_image* img) { return img ? img->img.height() : 0; }
const uint8_t* bd_image_pixels(const bd_image* img) { return img ? img->img.pixels().data() : nullptr; }
void bd_image_free(bd_image* img) { delete img; }

bd_status bd_model_load(const char* path, bd_model** out) {
    return guarded([&] {
        need(out, "out");
        *out = new bd_model{load_cascade(need(path, "path"))};
    });
}

bd_status bd_model_parse(const char* xml, bd_model** out) {
    return guarded([&] {
        need(out, "out");
        *out = new bd_model{parse_cascade(need(xml, "xml"))};
    });
}

bd_status bd_model_serialize(const bd_model* model, char** xml) {
    return guarded([&] { *need(xml, "xml") = dup_string(serialize_cascade(need(model, "model")->model)); });
}

bd_status bd_model_save(const bd_model* model, const char* path) {
    return guarded([&] { save_cascade(need(model, "model")->model, need(path, "path")); });
}

bd_status bd_model_summary(const bd_model* model, char** json) {
    return guarded([&] {
        need(json, "json");
        const CascadeModel& m = need(model, "model")->model;
        nlohmann::ordered_json j;
        j["windowW"] = m.windowW;
        j["windowH"] = m.windowH;
        j["features"] = m.features.size();
        j["maxWeakCount"] = m.max_weak_count();
        j["stages"] = nlohmann::ordered_json::array();
        for (const Stage& s : m.stages) j["stages"].push_back({{"weaks", s.weaks.size()}, {"threshold", s.threshold}});
        *json = dup_string(j.dump());
    });
}

void bd_model_free(bd_model* model) { delete model; }

void bd_detect_params_default(bd_detect_params* params) {
    if (params == nullptr) return;
    const DetectParams d;
    *params = {d.scaleFactor, d.minNeighbors, d.minSize, d.maxSize, d.step, d.groupEps};
}

bd_status bd_detect(const bd_model* model, const bd_image* img, const bd_detect_params* params, bd_detection** out,
                    size_t* count, uint64_t* windows_evaluated) {
    return guarded([&] {
        need(out, "out");
        need(count, "count");
        DetectStats stats;
        const auto dets = detect_multiscale(need(model, "model")->model, need(img, "img")->img, to_params(params), &stats);
        auto* arr = static_cast<bd_detection*>(std::malloc(sizeof(bd_detection) * (dets.empty() ? 1 : dets.size())));
        if (arr == nullptr) throw std::bad_alloc();
        for (std::size_t i = 0; i < dets.size(); ++i)
            arr[i] = {dets[i].rect.x, dets[i].rect.y, dets[i].rect.w, dets[i].rect.h, dets[i].neighbors, dets[i].score};
        *out = arr;
        *count = dets.size();
        if (windows_evaluated != nullptr) *windows_evaluated = stats.windowsEvaluated;
    });
}

void bd_detections_free(bd_detection* detections) { std::free(detections); }

void bd_perceptor_config_default(bd_perceptor_config* cfg) {
    if (cfg == nullptr) return;
    const SchedulerConfig s;
    const NoiseParams n;
    *cfg = {s.patrolCount,       s.patrolOverlap, s.marginFactor, s.baseNeighbors, s.obstacleNeighborsBoost,
            s.highResAreaCutoff, s.ballSizeSlack, s.patrolMaxBallSize, s.scaleFactor, s.step,
            s.groupEps,          n.processAccelStd, n.measurementStd};
}

bd_status bd_perceptor_create(const bd_model* model, const bd_perceptor_config* cfg, bd_perceptor** out) {
    return guarded([&] {
        need(out, "out");
        const CascadeModel& m = need(model, "model")->model;
        bd_perceptor_config c;
        if (cfg != nullptr) c = *cfg;
        else bd_perceptor_config_default(&c);
        SchedulerConfig s;
        s.patrolCount = c.patrol_count;
        s.patrolOverlap = c.patrol_overlap;
        s.marginFactor = c.margin_factor;
        s.baseNeighbors = c.base_neighbors;
        s.obstacleNeighborsBoost = c.obstacle_neighbors_boost;
        s.highResAreaCutoff = c.high_res_area_cutoff;
        s.ballSizeSlack = c.ball_size_slack;
        s.patrolMaxBallSize = c.patrol_max_ball_size;
        s.modelWindow = std::max(m.windowW, m.windowH);
        s.scaleFactor = c.scale_factor;
        s.step = c.step;
        s.groupEps = c.group_eps;
        NoiseParams n;
        n.processAccelStd = c.process_accel_std;
        n.measurementStd = c.measurement_std;
        *out = new bd_perceptor{BallPerceptor(m, s, n)};
    });
}

bd_status bd_perceptor_process(bd_perceptor* p, const bd_image* frame, const bd_image* high_res, double timestamp,
                               int obstacle_hint, char** frame_json) {
    return guarded([&] {
        need(frame_json, "frame_json");
        const FrameStats stats = need(p, "perceptor")->perceptor.process(
            need(frame, "frame")->img, high_res ? &high_res->img : nullptr, timestamp, obstacle_hint != 0);
        *frame_json = dup_string(frame_stats_json(stats));
    });
}

bd_status bd_perceptor_process_full_frame(bd_perceptor* p, const bd_image* frame, double timestamp,
                                          char** frame_json) {
    return guarded([&] {
        need(frame_json, "frame_json");
        const FrameStats stats = need(p, "perceptor")->perceptor.process_full_frame(need(frame, "frame")->img, timestamp);
        *frame_json = dup_string(frame_stats_json(stats));
    });
}

void bd_perceptor_free(bd_perceptor* p) { delete p; }

void bd_train_params_default(bd_train_params* params) {
    if (params != nullptr) from_params(TrainParams{}, params);
}

void bd_train_params_desk_scale(bd_train_params* params) {
    if (params != nullptr) from_params(TrainParams::desk_scale(), params);
}

bd_status bd_train(const char* positives_file, const char* negatives_file, const bd_train_params* params,
                   bd_progress_fn progress, void* user, bd_model** out, char** report_json) {
    return guarded([&] {
        need(out, "out");
        const TrainParams p = to_params(*need(params, "params"));
        p.validate();
        const SampleSet data =
            load_sample_set(need(positives_file, "positives_file"), need(negatives_file, "negatives_file"), p.winW, p.winH);
        std::function<void(const StageReport&)> cb;
        if (progress != nullptr)
            cb = [&](const StageReport& r) { progress(stage_report_json(r).c_str(), user); };
        const TrainResult result = train_cascade(data, p, cb);
        if (report_json != nullptr) {
            nlohmann::ordered_json j;
            j["stages"] = nlohmann::ordered_json::array();
            for (const StageReport& r : result.stages) j["stages"].push_back(nlohmann::ordered_json::parse(stage_report_json(r)));
            j["stopReason"] = to_string(result.reason);
            j["finalAcceptanceRatio"] = result.finalAcceptanceRatio;
            *report_json = dup_string(j.dump());
        }
        *out = new bd_model{result.model};
    });
}

bd_status bd_dataset_create_positives(const char* dir, char** text, char** warnings) {
    return guarded([&] {
        need(text, "text");
        const DescriptionResult r = create_positives_description(need(dir, "dir"));
        std::string w;
        for (const auto& line : r.warnings) w += line + "\n";
        char* t = dup_string(r.text);
        if (warnings != nullptr) {
            try {
                *warnings = dup_string(w);
            } catch (...) {
                std::free(t);
                throw;
            }
        }
        *text = t;
    });
}

bd_status bd_dataset_list_negatives(const char* dir, char** text) {
    return guarded([&] { *need(text, "text") = dup_string(list_negatives(need(dir, "dir"))); });
}

bd_status bd_evaluate(const char* truth_jsonl, const char* detections_jsonl, double iou_threshold, char** report_json) {
    return guarded([&] {
        need(report_json, "report_json");
        const auto truth = parse_frame_balls(need(truth_jsonl, "truth_jsonl"));
        const auto dets = parse_frame_balls(need(detections_jsonl, "detections_jsonl"));
        *report_json = dup_string(eval_report_json(evaluate(truth, dets, iou_threshold)));
    });
}

bd_status bd_synth_dataset(const char* dir, int num_positives, int num_negative_images, uint64_t seed) {
    return guarded([&] {
        const fs::path root = need(dir, "dir");
        if (num_positives < 1 || num_negative_images < 1) fail(ErrorCode::Parameter, "counts must be positive");
        synth::DatasetSpec spec;
        spec.numPositives = num_positives;
        spec.numNegativeImages = num_negative_images;
        spec.seed = seed;
        const SampleSet set = synth::disc_dataset(spec);
        make_dirs(root / "pos");
        make_dirs(root / "neg");
        std::string pos, neg;
        for (std::size_t i = 0; i < set.positives.size(); ++i) {
            const std::string name = "pos/" + numbered(static_cast<int>(i));
            write_pgm(set.positives[i], root / name);
            pos += name + " 1 0 0 " + std::to_string(spec.winW) + " " + std::to_string(spec.winH) + "\n";
        }
        for (std::size_t i = 0; i < set.negativePool.size(); ++i) {
            const std::string name = "neg/" + numbered(static_cast<int>(i));
            write_pgm(set.negativePool[i], root / name);
            neg += name + "\n";
        }
        write_text(root / "positives.txt", pos);
        write_text(root / "negatives.txt", neg);
    });
}

bd_status bd_synth_sequence(const char* dir, int frames, int ball_present, uint64_t seed) {
    return guarded([&] {
        const fs::path root = need(dir, "dir");
        if (frames < 1) fail(ErrorCode::Parameter, "frame count must be positive");
        synth::SequenceSpec spec;
        spec.frames = frames;
        spec.ballPresent = ball_present != 0;
        spec.seed = seed;
        const auto seq = synth::sequence(spec);
        make_dirs(root / "frames");
        make_dirs(root / "hires");
        std::string truth;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            write_pgm(seq[i].frame, root / "frames" / numbered(static_cast<int>(i)));
            write_pgm(seq[i].highRes, root / "hires" / numbered(static_cast<int>(i)));
            truth += frame_ball_json({static_cast<int>(i), seq[i].truth, 0.0}) + "\n";
        }
        write_text(root / "truth.jsonl", truth);
    });
}

}  // extern "C"
