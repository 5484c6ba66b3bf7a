#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "balldet/balldet.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

/// Runtime failure: reported on stderr with exit code 2.
struct RuntimeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(bd_status s, const std::string& what) {
    if (s != BD_OK) throw RuntimeFailure(what + ": " + bd_last_error());
}

struct ImageDeleter {
    void operator()(bd_image* p) const { bd_image_free(p); }
};
struct ModelDeleter {
    void operator()(bd_model* p) const { bd_model_free(p); }
};
struct PerceptorDeleter {
    void operator()(bd_perceptor* p) const { bd_perceptor_free(p); }
};
struct StringDeleter {
    void operator()(char* p) const { bd_string_free(p); }
};
using ImagePtr = std::unique_ptr<bd_image, ImageDeleter>;
using ModelPtr = std::unique_ptr<bd_model, ModelDeleter>;
using PerceptorPtr = std::unique_ptr<bd_perceptor, PerceptorDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

std::string take(char* s) { return StringPtr(s).get(); }

ImagePtr load_image(const fs::path& path) {
    bd_image* img = nullptr;
    check(bd_image_load(path.string().c_str(), &img), "cannot load image '" + path.string() + "'");
    return ImagePtr(img);
}

ModelPtr load_model(const std::string& path) {
    bd_model* m = nullptr;
    check(bd_model_load(path.c_str(), &m), "cannot load model '" + path + "'");
    return ModelPtr(m);
}

bool is_frame_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm" || ext == ".png";
}

/// A single image, or every image file of a directory sorted by name.
std::vector<fs::path> list_frames(const fs::path& input) {
    std::error_code ec;
    if (!fs::is_directory(input, ec)) {
        if (!fs::exists(input, ec)) throw RuntimeFailure("no such file or directory '" + input.string() + "'");
        return {input};
    }
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(input, ec))
        if (entry.is_regular_file() && is_frame_file(entry.path())) out.push_back(entry.path());
    if (ec) throw RuntimeFailure("cannot read directory '" + input.string() + "': " + ec.message());
    std::sort(out.begin(), out.end());
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFailure("cannot open '" + path.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw RuntimeFailure("cannot write '" + path.string() + "'");
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
    return v[std::min(idx, v.size() - 1)];
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

using Clock = std::chrono::steady_clock;
double ms_since(Clock::time_point t0) { return std::chrono::duration<double, std::milli>(Clock::now() - t0).count(); }

// ---- detect ----

struct DetectOptions {
    std::string model;
    std::string input;
    std::string annotate;
    bd_detect_params params{};
};

/// The reported ball is the detection with the most neighbors, then the highest score.
json best_ball(const bd_detection* dets, std::size_t n) {
    if (n == 0) return nullptr;
    const bd_detection* best = &dets[0];
    for (std::size_t i = 1; i < n; ++i)
        if (dets[i].neighbors > best->neighbors || (dets[i].neighbors == best->neighbors && dets[i].score > best->score))
            best = &dets[i];
    return {{"x", best->x + best->w / 2.0},
            {"y", best->y + best->h / 2.0},
            {"radius", best->w / 2.0},
            {"score", best->score},
            {"source", "fullFrame"}};
}

void run_detect(const DetectOptions& o) {
    const ModelPtr model = load_model(o.model);
    const auto frames = list_frames(o.input);
    if (!o.annotate.empty()) {
        std::error_code ec;
        fs::create_directories(o.annotate, ec);
        if (ec) throw RuntimeFailure("cannot create directory '" + o.annotate + "'");
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
        ImagePtr img = load_image(frames[i]);
        bd_detection* raw = nullptr;
        std::size_t n = 0;
        std::uint64_t windows = 0;
        check(bd_detect(model.get(), img.get(), &o.params, &raw, &n, &windows), "detection failed");
        std::unique_ptr<bd_detection, void (*)(bd_detection*)> dets(raw, bd_detections_free);
        json line;
        line["frame"] = i;
        line["image"] = frames[i].filename().string();
        line["ball"] = best_ball(raw, n);
        line["detections"] = json::array();
        for (std::size_t k = 0; k < n; ++k)
            line["detections"].push_back({{"rect", {raw[k].x, raw[k].y, raw[k].w, raw[k].h}},
                                          {"neighbors", raw[k].neighbors},
                                          {"score", raw[k].score}});
        line["windowsEvaluated"] = windows;
        std::cout << line.dump() << '\n';
        if (!o.annotate.empty()) {
            for (std::size_t k = 0; k < n; ++k)
                check(bd_image_draw_rect(img.get(), raw[k].x, raw[k].y, raw[k].w, raw[k].h, 255), "annotate");
            const fs::path out = fs::path(o.annotate) / (frames[i].stem().string() + ".pgm");
            check(bd_image_save_pgm(img.get(), out.string().c_str()), "cannot write '" + out.string() + "'");
        }
    }
}

// ---- track / eval ----

struct TrackOptions {
    std::string model;
    std::string frames;
    std::string hires;
    double fps = 30.0;
    bool fullFrame = false;
    bool obstacleHint = false;
    bd_perceptor_config cfg{};
};

struct TrackRun {
    std::vector<std::string> lines;
    json summary;
    std::vector<double> frameMs;
};

TrackRun run_track(const TrackOptions& o) {
    if (!(o.fps > 0)) throw RuntimeFailure("--fps must be positive");
    const ModelPtr model = load_model(o.model);
    const auto frames = list_frames(o.frames);
    if (frames.empty()) throw RuntimeFailure("sequence '" + o.frames + "' contains no frames");
    bd_perceptor* raw = nullptr;
    check(bd_perceptor_create(model.get(), &o.cfg, &raw), "cannot create perceptor");
    const PerceptorPtr perceptor(raw);

    TrackRun run;
    long long ballFrames = 0, framesSinceAcquisition = 0, ballSinceAcquisition = 0;
    double windows = 0.0;
    bool acquired = false;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const ImagePtr frame = load_image(frames[i]);
        ImagePtr hi;
        if (!o.hires.empty()) hi = load_image(fs::path(o.hires) / frames[i].filename());
        const double t = static_cast<double>(i) / o.fps;
        char* out = nullptr;
        const auto t0 = Clock::now();
        if (o.fullFrame)
            check(bd_perceptor_process_full_frame(perceptor.get(), frame.get(), t, &out), "frame " + std::to_string(i));
        else
            check(bd_perceptor_process(perceptor.get(), frame.get(), hi.get(), t, o.obstacleHint ? 1 : 0, &out),
                  "frame " + std::to_string(i));
        run.frameMs.push_back(ms_since(t0));
        std::string line = take(out);
        const json j = json::parse(line);
        const bool hasBall = !j["ball"].is_null();
        for (const auto& p : j["patches"]) windows += p["windowsEvaluated"].get<double>();
        acquired = acquired || hasBall;
        if (hasBall) ++ballFrames;
        if (acquired) {
            ++framesSinceAcquisition;
            if (hasBall) ++ballSinceAcquisition;
        }
        run.lines.push_back(std::move(line));
    }
    const double n = static_cast<double>(frames.size());
    run.summary = {{"summary",
                    {{"frames", frames.size()},
                     {"mode", o.fullFrame ? "fullFrame" : "scheduler"},
                     {"ballFrames", ballFrames},
                     {"meanWindowsPerFrame", windows / n},
                     {"acquisitionRatio", framesSinceAcquisition == 0
                                              ? 0.0
                                              : static_cast<double>(ballSinceAcquisition) /
                                                    static_cast<double>(framesSinceAcquisition)}}}};
    return run;
}

void print_timing(const std::vector<double>& ms) {
    const double med = median(ms);
    std::fprintf(stderr, "median frame time %.3f ms (%.1f frames/s)\n", med, med > 0 ? 1000.0 / med : 0.0);
}

struct EvalOptions {
    TrackOptions track;
    std::string truth;
    std::string detections;
    double iou = 0.5;
};

void run_eval(const EvalOptions& o) {
    std::string dets;
    if (!o.detections.empty()) {
        dets = read_file(o.detections);
    } else {
        if (o.track.model.empty() || o.track.frames.empty())
            throw RuntimeFailure("eval needs --detections, or --model with --frames");
        const TrackRun run = run_track(o.track);
        for (const auto& l : run.lines) dets += l + "\n";
    }
    const std::string truth = read_file(o.truth);
    char* report = nullptr;
    check(bd_evaluate(truth.c_str(), dets.c_str(), o.iou, &report), "evaluation failed");
    std::cout << take(report) << '\n';
}

// ---- bench ----

struct BenchOptions {
    std::string model;
    std::string frame;
    std::string hires;
    int iterations = 50;
};

json latency(const std::vector<double>& ms, double windowsPerIteration) {
    const double med = median(ms);
    double total = 0.0;
    for (double m : ms) total += m;
    return {{"medianMs", med},
            {"p95Ms", percentile(ms, 0.95)},
            {"windowsPerFrame", windowsPerIteration},
            {"windowsPerSecond", total > 0 ? windowsPerIteration * static_cast<double>(ms.size()) / (total / 1000.0) : 0.0}};
}

void run_bench(const BenchOptions& o) {
    if (o.iterations < 1) throw RuntimeFailure("--iterations must be >= 1");
    const ModelPtr model = load_model(o.model);
    const ImagePtr frame = load_image(o.frame);
    ImagePtr hi;
    if (!o.hires.empty()) hi = load_image(o.hires);

    std::vector<double> fullMs;
    std::uint64_t fullWindows = 0;
    for (int i = 0; i < o.iterations; ++i) {
        bd_detection* raw = nullptr;
        std::size_t n = 0;
        const auto t0 = Clock::now();
        check(bd_detect(model.get(), frame.get(), nullptr, &raw, &n, &fullWindows), "detection failed");
        fullMs.push_back(ms_since(t0));
        bd_detections_free(raw);
    }

    bd_perceptor* rawP = nullptr;
    check(bd_perceptor_create(model.get(), nullptr, &rawP), "cannot create perceptor");
    const PerceptorPtr perceptor(rawP);
    std::vector<double> patchMs;
    double patchWindows = 0.0;
    // One untimed frame lets the scheduler settle on its steady-state patch list.
    char* warm = nullptr;
    check(bd_perceptor_process(perceptor.get(), frame.get(), hi.get(), 0.0, 0, &warm), "perceptor failed");
    bd_string_free(warm);
    for (int i = 0; i < o.iterations; ++i) {
        char* out = nullptr;
        const auto t0 = Clock::now();
        check(bd_perceptor_process(perceptor.get(), frame.get(), hi.get(), (i + 1) / 30.0, 0, &out), "perceptor failed");
        patchMs.push_back(ms_since(t0));
        const json j = json::parse(take(out));
        for (const auto& p : j["patches"]) patchWindows += p["windowsEvaluated"].get<double>();
    }
    json report{{"iterations", o.iterations},
                {"fullFrame", latency(fullMs, static_cast<double>(fullWindows))},
                {"patches", latency(patchMs, patchWindows / o.iterations)}};
    std::cout << report.dump() << '\n';
}

// ---- train ----

struct TrainOptions {
    std::string data = ".";
    std::string output;
    std::string info;
    std::string bg;
    std::string featureType = "LBP";
    std::string mode = "ALL";
    bool deskScale = false;
    bool nonsym = false;
    bool baseFormatSave = false;
    int precalcValBufSize = 256;
    int precalcIdxBufSize = 256;
    bd_train_params p{};
};

void run_train(TrainOptions o, const CLI::App& cmd) {
    if (o.featureType != "LBP") throw RuntimeFailure("only --feature-type LBP is supported");
    if (o.deskScale) {
        // Desk-scale defaults, overridden by any explicitly given flag.
        bd_train_params desk;
        bd_train_params_desk_scale(&desk);
        if (cmd.count("--num-stages") == 0) o.p.num_stages = desk.num_stages;
        if (cmd.count("--min-hit-rate") == 0) o.p.min_hit_rate = desk.min_hit_rate;
        if (cmd.count("--num-pos") == 0) o.p.num_pos = desk.num_pos;
        if (cmd.count("--num-neg") == 0) o.p.num_neg = desk.num_neg;
    }
    const fs::path out = o.output.empty() ? fs::path(o.data) / "cascade.xml" : fs::path(o.output);
    if (out.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(out.parent_path(), ec);
    }
    bd_model* raw = nullptr;
    char* report = nullptr;
    const auto progress = [](const char* stageJson, void*) {
        std::cout << stageJson << '\n';
        std::cout.flush();
    };
    check(bd_train(o.info.c_str(), o.bg.c_str(), &o.p, progress, nullptr, &raw, &report), "training failed");
    const ModelPtr model(raw);
    const json r = json::parse(take(report));
    check(bd_model_save(model.get(), out.string().c_str()), "cannot save model");
    std::cout << json{{"model", out.generic_string()},
                      {"stages", r["stages"].size()},
                      {"stopReason", r["stopReason"]},
                      {"finalAcceptanceRatio", r["finalAcceptanceRatio"]}}
                     .dump()
              << '\n';
}

void add_config_flags(CLI::App* cmd, TrackOptions& o) {
    cmd->add_option("--patrol-count", o.cfg.patrol_count, "Number of patrol tiles")->capture_default_str();
    cmd->add_option("--patrol-overlap", o.cfg.patrol_overlap, "Patrol tile overlap fraction")->capture_default_str();
    cmd->add_option("--margin-factor", o.cfg.margin_factor, "Prediction patch side / ball diameter")
        ->capture_default_str();
    cmd->add_option("--base-neighbors", o.cfg.base_neighbors, "Neighbors threshold")->capture_default_str();
    cmd->add_option("--obstacle-boost", o.cfg.obstacle_neighbors_boost, "Extra neighbors near obstacles")
        ->capture_default_str();
    cmd->add_option("--high-res-area", o.cfg.high_res_area_cutoff, "Max patch area scanned at high resolution")
        ->capture_default_str();
    cmd->add_option("--scale-factor", o.cfg.scale_factor, "Scale step")->capture_default_str();
    cmd->add_option("--step", o.cfg.step, "Window stride at the model scale")->capture_default_str();
    cmd->add_option("--fps", o.fps, "Frame rate used for timestamps")->capture_default_str();
    cmd->add_option("--hires", o.hires, "Directory of 2x frames with matching file names");
    cmd->add_flag("--full-frame", o.fullFrame, "Baseline: scan the whole frame every time");
    cmd->add_flag("--obstacle-hint", o.obstacleHint, "Raise the neighbors threshold on every frame");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Real-time LBP-cascade ball detection, tracking and training"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    DetectOptions det;
    bd_detect_params_default(&det.params);
    auto* detect = app.add_subcommand("detect", "Detect balls in an image or a directory of frames");
    detect->add_option("--model", det.model, "Cascade XML")->required();
    detect->add_option("input", det.input, "Image file or frame directory")->required();
    detect->add_option("--annotate", det.annotate, "Write annotated PGM frames to this directory");
    detect->add_option("--scale-factor", det.params.scale_factor, "Scale step")->capture_default_str();
    detect->add_option("--min-neighbors", det.params.min_neighbors, "Grouping threshold")->capture_default_str();
    detect->add_option("--min-size", det.params.min_size, "Smallest window (0 = model window)")->capture_default_str();
    detect->add_option("--max-size", det.params.max_size, "Largest window (0 = unbounded)")->capture_default_str();
    detect->add_option("--step", det.params.step, "Window stride at the model scale")->capture_default_str();
    detect->add_option("--group-eps", det.params.group_eps, "Grouping similarity")->capture_default_str();

    TrackOptions trk;
    bd_perceptor_config_default(&trk.cfg);
    auto* track = app.add_subcommand("track", "Scheduler-driven detection and tracking over a frame sequence");
    track->add_option("--model", trk.model, "Cascade XML")->required();
    track->add_option("frames", trk.frames, "Frame directory")->required();
    add_config_flags(track, trk);

    TrainOptions tr;
    bd_train_params_default(&tr.p);
    auto* train = app.add_subcommand("train", "Train an LBP cascade");
    train->add_option("--data", tr.data, "Output directory (model written as cascade.xml)")->capture_default_str();
    train->add_option("--output", tr.output, "Explicit model path");
    train->add_option("--info", tr.info, "Positives description file")->required();
    train->add_option("--bg", tr.bg, "Negatives list file")->required();
    train->add_option("--num-stages", tr.p.num_stages)->capture_default_str();
    train->add_option("--min-hit-rate", tr.p.min_hit_rate)->capture_default_str();
    train->add_option("--max-false-alarm-rate", tr.p.max_false_alarm_rate)->capture_default_str();
    train->add_option("--num-pos", tr.p.num_pos)->capture_default_str();
    train->add_option("--num-neg", tr.p.num_neg)->capture_default_str();
    train->add_option("-w", tr.p.win_w, "Window width")->capture_default_str();
    train->add_option("-h", tr.p.win_h, "Window height")->capture_default_str();
    train->add_option("--acceptance-ratio-break-value", tr.p.acceptance_ratio_break_value)->capture_default_str();
    train->add_option("--max-weak-count", tr.p.max_weak_count)->capture_default_str();
    train->add_option("--weight-trim-rate", tr.p.weight_trim_rate)->capture_default_str();
    train->add_option("--seed", tr.p.seed)->capture_default_str();
    train->add_option("--feature-type", tr.featureType)->capture_default_str();
    train->add_option("--mode", tr.mode, "Accepted for compatibility")->capture_default_str();
    train->add_option("--precalc-val-buf-size", tr.precalcValBufSize, "Accepted for compatibility");
    train->add_option("--precalc-idx-buf-size", tr.precalcIdxBufSize, "Accepted for compatibility");
    train->add_flag("--nonsym", tr.nonsym, "Accepted; samples are never mirrored");
    train->add_flag("--base-format-save", tr.baseFormatSave, "Accepted; the standard format is always written");
    train->add_flag("--desk-scale", tr.deskScale, "5 stages, min hit rate 0.99, 500 positives, 2000 negatives");

    EvalOptions ev;
    bd_perceptor_config_default(&ev.track.cfg);
    auto* eval = app.add_subcommand("eval", "Compare detections with ground truth");
    eval->add_option("--truth", ev.truth, "Ground truth JSON lines")->required();
    eval->add_option("--detections", ev.detections, "Detections JSON lines (instead of running a model)");
    eval->add_option("--model", ev.track.model, "Cascade XML");
    eval->add_option("--frames", ev.track.frames, "Frame directory");
    eval->add_option("--iou", ev.iou, "Match threshold")->capture_default_str();
    add_config_flags(eval, ev.track);

    BenchOptions bn;
    auto* bench = app.add_subcommand("bench", "Time full-frame and scheduled scanning on one frame");
    bench->add_option("--model", bn.model, "Cascade XML")->required();
    bench->add_option("frame", bn.frame, "Reference frame")->required();
    bench->add_option("--hires", bn.hires, "2x version of the frame");
    bench->add_option("--iterations", bn.iterations)->capture_default_str();

    std::string datasetDir;
    std::string datasetOut;
    auto* dataset = app.add_subcommand("dataset", "Training list tooling");
    dataset->require_subcommand(1);
    auto* createPos = dataset->add_subcommand("create-pos", "Describe every image of a directory as one positive");
    createPos->add_option("dir", datasetDir)->required();
    createPos->add_option("--output", datasetOut, "Write to a file instead of stdout");
    auto* listNeg = dataset->add_subcommand("list-neg", "List negative images recursively");
    listNeg->add_option("dir", datasetDir)->required();
    listNeg->add_option("--output", datasetOut, "Write to a file instead of stdout");

    std::string inspectModel;
    auto* inspect = app.add_subcommand("inspect", "Summarize a cascade model");
    inspect->add_option("model", inspectModel)->required();

    std::string synthOut;
    std::uint64_t synthSeed = 1;
    int synthPos = 500, synthNeg = 40, synthFrames = 200;
    bool synthNoBall = false;
    auto* synth = app.add_subcommand("synth", "Generate synthetic training data or sequences");
    synth->require_subcommand(1);
    auto* synthData = synth->add_subcommand("dataset", "Positive windows and ball-free clutter images");
    synthData->add_option("--out", synthOut)->required();
    synthData->add_option("--num-pos", synthPos)->capture_default_str();
    synthData->add_option("--num-neg-images", synthNeg)->capture_default_str();
    synthData->add_option("--seed", synthSeed)->capture_default_str();
    auto* synthSeq = synth->add_subcommand("sequence", "320x240 moving-ball frames with ground truth");
    synthSeq->add_option("--out", synthOut)->required();
    synthSeq->add_option("--frames", synthFrames)->capture_default_str();
    synthSeq->add_option("--seed", synthSeed)->capture_default_str();
    synthSeq->add_flag("--no-ball", synthNoBall);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*detect) {
            run_detect(det);
        } else if (*track) {
            const TrackRun run = run_track(trk);
            for (const auto& l : run.lines) std::cout << l << '\n';
            std::cout << run.summary.dump() << '\n';
            print_timing(run.frameMs);
        } else if (*train) {
            run_train(tr, *train);
        } else if (*eval) {
            run_eval(ev);
        } else if (*bench) {
            run_bench(bn);
        } else if (*createPos || *listNeg) {
            char* text = nullptr;
            if (*createPos) {
                char* warnings = nullptr;
                check(bd_dataset_create_positives(datasetDir.c_str(), &text, &warnings), "create-pos failed");
                std::cerr << take(warnings);
            } else {
                check(bd_dataset_list_negatives(datasetDir.c_str(), &text), "list-neg failed");
            }
            const std::string out = take(text);
            if (datasetOut.empty()) std::cout << out;
            else write_file(datasetOut, out);
        } else if (*inspect) {
            const ModelPtr model = load_model(inspectModel);
            char* summary = nullptr;
            check(bd_model_summary(model.get(), &summary), "inspect failed");
            const json s = json::parse(take(summary));
            std::size_t weaks = 0;
            for (const auto& st : s["stages"]) weaks += st["weaks"].get<std::size_t>();
            json out{{"window", {s["windowW"], s["windowH"]}},
                     {"stageCount", s["stages"].size()},
                     {"weakCount", weaks},
                     {"featureCount", s["features"]},
                     {"stages", s["stages"]}};
            std::cout << out.dump() << '\n';
            std::cerr << s["windowW"].get<int>() << "x" << s["windowH"].get<int>() << ", " << s["stages"].size()
                      << (s["stages"].size() == 1 ? " stage, " : " stages, ") << weaks
                      << (weaks == 1 ? " weak, " : " weaks, ") << s["features"].get<std::size_t>()
                      << (s["features"].get<std::size_t>() == 1 ? " feature\n" : " features\n");
        } else if (*synthData) {
            check(bd_synth_dataset(synthOut.c_str(), synthPos, synthNeg, synthSeed), "synth dataset failed");
        } else if (*synthSeq) {
            check(bd_synth_sequence(synthOut.c_str(), synthFrames, synthNoBall ? 0 : 1, synthSeed),
                  "synth sequence failed");
        }
    } catch (const RuntimeFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
