// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "balldet/dataset.hpp"
#include "balldet/lbp_cascade.hpp"
#include "balldet/patch_scheduler.hpp"
#include "balldet/synthetic.hpp"
#include "balldet/tracking.hpp"
#include "balldet/training.hpp"
#include "oracles.hpp"

using namespace balldet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("criterion %2d: %s  %s (%s)\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

GrayImage shifted(const GrayImage& img, int c) {
    GrayImage out = img;
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) out.at(x, y) = static_cast<std::uint8_t>(img.at(x, y) + c);
    return out;
}

bool psd(const Eigen::Matrix4d& p) {
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(p).eigenvalues().minCoeff() >= -1e-9;
}

double accept_rate(const CascadeModel& m, std::span<const IntegralImage> images, std::span<const NegativeWindow> w) {
    std::size_t accepted = 0;
    for (const auto& nw : w) accepted += eval_window(m, images[nw.image], nw.x, nw.y, nw.scale).accepted;
    return w.empty() ? 0.0 : static_cast<double>(accepted) / static_cast<double>(w.size());
}

void criterion_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1001);
    int mismatches = 0;
    std::size_t detections = 0;
    for (int i = 0; i < 100; ++i) {
        const CascadeModel m = oracle::random_cascade(rng, 3);
        const int w = std::uniform_int_distribution<int>(m.windowW, 64)(rng);
        const int h = std::uniform_int_distribution<int>(m.windowH, 64)(rng);
        const GrayImage img = oracle::random_image(w, h, rng);
        DetectParams p;
        p.minNeighbors = std::uniform_int_distribution<int>(0, 3)(rng);
        p.scaleFactor = i % 2 ? 1.1 : 1.25;
        const auto got = detect_multiscale(m, img, p);
        const auto want = oracle::detect(m, img, p.scaleFactor, p.minNeighbors);
        mismatches += got != want;
        detections += want.size();
    }
    const double t = seconds_since(t0);
    report(1, mismatches == 0 && t < 60, "detect_multiscale equals the enumeration oracle on 100 random images",
           fmt("%d mismatches, %zu oracle detections, %.1f s", mismatches, detections, t));
}

void criterion_integral() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1002);
    int wrong = 0;
    for (int batch = 0; batch < 10; ++batch) {
        const GrayImage img = oracle::random_image(std::uniform_int_distribution<int>(1, 320)(rng),
                                                   std::uniform_int_distribution<int>(1, 240)(rng), rng);
        const IntegralImage ii(img);
        for (int q = 0; q < 1000; ++q) {
            const int x = std::uniform_int_distribution<int>(0, img.width())(rng);
            const int y = std::uniform_int_distribution<int>(0, img.height())(rng);
            const int w = std::uniform_int_distribution<int>(0, img.width() - x)(rng);
            const int h = std::uniform_int_distribution<int>(0, img.height() - y)(rng);
            wrong += rect_sum(ii, {x, y, w, h}) != oracle::pixel_sum(img, {x, y, w, h});
        }
    }
    const double t = seconds_since(t0);
    report(2, wrong == 0 && t < 10, "10000 rect_sum queries equal the per-pixel sum", fmt("%d wrong, %.2f s", wrong, t));
}

void criterion_illumination() {
    std::mt19937_64 rng(1003);
    int differing = 0, nonEmpty = 0;
    for (int i = 0; i < 50; ++i) {
        const CascadeModel m = oracle::random_cascade(rng, 3);
        GrayImage img = oracle::random_image(48, 48, rng);
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 48; ++x) img.at(x, y) = static_cast<std::uint8_t>(30 + img.at(x, y) * 185 / 255);
        DetectParams p;
        p.minNeighbors = 0;
        const auto base = detect_multiscale(m, img, p);
        nonEmpty += !base.empty();
        for (int c : {20, 40, -30}) differing += detect_multiscale(m, shifted(img, c), p) != base;
    }
    report(3, differing == 0, "detections unchanged under brightness shifts +20, +40, -30",
           fmt("%d of 150 differ, %d of 50 base outputs non-empty", differing, nonEmpty));
}

void criterion_round_trip(const CascadeModel& trained, const std::vector<synth::SyntheticFrame>& probe) {
    const auto fixturePath = std::filesystem::path(BALLDET_TEST_DATA) / "minimal_cascade.xml";
    int bad = 0;
    std::size_t detections = 0;
    for (const CascadeModel& m : {load_cascade(fixturePath), trained}) {
        const CascadeModel once = parse_cascade(serialize_cascade(m));
        const CascadeModel twice = parse_cascade(serialize_cascade(once));
        bad += !(once == m) || !(twice == once);
        for (const auto& f : probe) {
            const auto a = detect_multiscale(m, f.frame, DetectParams{});
            bad += a != detect_multiscale(twice, f.frame, DetectParams{});
            detections += a.size();
        }
    }
    report(4, bad == 0, "parse/serialize round trip keeps models and detections on 20 probe frames",
           fmt("%d differences, %zu detections compared", bad, detections));
}

void criterion_training(const SampleSet& data, const TrainResult& r, const TrainParams& p, double trainSeconds) {
    std::size_t hits = 0;
    for (const auto& pos : data.positives)
        hits += eval_window(r.model, IntegralImage(pos), 0, 0, 1.0).accepted;
    const double hitRate = static_cast<double>(hits) / static_cast<double>(data.positives.size());

    // The first stage's training negatives: the opening bootstrap draw of the training run.
    std::vector<IntegralImage> negs;
    for (const auto& img : data.negativePool) negs.emplace_back(img);
    std::mt19937_64 rng(p.seed);
    const auto first = bootstrap_negatives(negs, CascadeModel{}, static_cast<std::size_t>(p.numNeg), p.winW, p.winH,
                                           p.scaleFactor, rng, 1u << 30);
    const double trainFar = accept_rate(r.model, negs, first.windows);

    synth::DatasetSpec held;
    held.numPositives = 1;
    held.seed = 9001;
    std::vector<IntegralImage> heldNegs;
    for (const auto& img : synth::disc_dataset(held).negativePool) heldNegs.emplace_back(img);
    std::mt19937_64 heldRng(424242);
    const auto heldWindows = bootstrap_negatives(heldNegs, CascadeModel{}, 2000, p.winW, p.winH, p.scaleFactor,
                                                 heldRng, 1u << 30);
    const double heldFar = accept_rate(r.model, heldNegs, heldWindows.windows);

    const bool pass = r.model.stages.size() == 5 && hitRate >= 0.951 && trainFar <= 0.0313 && heldFar <= 0.10 &&
                      trainSeconds < 300;
    report(5, pass, "desk-scale training on the synthetic disc set",
           fmt("%zu stages, hit rate %.4f, training FAR %.4f, held-out FAR %.4f, %.1f s", r.model.stages.size(),
               hitRate, trainFar, heldFar, trainSeconds));
}

void criterion_pool() {
    const auto pool = generate_feature_pool(16, 16);
    std::size_t brute = 0;
    for (int cw = 1; cw <= 16; ++cw)
        for (int ch = 1; ch <= 16; ++ch)
            for (int x = 0; x < 16; ++x)
                for (int y = 0; y < 16; ++y) brute += x + 3 * cw <= 16 && y + 3 * ch <= 16;
    report(6, pool.size() == 1600 && brute == 1600, "16x16 feature pool size",
           fmt("%zu features, enumeration oracle %zu", pool.size(), brute));
}

struct TrackRun {
    std::vector<FrameStats> scheduler;
    std::vector<FrameStats> full;
    std::vector<double> frameMs;
    double seconds = 0.0;
};

TrackRun run_sequence(const CascadeModel& model, const std::vector<synth::SyntheticFrame>& seq) {
    const auto t0 = Clock::now();
    TrackRun run;
    BallPerceptor sched(model, SchedulerConfig{});
    BallPerceptor full(model, SchedulerConfig{});
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const double t = static_cast<double>(i) / 30.0;
        const auto f0 = Clock::now();
        run.scheduler.push_back(sched.process(seq[i].frame, &seq[i].highRes, t));
        run.frameMs.push_back(seconds_since(f0) * 1000.0);
        run.full.push_back(full.process_full_frame(seq[i].frame, t));
    }
    run.seconds = seconds_since(t0);
    return run;
}

void criterion_efficiency(const TrackRun& run, const std::vector<synth::SyntheticFrame>& seq) {
    double schedWindows = 0, fullWindows = 0;
    for (const auto& s : run.scheduler) schedWindows += static_cast<double>(s.windows_evaluated());
    for (const auto& s : run.full) fullWindows += static_cast<double>(s.windows_evaluated());
    const double n = static_cast<double>(seq.size());
    const double ratio = schedWindows > 0 ? fullWindows / schedWindows : 0.0;

    int firstHit = -1, after = 0, found = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const auto& b = run.scheduler[i].ball;
        const bool ok = b && circle_box_iou({b->x, b->y, b->radius}, *seq[i].truth) >= 0.5;
        if (firstHit < 0 && ok) firstHit = static_cast<int>(i);
        if (firstHit >= 0) {
            ++after;
            found += ok;
        }
    }
    const double rate = after ? static_cast<double>(found) / after : 0.0;
    report(7, ratio >= 5.0 && rate >= 0.95 && run.seconds < 120,
           "scheduler scans fewer windows and keeps the ball on a 200-frame sequence",
           fmt("%.0f vs %.0f windows/frame (%.1fx), ball at IoU>=0.5 in %d/%d frames after acquisition at frame "
               "%d, %.1f s",
               schedWindows / n, fullWindows / n, ratio, found, after, firstHit, run.seconds));
}

void criterion_early_stop(const TrackRun& run) {
    int violations = 0, ballFrames = 0;
    for (const auto& s : run.scheduler) {
        if (!s.ball) continue;
        ++ballFrames;
        std::size_t source = s.patches.size();
        for (std::size_t i = 0; i < s.patches.size(); ++i)
            if (s.patches[i].patch.kind == s.ball->sourceKind) {
                source = i;
                break;
            }
        if (source == s.patches.size()) ++violations;
        for (std::size_t i = source + 1; i < s.patches.size(); ++i) violations += s.patches[i].windowsEvaluated != 0;
    }
    report(8, violations == 0, "no windows evaluated after the ball-yielding patch",
           fmt("%d violations over %d ball frames", violations, ballFrames));
}

void criterion_patrol() {
    const FrameSize frame{320, 240};
    int uncovered = 0;
    std::string counts;
    for (int n : {2, 4, 6, 9}) {
        SchedulerConfig cfg;
        cfg.patrolCount = n;
        for (int start = 0; start < n; ++start) {
            PerceptorState s;
            s.patrolIndex = start;
            std::vector<char> hit(320 * 240, 0);
            for (int k = 0; k < n; ++k) {
                const Rect r = provide_patrol(s, frame, cfg).rect;
                for (int y = std::max(0, r.y); y < std::min(240, r.bottom()); ++y)
                    for (int x = std::max(0, r.x); x < std::min(320, r.right()); ++x) hit[y * 320 + x] = 1;
            }
            uncovered += static_cast<int>(std::count(hit.begin(), hit.end(), 0));
        }
        counts += (counts.empty() ? "" : ", ") + std::to_string(patrol_tiles(frame, cfg).size()) + " tiles";
    }
    report(9, uncovered == 0, "n consecutive patrol patches cover the frame for n = 2, 4, 6, 9",
           fmt("%d uncovered pixels; %s", uncovered, counts.c_str()));
}

void criterion_tracker() {
    const NoiseParams noise;
    const double vx = 90, vy = -45, dt = 1.0 / 30;
    KalmanState s = initial_state(10, 20, 0, noise);
    for (int k = 1; k <= 10; ++k) {
        s = predict(s, dt, noise);
        s = update(s, 10 + vx * k * dt, 20 + vy * k * dt, noise);
    }
    const double velErr = std::hypot(s.mean(2) - vx, s.mean(3) - vy);

    std::mt19937_64 rng(1010);
    std::uniform_real_distribution<double> pos(-500, 500), dtD(0.0, 0.5);
    KalmanState r = initial_state(0, 0, 0, noise);
    int bad = !psd(r.covariance);
    for (int i = 0; i < 1000; ++i) {
        r = predict(r, dtD(rng), noise);
        bad += !psd(r.covariance);
        r = update(r, pos(rng), pos(rng), noise);
        bad += !psd(r.covariance);
    }
    report(10, velErr < 1e-6 && bad == 0, "Kalman convergence and covariance health",
           fmt("velocity error %.2e px/s, %d non-PSD states in 1000 random cycles", velErr, bad));
}

void criterion_throughput(const TrackRun& run) {
    std::vector<double> ms = run.frameMs;
    std::nth_element(ms.begin(), ms.begin() + static_cast<std::ptrdiff_t>(ms.size() / 2), ms.end());
    const double median = ms[ms.size() / 2];
    const double fps = median > 0 ? 1000.0 / median : 1e9;
    report(11, fps >= 30.0, "scheduler-mode tracking throughput at 320x240",
           fmt("median %.3f ms per frame, %.0f frames/s", median, fps));
}

}  // namespace

int main() {
    synth::DatasetSpec spec;  // 500 positives, clutter images for 2000 negatives
    const SampleSet data = synth::disc_dataset(spec);
    const TrainParams params = TrainParams::desk_scale();
    const auto t0 = Clock::now();
    const TrainResult trained = train_cascade(data, params);
    const double trainSeconds = seconds_since(t0);

    synth::SequenceSpec seqSpec;
    const auto seq = synth::sequence(seqSpec);
    const std::vector<synth::SyntheticFrame> probe(seq.begin(), seq.begin() + 20);

    criterion_oracle();
    criterion_integral();
    criterion_illumination();
    criterion_round_trip(trained.model, probe);
    criterion_training(data, trained, params, trainSeconds);
    criterion_pool();
    const TrackRun run = run_sequence(trained.model, seq);
    criterion_efficiency(run, seq);
    criterion_early_stop(run);
    criterion_patrol();
    criterion_tracker();
    criterion_throughput(run);

    std::printf("%d of 11 criteria passed\n", 11 - failures);
    return failures == 0 ? 0 : 1;
}
