#include "balldet/patch_scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "balldet/error.hpp"

namespace balldet {

namespace {

Rect centered_square(double cx, double cy, int w, int h, FrameSize frame) {
    const Rect r{static_cast<int>(std::lround(cx - w / 2.0)), static_cast<int>(std::lround(cy - h / 2.0)), w, h};
    return intersect(r, {0, 0, frame.width, frame.height});
}

struct Grid {
    int cols = 1;
    int rows = 1;
};

Grid patrol_grid(FrameSize frame, int n) {
    Grid best{n, 1};
    double bestScore = std::numeric_limits<double>::infinity();
    for (int cols = 1; cols <= n; ++cols) {
        if (n % cols != 0) continue;
        const int rows = n / cols;
        const double aspect = (static_cast<double>(frame.width) / cols) / (static_cast<double>(frame.height) / rows);
        const double score = std::abs(std::log(aspect));
        if (score < bestScore - 1e-12) {
            bestScore = score;
            best = {cols, rows};
        }
    }
    return best;
}

/// Start offsets of `count` tiles of length `tile` spread over [0, extent).
std::vector<int> tile_offsets(int extent, int tile, int count) {
    std::vector<int> out(count, 0);
    for (int i = 1; i < count; ++i)
        out[i] = static_cast<int>(std::lround(static_cast<double>(i) * (extent - tile) / (count - 1)));
    return out;
}

int tile_length(int extent, int count, double overlap) {
    if (count == 1) return extent;
    return std::min(extent, static_cast<int>(std::ceil(extent / (count - (count - 1) * overlap))));
}

/// Applies neighbor threshold, resolution choice and size floors; none when the
/// patch cannot hold its smallest ball.
std::optional<ImagePatch> finalize(ImagePatch p, const PerceptorState& state, const SchedulerConfig& cfg) {
    p.neighborsThreshold = cfg.baseNeighbors + (state.obstacleHint ? cfg.obstacleNeighborsBoost : 0);
    p.useHighRes = p.rect.area() <= cfg.highResAreaCutoff;
    const int floor = p.useHighRes ? (cfg.modelWindow + 1) / 2 : cfg.modelWindow;
    p.minBallSize = std::max(p.minBallSize, floor);
    p.maxBallSize = std::min(p.maxBallSize, std::min(p.rect.w, p.rect.h));
    if (p.rect.empty() || p.maxBallSize < p.minBallSize) return std::nullopt;
    return p;
}

DetectParams patch_params(const SchedulerConfig& cfg, int minSize, int maxSize, int neighbors) {
    DetectParams p;
    p.scaleFactor = cfg.scaleFactor;
    p.step = cfg.step;
    p.groupEps = cfg.groupEps;
    p.minSize = minSize;
    p.maxSize = maxSize;
    p.minNeighbors = neighbors;
    return p;
}

/// The detection a patch reports: most neighbors, then best score, then canonical order.
const Detection& best_detection(const std::vector<Detection>& detections) {
    return *std::min_element(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
        if (a.neighbors != b.neighbors) return a.neighbors > b.neighbors;
        if (a.score != b.score) return a.score > b.score;
        return std::tie(a.rect.y, a.rect.x, a.rect.w) < std::tie(b.rect.y, b.rect.x, b.rect.w);
    });
}

void record_frame(PerceptorState& state, std::optional<Rect> ball, FrameSize frame, const SchedulerConfig& cfg) {
    const bool hadBall = !state.recentBalls.empty() && state.recentBalls.back().frameIndex == state.frameIndex - 1 &&
                         state.recentBalls.back().ball.has_value();
    state.recentBalls.push_back({state.frameIndex, ball});
    if (state.recentBalls.size() > 2) state.recentBalls.erase(state.recentBalls.begin());
    if (hadBall && !ball) state.patrolIndex = patrol_reset_index(frame, cfg);
    ++state.frameIndex;
}

}  // namespace

const char* to_string(PatchKind kind) noexcept {
    switch (kind) {
        case PatchKind::LastFrame: return "lastFrame";
        case PatchKind::Kalman: return "kalman";
        case PatchKind::Patrol: return "patrol";
        case PatchKind::FullFrame: return "fullFrame";
    }
    return "unknown";
}

void SchedulerConfig::validate() const {
    if (patrolCount < 1) fail(ErrorCode::Parameter, "patrol count must be >= 1");
    if (!(patrolOverlap >= 0.0 && patrolOverlap < 1.0)) fail(ErrorCode::Parameter, "patrol overlap must be in [0,1)");
    if (!(marginFactor >= 1.0)) fail(ErrorCode::Parameter, "margin factor must be >= 1");
    if (baseNeighbors < 0 || obstacleNeighborsBoost < 0) fail(ErrorCode::Parameter, "neighbor values must be >= 0");
    if (!(ballSizeSlack >= 1.0)) fail(ErrorCode::Parameter, "ball size slack must be >= 1");
    if (modelWindow < 3) fail(ErrorCode::Parameter, "model window must be >= 3");
    if (!(scaleFactor > 1.0) || step < 1) fail(ErrorCode::Parameter, "invalid scan parameters");
}

std::uint64_t FrameStats::windows_evaluated() const {
    std::uint64_t n = 0;
    for (const auto& p : patches) n += p.windowsEvaluated;
    return n;
}

std::optional<ImagePatch> provide_last_frame(const PerceptorState& state, FrameSize frame,
                                             const SchedulerConfig& cfg) {
    if (state.recentBalls.size() < 2) return std::nullopt;
    const BallRecord& older = state.recentBalls[state.recentBalls.size() - 2];
    const BallRecord& last = state.recentBalls.back();
    if (!older.ball || !last.ball) return std::nullopt;
    if (last.frameIndex != state.frameIndex - 1 || older.frameIndex != state.frameIndex - 2) return std::nullopt;

    const Rect& b = *last.ball;
    const double d = b.w;
    const int side = static_cast<int>(std::lround(cfg.marginFactor * d));
    ImagePatch p;
    p.rect = centered_square(b.x + b.w / 2.0, b.y + b.h / 2.0, side, side, frame);
    p.minBallSize = static_cast<int>(std::floor(d / cfg.ballSizeSlack));
    p.maxBallSize = static_cast<int>(std::ceil(d * cfg.ballSizeSlack));
    p.kind = PatchKind::LastFrame;
    if (p.rect.empty()) return std::nullopt;
    return p;
}

std::optional<ImagePatch> provide_kalman(const std::optional<ProjectedBall>& estimate, FrameSize frame,
                                         const SchedulerConfig& cfg) {
    if (!estimate) return std::nullopt;
    const ProjectedBall& e = *estimate;
    if (!(e.x >= 0 && e.y >= 0 && e.x < frame.width && e.y < frame.height)) return std::nullopt;
    const double d = e.diameter > 0 ? e.diameter : cfg.modelWindow;
    const int w = static_cast<int>(std::ceil(std::max(4.0 * e.stdX + d, cfg.marginFactor * d)));
    const int h = static_cast<int>(std::ceil(std::max(4.0 * e.stdY + d, cfg.marginFactor * d)));
    ImagePatch p;
    p.rect = centered_square(e.x, e.y, w, h, frame);
    p.minBallSize = static_cast<int>(std::floor(d / cfg.ballSizeSlack));
    p.maxBallSize = static_cast<int>(std::ceil(d * cfg.ballSizeSlack));
    p.kind = PatchKind::Kalman;
    if (p.rect.empty()) return std::nullopt;
    return p;
}

std::vector<Rect> patrol_tiles(FrameSize frame, const SchedulerConfig& cfg) {
    const Grid g = patrol_grid(frame, cfg.patrolCount);
    const int tw = tile_length(frame.width, g.cols, cfg.patrolOverlap);
    const int th = tile_length(frame.height, g.rows, cfg.patrolOverlap);
    const auto xs = tile_offsets(frame.width, tw, g.cols);
    const auto ys = tile_offsets(frame.height, th, g.rows);
    std::vector<Rect> tiles;
    for (int r = g.rows - 1; r >= 0; --r)
        for (int c = 0; c < g.cols; ++c) tiles.push_back({xs[c], ys[r], tw, th});
    return tiles;
}

int patrol_reset_index(FrameSize frame, const SchedulerConfig& cfg) {
    const Grid g = patrol_grid(frame, cfg.patrolCount);
    return (g.cols - 1) / 2;
}

ImagePatch provide_patrol(PerceptorState& state, FrameSize frame, const SchedulerConfig& cfg) {
    const auto tiles = patrol_tiles(frame, cfg);
    state.patrolIndex = ((state.patrolIndex % cfg.patrolCount) + cfg.patrolCount) % cfg.patrolCount;
    ImagePatch p;
    p.rect = tiles[static_cast<std::size_t>(state.patrolIndex)];
    p.minBallSize = cfg.modelWindow;
    p.maxBallSize = cfg.patrolMaxBallSize > 0 ? cfg.patrolMaxBallSize : std::min(p.rect.w, p.rect.h);
    p.kind = PatchKind::Patrol;
    state.patrolIndex = (state.patrolIndex + 1) % cfg.patrolCount;
    return p;
}

double predicted_cost(const ImagePatch& patch, const SchedulerConfig& cfg) {
    const int k = patch.useHighRes ? 2 : 1;
    const int minSize = std::max(patch.minBallSize * k, cfg.modelWindow);
    const int maxSize = patch.maxBallSize * k;
    if (maxSize < minSize) return 0.0;
    const auto ladder =
        scale_ladder(cfg.modelWindow, cfg.modelWindow, patch_params(cfg, minSize, maxSize, 0), patch.rect.w * k,
                     patch.rect.h * k);
    return static_cast<double>(patch.rect.area()) * k * k * static_cast<double>(ladder.size());
}

std::vector<ImagePatch> assemble_patches(PerceptorState& state, FrameSize frame, const SchedulerConfig& cfg,
                                         const std::optional<ProjectedBall>& worldEstimate) {
    cfg.validate();
    std::optional<ImagePatch> first;
    if (auto p = provide_last_frame(state, frame, cfg)) first = finalize(*p, state, cfg);

    std::vector<std::pair<double, ImagePatch>> middle;
    if (auto p = provide_kalman(worldEstimate, frame, cfg))
        if (auto f = finalize(*p, state, cfg)) middle.emplace_back(predicted_cost(*f, cfg), *f);
    std::stable_sort(middle.begin(), middle.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    std::optional<ImagePatch> patrol = finalize(provide_patrol(state, frame, cfg), state, cfg);

    std::vector<ImagePatch> out;
    if (first) out.push_back(*first);
    for (auto& [cost, p] : middle) out.push_back(p);
    if (patrol) out.push_back(*patrol);
    return out;
}

FrameStats run_frame(const CascadeModel& model, const GrayImage& frame, const GrayImage* highRes,
                     std::span<const ImagePatch> patches, PerceptorState& state, const SchedulerConfig& cfg) {
    if (highRes && (highRes->width() != 2 * frame.width() || highRes->height() != 2 * frame.height()))
        fail(ErrorCode::Dimension, "high-resolution frame must be exactly twice the working frame");
    const FrameSize size{frame.width(), frame.height()};
    const IntegralImage ii(frame);
    std::optional<IntegralImage> hiIi;

    FrameStats stats;
    stats.frame = state.frameIndex;
    for (const ImagePatch& patch : patches) {
        PatchStats ps{patch, 0};
        if (stats.ball) {
            stats.patches.push_back(ps);
            continue;
        }
        const Rect roi = intersect(patch.rect, {0, 0, size.width, size.height});
        const bool hi = patch.useHighRes && highRes != nullptr;
        const int k = hi ? 2 : 1;
        const int minSize = std::max(patch.minBallSize * k, model.windowW);
        const int maxSize = patch.maxBallSize * k;
        if (!roi.empty() && maxSize >= minSize) {
            if (hi && !hiIi) hiIi.emplace(*highRes);
            const IntegralImage& source = hi ? *hiIi : ii;
            const Rect scanRoi{roi.x * k, roi.y * k, roi.w * k, roi.h * k};
            DetectStats ds;
            const auto found = detect_multiscale(model, source, scanRoi,
                                                 patch_params(cfg, minSize, maxSize, patch.neighborsThreshold), &ds);
            ps.windowsEvaluated = ds.windowsEvaluated;
            if (!found.empty()) {
                const Detection& d = best_detection(found);
                BallPercept b;
                b.x = (d.rect.x + d.rect.w / 2.0) / k;
                b.y = (d.rect.y + d.rect.h / 2.0) / k;
                b.radius = d.rect.w / 2.0 / k;
                b.score = d.score;
                b.sourceKind = patch.kind;
                b.frameIndex = state.frameIndex;
                b.rect = hi ? Rect{static_cast<int>(std::lround(d.rect.x / 2.0)), static_cast<int>(std::lround(d.rect.y / 2.0)),
                                   static_cast<int>(std::lround(d.rect.w / 2.0)), static_cast<int>(std::lround(d.rect.h / 2.0))}
                            : d.rect;
                stats.ball = b;
            }
        }
        stats.patches.push_back(ps);
    }
    record_frame(state, stats.ball ? std::optional<Rect>(stats.ball->rect) : std::nullopt, size, cfg);
    return stats;
}

std::optional<ProjectedBall> identity_projection(const BallEstimate& e, double diameter) {
    return ProjectedBall{e.x, e.y, e.stdX, e.stdY, diameter};
}

BallPerceptor::BallPerceptor(CascadeModel model, SchedulerConfig cfg, NoiseParams noise, ProjectionHook projection)
    : model_(std::move(model)), cfg_(cfg), projection_(std::move(projection)), tracker_(noise) {
    cfg_.modelWindow = model_.windowW;
    cfg_.validate();
    model_.validate();
}

void BallPerceptor::track(const FrameStats& stats, double timestamp) {
    if (stats.ball) tracker_.observe(timestamp, stats.ball->x, stats.ball->y, 2.0 * stats.ball->radius);
}

FrameStats BallPerceptor::process(const GrayImage& frame, const GrayImage* highRes, double timestamp,
                                  bool obstacleHint, std::span<const BallEstimate> teammates) {
    state_.obstacleHint = obstacleHint;
    std::vector<BallEstimate> sources(teammates.begin(), teammates.end());
    if (auto own = tracker_.predicted(timestamp)) sources.push_back(*own);
    std::optional<ProjectedBall> projected;
    if (auto merged = merge_estimates(sources)) {
        const double d = tracker_.last_diameter() > 0 ? tracker_.last_diameter() : cfg_.modelWindow;
        projected = projection_(*merged, d);
    }
    const auto patches = assemble_patches(state_, {frame.width(), frame.height()}, cfg_, projected);
    FrameStats stats = run_frame(model_, frame, highRes, patches, state_, cfg_);
    track(stats, timestamp);
    stats.estimate = tracker_.predicted(timestamp);
    return stats;
}

FrameStats BallPerceptor::process_full_frame(const GrayImage& frame, double timestamp) {
    ImagePatch p;
    p.rect = frame.bounds();
    p.kind = PatchKind::FullFrame;
    p.minBallSize = cfg_.modelWindow;
    p.maxBallSize = cfg_.patrolMaxBallSize > 0 ? cfg_.patrolMaxBallSize : std::min(frame.width(), frame.height());
    p.neighborsThreshold = cfg_.baseNeighbors;
    const std::vector<ImagePatch> patches{p};
    FrameStats stats = run_frame(model_, frame, nullptr, patches, state_, cfg_);
    track(stats, timestamp);
    stats.estimate = tracker_.predicted(timestamp);
    return stats;
}

}  // namespace balldet
