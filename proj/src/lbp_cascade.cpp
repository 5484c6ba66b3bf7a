#include "balldet/lbp_cascade.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "balldet/error.hpp"

namespace balldet {

namespace {

constexpr double kScaleEpsilon = 1e-9;

/// Table offsets of the 4x4 corner lattice of a scaled feature, relative to
/// the window's top-left table entry.
struct CompiledFeature {
    std::array<std::ptrdiff_t, 16> offsets;
};

CompiledFeature compile_feature(const LbpFeature& f, double scale, int stride) {
    const int dx = scaled_extent(f.cellX, scale);
    const int dy = scaled_extent(f.cellY, scale);
    const int cw = scaled_extent(f.cellW, scale, 1);
    const int ch = scaled_extent(f.cellH, scale, 1);
    CompiledFeature c{};
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i)
            c.offsets[j * 4 + i] = static_cast<std::ptrdiff_t>(dy + j * ch) * stride + (dx + i * cw);
    return c;
}

int code_at(const std::int64_t* base, const CompiledFeature& f) {
    std::int64_t p[16];
    for (int k = 0; k < 16; ++k) p[k] = base[f.offsets[k]];
    auto cell = [&](int i, int j) {
        const int k = j * 4 + i;
        return p[k] - p[k + 1] - p[k + 4] + p[k + 5];
    };
    const std::int64_t c = cell(1, 1);
    return (cell(0, 0) >= c ? 128 : 0) | (cell(1, 0) >= c ? 64 : 0) | (cell(2, 0) >= c ? 32 : 0) |
           (cell(2, 1) >= c ? 16 : 0) | (cell(2, 2) >= c ? 8 : 0) | (cell(1, 2) >= c ? 4 : 0) |
           (cell(0, 2) >= c ? 2 : 0) | (cell(0, 1) >= c ? 1 : 0);
}

/// Extent of a feature's 3x3 grid at a given scale, relative to the window origin.
Rect scaled_feature_extent(const LbpFeature& f, double scale) {
    const int cw = scaled_extent(f.cellW, scale, 1);
    const int ch = scaled_extent(f.cellH, scale, 1);
    return {scaled_extent(f.cellX, scale), scaled_extent(f.cellY, scale), 3 * cw, 3 * ch};
}

void check_params(const DetectParams& p) {
    if (!(p.scaleFactor > 1.0)) fail(ErrorCode::Parameter, "scaleFactor must be > 1");
    if (p.step < 1) fail(ErrorCode::Parameter, "step must be >= 1");
    if (p.minNeighbors < 0) fail(ErrorCode::Parameter, "minNeighbors must be >= 0");
    if (p.minSize < 0 || p.maxSize < 0) fail(ErrorCode::Parameter, "sizes must be non-negative");
    if (p.maxSize > 0 && p.minSize > p.maxSize) fail(ErrorCode::Parameter, "minSize exceeds maxSize");
    if (p.groupEps < 0) fail(ErrorCode::Parameter, "grouping eps must be >= 0");
}

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

bool similar(const Rect& a, const Rect& b, double eps) {
    const double delta = eps * 0.5 * (std::min(a.w, b.w) + std::min(a.h, b.h));
    return std::abs(a.x - b.x) <= delta && std::abs(a.y - b.y) <= delta && std::abs(a.right() - b.right()) <= delta &&
           std::abs(a.bottom() - b.bottom()) <= delta;
}

}  // namespace

CompiledCascade::CompiledCascade(const CascadeModel& model, int stride, double scale) {
    std::vector<std::size_t> slot(model.features.size(), static_cast<std::size_t>(-1));
    for (const Stage& stage : model.stages) {
        StageRef ref{weaks_.size(), 0, stage.threshold};
        for (const LbpWeak& weak : stage.weaks) {
            const auto idx = static_cast<std::size_t>(weak.featureIndex);
            if (slot[idx] == static_cast<std::size_t>(-1)) {
                slot[idx] = offsets_.size();
                offsets_.push_back(compile_feature(model.features[idx], scale, stride).offsets);
            }
            weaks_.push_back({slot[idx], &weak});
        }
        ref.end = weaks_.size();
        stages_.push_back(ref);
    }
}

WindowDecision CompiledCascade::evaluate(const std::int64_t* base) const {
    double sum = 0.0;
    for (std::size_t s = 0; s < stages_.size(); ++s) {
        const StageRef& stage = stages_[s];
        sum = 0.0;
        for (std::size_t i = stage.begin; i < stage.end; ++i)
            sum += weaks_[i].weak->response(code_at(base, CompiledFeature{offsets_[weaks_[i].feature]}));
        if (sum < stage.threshold) return {false, 0.0, static_cast<int>(s)};
    }
    return {true, sum, -1};
}

int CascadeModel::max_weak_count() const {
    std::size_t n = 0;
    for (const auto& s : stages) n = std::max(n, s.weaks.size());
    return static_cast<int>(n);
}

void CascadeModel::validate() const {
    if (windowW < 3 || windowH < 3) fail(ErrorCode::Validation, "model window must be at least 3x3");
    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& f = features[i];
        if (f.cellW < 1 || f.cellH < 1 || f.cellX < 0 || f.cellY < 0 || f.cellX + 3 * f.cellW > windowW ||
            f.cellY + 3 * f.cellH > windowH)
            fail(ErrorCode::Validation, "feature " + std::to_string(i) + " leaves the " + std::to_string(windowW) +
                                            "x" + std::to_string(windowH) + " window");
    }
    for (std::size_t s = 0; s < stages.size(); ++s)
        for (std::size_t w = 0; w < stages[s].weaks.size(); ++w) {
            const int idx = stages[s].weaks[w].featureIndex;
            if (idx < 0 || static_cast<std::size_t>(idx) >= features.size())
                fail(ErrorCode::Validation, "stage " + std::to_string(s) + " weak " + std::to_string(w) +
                                                " references feature " + std::to_string(idx) + " of " +
                                                std::to_string(features.size()));
        }
}

int scaled_extent(int value, double scale, int minimum) {
    return std::max(minimum, static_cast<int>(std::floor(value * scale + kScaleEpsilon)));
}

int lbp_code(const IntegralImage& ii, const LbpFeature& f, int originX, int originY, double scale) {
    Rect grid = scaled_feature_extent(f, scale);
    grid.x += originX;
    grid.y += originY;
    if (!contains(ii.source_bounds(), grid))
        fail(ErrorCode::Bounds, "scaled LBP grid leaves the image at (" + std::to_string(grid.x) + "," +
                                    std::to_string(grid.y) + ")");
    const CompiledFeature c = compile_feature(f, scale, ii.width());
    return code_at(ii.table().data() + static_cast<std::ptrdiff_t>(originY) * ii.width() + originX, c);
}

WindowDecision eval_window(const CascadeModel& model, const IntegralImage& ii, int originX, int originY,
                           double scale) {
    const Rect window{originX, originY, scaled_extent(model.windowW, scale), scaled_extent(model.windowH, scale)};
    if (!contains(ii.source_bounds(), window)) fail(ErrorCode::Bounds, "scaled window leaves the image");
    for (const auto& f : model.features) {
        Rect grid = scaled_feature_extent(f, scale);
        grid.x += originX;
        grid.y += originY;
        if (!contains(ii.source_bounds(), grid)) fail(ErrorCode::Bounds, "scaled feature leaves the image");
    }
    return CompiledCascade(model, ii.width(), scale).evaluate(ii, originX, originY);
}

std::vector<ScaleLevel> scale_ladder(int windowW, int windowH, const DetectParams& p, int regionW, int regionH) {
    check_params(p);
    const int minSize = p.minSize > 0 ? p.minSize : windowW;
    if (minSize < windowW)
        fail(ErrorCode::Parameter, "minSize " + std::to_string(minSize) + " is below the model window " +
                                       std::to_string(windowW));
    const int limitW = p.maxSize > 0 ? std::min(p.maxSize, regionW) : regionW;
    const int limitH = p.maxSize > 0 ? std::min(p.maxSize, regionH) : regionH;
    const double base = static_cast<double>(minSize) / windowW;

    std::vector<ScaleLevel> ladder;
    for (int k = 0;; ++k) {
        const double s = base * std::pow(p.scaleFactor, k);
        const int w = scaled_extent(windowW, s);
        const int h = scaled_extent(windowH, s);
        if (w > limitW || h > limitH) break;
        if (!ladder.empty() && ladder.back().windowW == w && ladder.back().windowH == h) continue;
        ladder.push_back({s, w, h, std::max(1, static_cast<int>(std::lround(p.step * s)))});
    }
    return ladder;
}

std::vector<RawWindow> scan_windows(const CascadeModel& model, const IntegralImage& ii, const Rect& roi,
                                    const DetectParams& p, DetectStats* stats) {
    if (!contains(ii.source_bounds(), roi)) fail(ErrorCode::Bounds, "scan region leaves the image");
    std::vector<RawWindow> raw;
    std::uint64_t evaluated = 0;
    for (const ScaleLevel& level : scale_ladder(model.windowW, model.windowH, p, roi.w, roi.h)) {
        const CompiledCascade compiled(model, ii.width(), level.scale);
        const std::int64_t* table = ii.table().data();
        for (int y = roi.y; y + level.windowH <= roi.bottom(); y += level.step) {
            const std::int64_t* rowBase = table + static_cast<std::ptrdiff_t>(y) * ii.width();
            for (int x = roi.x; x + level.windowW <= roi.right(); x += level.step) {
                ++evaluated;
                const WindowDecision d = compiled.evaluate(rowBase + x);
                if (d.accepted) raw.push_back({{x, y, level.windowW, level.windowH}, d.score});
            }
        }
    }
    if (stats) stats->windowsEvaluated += evaluated;
    return raw;
}

std::vector<Detection> detect_multiscale(const CascadeModel& model, const IntegralImage& ii, const Rect& roi,
                                         const DetectParams& p, DetectStats* stats) {
    const auto raw = scan_windows(model, ii, roi, p, stats);
    return group_rectangles(raw, p.minNeighbors, p.groupEps);
}

std::vector<Detection> detect_multiscale(const CascadeModel& model, const GrayImage& img, const DetectParams& p,
                                         DetectStats* stats) {
    const IntegralImage ii(img);
    return detect_multiscale(model, ii, img.bounds(), p, stats);
}

std::vector<Detection> group_rectangles(std::span<const RawWindow> raw, int minNeighbors, double eps) {
    if (eps < 0) fail(ErrorCode::Parameter, "grouping eps must be >= 0");
    const std::size_t n = raw.size();
    DisjointSets sets(n);

    // Bucket by window size; a pair can only be similar when both sizes and
    // both origins differ by at most delta, so each size pair is matched on a
    // grid of delta-sized cells.
    std::map<std::pair<int, int>, std::vector<std::size_t>> levels;
    for (std::size_t i = 0; i < n; ++i) levels[{raw[i].rect.w, raw[i].rect.h}].push_back(i);
    std::vector<std::pair<std::pair<int, int>, const std::vector<std::size_t>*>> lv;
    for (const auto& [size, members] : levels) lv.push_back({size, &members});

    for (std::size_t a = 0; a < lv.size(); ++a)
        for (std::size_t b = a; b < lv.size(); ++b) {
            const auto [wa, ha] = lv[a].first;
            const auto [wb, hb] = lv[b].first;
            const double delta = eps * 0.5 * (std::min(wa, wb) + std::min(ha, hb));
            if (std::abs(wa - wb) > 2 * delta || std::abs(ha - hb) > 2 * delta) continue;
            const long long cell = std::max<long long>(1, static_cast<long long>(std::ceil(delta)));
            auto key = [cell](int x, int y) {
                const long long cx = x >= 0 ? x / cell : -((-x + cell - 1) / cell);
                const long long cy = y >= 0 ? y / cell : -((-y + cell - 1) / cell);
                return (cx << 32) ^ (cy & 0xffffffffLL);
            };
            std::unordered_map<long long, std::vector<std::size_t>> grid;
            for (std::size_t j : *lv[b].second) grid[key(raw[j].rect.x, raw[j].rect.y)].push_back(j);
            for (std::size_t i : *lv[a].second) {
                const Rect& r = raw[i].rect;
                for (long long dy = -1; dy <= 1; ++dy)
                    for (long long dx = -1; dx <= 1; ++dx) {
                        const auto it = grid.find(key(static_cast<int>(r.x + dx * cell), static_cast<int>(r.y + dy * cell)));
                        if (it == grid.end()) continue;
                        for (std::size_t j : it->second)
                            if (j != i && similar(r, raw[j].rect, eps)) sets.unite(i, j);
                    }
            }
        }

    struct Acc {
        long long x = 0, y = 0, w = 0, h = 0;
        int count = 0;
        double score = 0.0;
    };
    std::vector<Acc> acc(n);
    for (std::size_t i = 0; i < n; ++i) {
        Acc& a = acc[sets.find(i)];
        const Rect& r = raw[i].rect;
        a.x += r.x;
        a.y += r.y;
        a.w += r.w;
        a.h += r.h;
        a.score = a.count == 0 ? raw[i].score : std::max(a.score, raw[i].score);
        ++a.count;
    }

    std::vector<Detection> out;
    for (const Acc& a : acc) {
        if (a.count == 0 || a.count <= minNeighbors) continue;
        auto mean = [&](long long total) { return static_cast<int>(std::lround(static_cast<double>(total) / a.count)); };
        out.push_back({{mean(a.x), mean(a.y), mean(a.w), mean(a.h)}, a.score, a.count});
    }
    sort_canonical(out);
    return out;
}

std::vector<Detection> group_rectangles(std::span<const Rect> raw, int minNeighbors, double eps) {
    std::vector<RawWindow> windows;
    windows.reserve(raw.size());
    for (const Rect& r : raw) windows.push_back({r, 0.0});
    return group_rectangles(windows, minNeighbors, eps);
}

void sort_canonical(std::vector<Detection>& detections) {
    std::sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
        return std::tie(a.rect.y, a.rect.x, a.rect.w, a.rect.h, b.neighbors, b.score) <
               std::tie(b.rect.y, b.rect.x, b.rect.w, b.rect.h, a.neighbors, a.score);
    });
}

}  // namespace balldet
