#pragma once

// Deliberately naive reference implementations. None of them call into the
// library beyond its plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <tuple>
#include <vector>

#include "balldet/imaging.hpp"
#include "balldet/lbp_cascade.hpp"

namespace oracle {

using balldet::CascadeModel;
using balldet::Detection;
using balldet::GrayImage;
using balldet::LbpFeature;
using balldet::Rect;

inline std::int64_t pixel_sum(const GrayImage& img, const Rect& r) {
    std::int64_t s = 0;
    for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x) s += img.at(x, y);
    return s;
}

inline GrayImage random_image(int w, int h, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> d(0, 255);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h);
    for (auto& p : px) p = static_cast<std::uint8_t>(d(rng));
    return GrayImage(w, h, std::move(px));
}

/// floor(v * s) with the tolerance the scaling contract specifies.
inline int scaled(int v, double s, int minimum = 0) {
    const int out = static_cast<int>(std::floor(v * s + 1e-9));
    return out < minimum ? minimum : out;
}

/// LBP code from nine per-pixel cell sums; neighbors are visited clockwise
/// from the top-left and fill bits 7 down to 0.
inline int lbp_code(const GrayImage& img, const LbpFeature& f, int ox, int oy, double s) {
    const int cw = scaled(f.cellW, s, 1), ch = scaled(f.cellH, s, 1);
    const int x0 = ox + scaled(f.cellX, s), y0 = oy + scaled(f.cellY, s);
    auto cell = [&](int i, int j) { return pixel_sum(img, {x0 + i * cw, y0 + j * ch, cw, ch}); };
    const std::int64_t center = cell(1, 1);
    const int ring[8][2] = {{0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
    int code = 0;
    for (int k = 0; k < 8; ++k) code = (code << 1) | (cell(ring[k][0], ring[k][1]) >= center ? 1 : 0);
    return code;
}

struct WindowResult {
    bool accepted = false;
    double score = 0.0;
};

inline WindowResult eval_window(const CascadeModel& m, const GrayImage& img, int ox, int oy, double s) {
    double sum = 0.0;
    for (const auto& stage : m.stages) {
        sum = 0.0;
        for (const auto& weak : stage.weaks) {
            const int code = lbp_code(img, m.features[weak.featureIndex], ox, oy, s);
            const bool in = (weak.subset[code / 32] >> (code % 32)) & 1u;
            sum += in ? weak.leafIn : weak.leafOut;
        }
        if (sum < stage.threshold) return {false, 0.0};
    }
    return {true, sum};
}

struct RawHit {
    Rect rect;
    double score;
};

/// Every window position of every distinct window size, scanned exhaustively.
inline std::vector<RawHit> enumerate_hits(const CascadeModel& m, const GrayImage& img, double factor, int minSize,
                                          int maxSize, int step) {
    const int minS = minSize > 0 ? minSize : m.windowW;
    const int limW = maxSize > 0 ? std::min(maxSize, img.width()) : img.width();
    const int limH = maxSize > 0 ? std::min(maxSize, img.height()) : img.height();
    std::vector<RawHit> hits;
    int lastW = -1, lastH = -1;
    double s = static_cast<double>(minS) / m.windowW;
    for (int k = 0;; ++k) {
        s = static_cast<double>(minS) / m.windowW * std::pow(factor, k);
        const int w = scaled(m.windowW, s), h = scaled(m.windowH, s);
        if (w > limW || h > limH) break;
        if (w == lastW && h == lastH) continue;
        lastW = w;
        lastH = h;
        const int st = std::max(1, static_cast<int>(std::lround(step * s)));
        for (int y = 0; y + h <= img.height(); y += st)
            for (int x = 0; x + w <= img.width(); x += st) {
                const auto r = eval_window(m, img, x, y, s);
                if (r.accepted) hits.push_back({{x, y, w, h}, r.score});
            }
    }
    return hits;
}

inline bool similar(const Rect& a, const Rect& b, double eps) {
    const double d = eps * 0.5 * (std::min(a.w, b.w) + std::min(a.h, b.h));
    return std::abs(a.x - b.x) <= d && std::abs(a.y - b.y) <= d && std::abs(a.x + a.w - b.x - b.w) <= d &&
           std::abs(a.y + a.h - b.y - b.h) <= d;
}

inline int round_mean(long long total, long long count) {
    return static_cast<int>((2 * total + count) / (2 * count));  // half-up for non-negative totals
}

/// Connected components of the similarity graph by repeated flood fill.
inline std::vector<Detection> group(const std::vector<RawHit>& hits, int minNeighbors, double eps) {
    const std::size_t n = hits.size();
    std::vector<int> label(n, -1);
    int classes = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (label[seed] != -1) continue;
        label[seed] = classes;
        std::vector<std::size_t> stack{seed};
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            for (std::size_t j = 0; j < n; ++j)
                if (label[j] == -1 && similar(hits[i].rect, hits[j].rect, eps)) {
                    label[j] = classes;
                    stack.push_back(j);
                }
        }
        ++classes;
    }
    std::vector<Detection> out;
    for (int c = 0; c < classes; ++c) {
        long long sx = 0, sy = 0, sw = 0, sh = 0, count = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (label[i] != c) continue;
            best = count == 0 ? hits[i].score : std::max(best, hits[i].score);
            sx += hits[i].rect.x;
            sy += hits[i].rect.y;
            sw += hits[i].rect.w;
            sh += hits[i].rect.h;
            ++count;
        }
        if (count <= minNeighbors) continue;
        out.push_back({{round_mean(sx, count), round_mean(sy, count), round_mean(sw, count), round_mean(sh, count)},
                       best,
                       static_cast<int>(count)});
    }
    std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
        return std::make_tuple(a.rect.y, a.rect.x, a.rect.w, a.rect.h, -a.neighbors, -a.score) <
               std::make_tuple(b.rect.y, b.rect.x, b.rect.w, b.rect.h, -b.neighbors, -b.score);
    });
    return out;
}

inline std::vector<Detection> detect(const CascadeModel& m, const GrayImage& img, double factor, int minNeighbors,
                                     int minSize = 0, int maxSize = 0, int step = 1, double eps = 0.2) {
    return group(enumerate_hits(m, img, factor, minSize, maxSize, step), minNeighbors, eps);
}

/// Random hand-built cascade: up to `maxStages` stages of 1..3 weaks over a
/// random feature set; thresholds are drawn so that stages do reject windows.
inline CascadeModel random_cascade(std::mt19937_64& rng, int maxStages = 3) {
    std::uniform_int_distribution<int> winD(8, 16);
    CascadeModel m;
    m.windowW = winD(rng);
    m.windowH = winD(rng);
    const int nf = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int i = 0; i < nf; ++i) {
        LbpFeature f;
        f.cellW = std::uniform_int_distribution<int>(1, m.windowW / 3)(rng);
        f.cellH = std::uniform_int_distribution<int>(1, m.windowH / 3)(rng);
        f.cellX = std::uniform_int_distribution<int>(0, m.windowW - 3 * f.cellW)(rng);
        f.cellY = std::uniform_int_distribution<int>(0, m.windowH - 3 * f.cellH)(rng);
        m.features.push_back(f);
    }
    std::uniform_real_distribution<double> leaf(-1.0, 1.0);
    const int ns = std::uniform_int_distribution<int>(1, maxStages)(rng);
    for (int s = 0; s < ns; ++s) {
        balldet::Stage st;
        const int nw = std::uniform_int_distribution<int>(1, 3)(rng);
        double lo = 0.0, hi = 0.0;
        for (int w = 0; w < nw; ++w) {
            balldet::LbpWeak weak;
            weak.featureIndex = std::uniform_int_distribution<int>(0, nf - 1)(rng);
            for (auto& word : weak.subset) word = static_cast<std::uint32_t>(rng());
            weak.leafIn = leaf(rng);
            weak.leafOut = leaf(rng);
            lo += std::min(weak.leafIn, weak.leafOut);
            hi += std::max(weak.leafIn, weak.leafOut);
            st.weaks.push_back(weak);
        }
        st.threshold = lo + (hi - lo) * std::uniform_real_distribution<double>(0.2, 0.6)(rng);
        m.stages.push_back(st);
    }
    return m;
}

}  // namespace oracle
