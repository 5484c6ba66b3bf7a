#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "balldet/imaging.hpp"

namespace balldet {

/// 3x3 grid of equally sized cells placed inside the model window.
struct LbpFeature {
    int cellX = 0;
    int cellY = 0;
    int cellW = 1;
    int cellH = 1;

    friend bool operator==(const LbpFeature&, const LbpFeature&) = default;
};

/// Categorical stump: a 256-bit subset of LBP codes selects leafIn, the rest leafOut.
struct LbpWeak {
    int featureIndex = 0;
    std::array<std::uint32_t, 8> subset{};
    double leafIn = 0.0;
    double leafOut = 0.0;

    bool in_subset(int code) const { return (subset[code >> 5] >> (code & 31)) & 1u; }
    void set_bit(int code) { subset[code >> 5] |= 1u << (code & 31); }
    double response(int code) const { return in_subset(code) ? leafIn : leafOut; }

    friend bool operator==(const LbpWeak&, const LbpWeak&) = default;
};

struct Stage {
    double threshold = 0.0;
    std::vector<LbpWeak> weaks;

    friend bool operator==(const Stage&, const Stage&) = default;
};

struct CascadeModel {
    int windowW = 16;
    int windowH = 16;
    std::vector<LbpFeature> features;
    std::vector<Stage> stages;

    /// Largest weak count over all stages (the format's stageParams value).
    int max_weak_count() const;

    /// Throws a validation error on dangling feature indices or features
    /// that leave the window.
    void validate() const;

    friend bool operator==(const CascadeModel&, const CascadeModel&) = default;
};

struct Detection {
    Rect rect;
    double score = 0.0;
    int neighbors = 1;

    friend bool operator==(const Detection&, const Detection&) = default;
};

struct DetectParams {
    double scaleFactor = 1.1;
    int minNeighbors = 1;
    int minSize = 0;  ///< 0 selects the model window size
    int maxSize = 0;  ///< 0 means no bound besides the image
    int step = 1;
    double groupEps = 0.2;
};

/// Outcome of running the cascade on one window.
struct WindowDecision {
    bool accepted = false;
    double score = 0.0;    ///< final stage sum when accepted
    int rejectStage = -1;  ///< index of the failing stage otherwise

    friend bool operator==(const WindowDecision&, const WindowDecision&) = default;
};

/// One rung of the multi-scale ladder.
struct ScaleLevel {
    double scale = 1.0;
    int windowW = 0;
    int windowH = 0;
    int step = 1;
};

struct RawWindow {
    Rect rect;
    double score = 0.0;
};

struct DetectStats {
    std::uint64_t windowsEvaluated = 0;
};

/// Cascade with feature lattice offsets resolved for one integral-table stride
/// and one scale. Only features referenced by weaks are compiled. Evaluation is
/// unchecked: the caller keeps the scaled window inside the table. Holds
/// pointers into `model`, which must outlive it.
class CompiledCascade {
public:
    CompiledCascade(const CascadeModel& model, int stride, double scale);

    WindowDecision evaluate(const IntegralImage& ii, int x, int y) const {
        return evaluate(ii.table().data() + static_cast<std::ptrdiff_t>(y) * ii.width() + x);
    }
    WindowDecision evaluate(const std::int64_t* windowOrigin) const;

private:
    struct Weak {
        std::size_t feature;  ///< index into offsets_
        const LbpWeak* weak;
    };
    struct StageRef {
        std::size_t begin, end;
        double threshold;
    };
    std::vector<std::array<std::ptrdiff_t, 16>> offsets_;
    std::vector<Weak> weaks_;
    std::vector<StageRef> stages_;
};

/// floor(value * scale) clamped to at least `minimum`; the single rounding rule
/// shared by feature scaling and window sizing.
int scaled_extent(int value, double scale, int minimum = 0);

/// LBP code of `f` placed in the window whose top-left is (originX, originY),
/// with cells scaled by `scale`. Bit 7..0 = TL, T, TR, R, BR, B, BL, L; a bit is
/// set when the neighbor cell sum is >= the center cell sum.
int lbp_code(const IntegralImage& ii, const LbpFeature& f, int originX, int originY, double scale);

WindowDecision eval_window(const CascadeModel& model, const IntegralImage& ii, int originX, int originY,
                           double scale);

/// Scales enumerated for a region of the given size. Scales whose integer
/// window size repeats the previous rung are skipped.
std::vector<ScaleLevel> scale_ladder(int windowW, int windowH, const DetectParams& p, int regionW, int regionH);

/// Every accepted window inside `roi` (image coordinates), in scan order.
std::vector<RawWindow> scan_windows(const CascadeModel& model, const IntegralImage& ii, const Rect& roi,
                                    const DetectParams& p, DetectStats* stats = nullptr);

std::vector<Detection> detect_multiscale(const CascadeModel& model, const IntegralImage& ii, const Rect& roi,
                                         const DetectParams& p, DetectStats* stats = nullptr);
std::vector<Detection> detect_multiscale(const CascadeModel& model, const GrayImage& img, const DetectParams& p,
                                         DetectStats* stats = nullptr);

std::vector<Detection> group_rectangles(std::span<const RawWindow> raw, int minNeighbors, double eps = 0.2);
std::vector<Detection> group_rectangles(std::span<const Rect> raw, int minNeighbors, double eps = 0.2);

/// Sorts by y, then x, then size.
void sort_canonical(std::vector<Detection>& detections);

CascadeModel parse_cascade(std::string_view xml);
std::string serialize_cascade(const CascadeModel& model);
CascadeModel load_cascade(const std::filesystem::path& path);
void save_cascade(const CascadeModel& model, const std::filesystem::path& path);

}  // namespace balldet
