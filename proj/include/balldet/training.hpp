#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "balldet/imaging.hpp"
#include "balldet/lbp_cascade.hpp"

namespace balldet {

struct TrainParams {
    int numStages = 20;
    double minHitRate = 0.999;
    double maxFalseAlarmRate = 0.5;
    int numPos = 2728;
    int numNeg = 16000;
    int winW = 16;
    int winH = 16;
    double acceptanceRatioBreakValue = 10e-5;
    int maxWeakCount = 100;
    double weightTrimRate = 0.95;  ///< 1.0 disables trimming
    double scaleFactor = 1.1;      ///< scale ladder used when sampling negatives
    std::uint64_t seed = 20170101;

    /// Desk-scale recipe: 5 stages at minHitRate 0.99, everything else as above.
    static TrainParams desk_scale();

    void validate() const;
};

/// Positive windows (exactly winW x winH) and whole negative images.
struct SampleSet {
    std::vector<GrayImage> positives;
    std::vector<GrayImage> negativePool;
};

/// LBP codes of every pool feature for one training window.
using FeatureCodes = std::vector<std::uint8_t>;

struct WeightedSample {
    FeatureCodes featureCodes;
    int label = 1;  ///< +1 or -1
    double weight = 0.0;
};

struct FeatureRange {
    std::size_t begin = 0;
    std::size_t end = static_cast<std::size_t>(-1);
};

struct WeakResult {
    LbpWeak weak;        ///< featureIndex refers to the feature pool
    double error = 0.0;  ///< weighted squared error of the fitted stump
};

struct StageResult {
    Stage stage;
    double hitRate = 0.0;
    double falseAlarmRate = 0.0;
    bool belowTarget = false;
};

/// A negative training window: a square region of one pool image, evaluated
/// with the scaled-feature path exactly as detection would see it.
struct NegativeWindow {
    std::size_t image = 0;
    int x = 0;
    int y = 0;
    double scale = 1.0;
};

struct BootstrapResult {
    std::vector<NegativeWindow> windows;
    std::uint64_t scanned = 0;
    double acceptanceRatio = 0.0;
    bool exhausted = false;
};

struct StageReport {
    int stage = 0;
    int weakCount = 0;
    int numPos = 0;
    int numNeg = 0;
    double hitRate = 0.0;
    double falseAlarmRate = 0.0;
    double acceptanceRatio = 0.0;  ///< negatives accepted by the preceding stages
    bool belowTarget = false;
};

enum class StopReason { StageLimit, BreakValue, NegativesExhausted, PositivesExhausted };

const char* to_string(StopReason reason) noexcept;

struct TrainResult {
    CascadeModel model;
    std::vector<StageReport> stages;
    StopReason reason = StopReason::StageLimit;
    double finalAcceptanceRatio = 1.0;
};

/// Every 3x3-cell LBP feature fitting the window, ordered by (cellH, cellW, cellY, cellX).
std::vector<LbpFeature> generate_feature_pool(int winW, int winH);

/// Codes of every pool feature for the window at (x, y) and `scale`.
FeatureCodes window_codes(const IntegralImage& ii, int x, int y, double scale, std::span<const LbpFeature> pool);

/// Gentle AdaBoost regression stump over the 256 LBP categories of each
/// candidate feature; ties resolve to the lowest feature index.
WeakResult train_weak(std::span<const WeightedSample> samples, std::span<const LbpFeature> pool,
                      FeatureRange range = {});

/// Boosts weaks until the false-alarm target is met at the hit-rate quantile
/// threshold, or maxWeakCount is reached (belowTarget is then set).
StageResult train_stage(std::span<const FeatureCodes> positives, std::span<const FeatureCodes> negatives,
                        std::span<const LbpFeature> pool, const TrainParams& p);

/// Harvests up to `count` random windows from the pool that `partial` accepts.
/// At most `maxScans` windows are examined.
BootstrapResult bootstrap_negatives(std::span<const IntegralImage> pool, const CascadeModel& partial,
                                    std::size_t count, int winW, int winH, double scaleFactor, std::mt19937_64& rng,
                                    std::uint64_t maxScans);

TrainResult train_cascade(const SampleSet& data, const TrainParams& p,
                          const std::function<void(const StageReport&)>& progress = {});

/// Drops unused features and renumbers weak feature indices.
CascadeModel compact_features(const CascadeModel& model);

std::string stage_report_json(const StageReport& report);

}  // namespace balldet
