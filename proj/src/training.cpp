#include "balldet/training.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "balldet/error.hpp"

namespace balldet {

namespace {

constexpr int kBins = 256;

struct BinStats {
    double w = 0.0;
    double wy = 0.0;
};

/// Weighted label (y) view of a sample, independent of storage.
struct SampleView {
    const std::uint8_t* codes;
    double y;
    double w;
};

WeakResult fit_weak(std::span<const SampleView> samples, std::size_t featureCount, FeatureRange range) {
    const std::size_t begin = std::min(range.begin, featureCount);
    const std::size_t end = std::min(range.end, featureCount);
    if (begin >= end) fail(ErrorCode::Training, "empty feature range");

    double totalW = 0.0;
    double totalWyy = 0.0;
    for (const auto& s : samples) {
        if (!(s.w >= 0.0) || !std::isfinite(s.w)) fail(ErrorCode::Training, "sample weights must be finite and >= 0");
        totalW += s.w;
        totalWyy += s.w * s.y * s.y;
    }
    if (!(totalW > 0.0)) fail(ErrorCode::Training, "degenerate sample weights (all zero)");

    const std::size_t nf = end - begin;
    std::vector<BinStats> hist(nf * kBins);
    for (const auto& s : samples) {
        if (s.w == 0.0) continue;
        const double wy = s.w * s.y;
        BinStats* h = hist.data();
        const std::uint8_t* codes = s.codes + begin;
        for (std::size_t f = 0; f < nf; ++f, h += kBins) {
            BinStats& b = h[codes[f]];
            b.w += s.w;
            b.wy += wy;
        }
    }

    WeakResult best;
    double bestGain = -std::numeric_limits<double>::infinity();
    std::array<int, kBins> order{};
    for (std::size_t f = 0; f < nf; ++f) {
        const BinStats* h = hist.data() + f * kBins;
        int used = 0;
        double sumW = 0.0;
        double sumWy = 0.0;
        for (int c = 0; c < kBins; ++c)
            if (h[c].w > 0.0) {
                order[used++] = c;
                sumW += h[c].w;
                sumWy += h[c].wy;
            }
        std::sort(order.begin(), order.begin() + used, [&](int a, int b) {
            const double ra = h[a].wy / h[a].w;
            const double rb = h[b].wy / h[b].w;
            return ra != rb ? ra < rb : a < b;
        });

        // Low-response prefix goes to leafOut, the rest forms the subset.
        double gain = sumWy * sumWy / sumW;
        int split = 0;
        double outW = 0.0, outWy = 0.0;
        for (int k = 1; k < used; ++k) {
            outW += h[order[k - 1]].w;
            outWy += h[order[k - 1]].wy;
            const double inW = sumW - outW;
            const double inWy = sumWy - outWy;
            const double g = outWy * outWy / outW + inWy * inWy / inW;
            if (g > gain) {
                gain = g;
                split = k;
            }
        }
        if (gain > bestGain) {
            bestGain = gain;
            LbpWeak weak;
            weak.featureIndex = static_cast<int>(begin + f);
            double inW = 0.0, inWy = 0.0;
            for (int k = split; k < used; ++k) {
                weak.set_bit(order[k]);
                inW += h[order[k]].w;
                inWy += h[order[k]].wy;
            }
            const double oW = sumW - inW;
            const double oWy = sumWy - inWy;
            weak.leafIn = inWy / inW;
            weak.leafOut = split == 0 ? weak.leafIn : oWy / oW;
            best.weak = weak;
        }
    }
    // Zero-weight samples do not contribute to either the histograms or the error.
    best.error = std::max(0.0, totalWyy - bestGain);
    return best;
}

std::size_t threshold_index(std::size_t numPos, double minHitRate) {
    const double allowed = (1.0 - minHitRate) * static_cast<double>(numPos);
    const auto k = static_cast<std::size_t>(std::max(0.0, std::ceil(allowed - 1e-9)));
    return k == 0 ? 0 : std::min(k - 1, numPos - 1);
}

/// Indices of the heaviest samples covering `rate` of the total mass.
std::vector<std::size_t> trimmed_indices(std::span<const double> weights, double rate) {
    std::vector<std::size_t> idx(weights.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (rate >= 1.0) return idx;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double acc = 0.0;
    std::size_t keep = 0;
    while (keep < idx.size() && acc < rate * total) acc += weights[idx[keep++]];
    idx.resize(std::max<std::size_t>(keep, 1));
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<IntegralImage> integrals_of(std::span<const GrayImage> images) {
    std::vector<IntegralImage> out;
    out.reserve(images.size());
    for (const auto& img : images) out.emplace_back(img);
    return out;
}

}  // namespace

TrainParams TrainParams::desk_scale() {
    TrainParams p;
    p.numStages = 5;
    p.minHitRate = 0.99;
    p.numPos = 500;
    p.numNeg = 2000;
    return p;
}

void TrainParams::validate() const {
    if (numStages < 1 || numPos < 1 || numNeg < 1 || maxWeakCount < 1)
        fail(ErrorCode::Parameter, "stage, sample and weak counts must be >= 1");
    if (!(minHitRate > 0.0 && minHitRate <= 1.0)) fail(ErrorCode::Parameter, "minHitRate must be in (0,1]");
    if (!(maxFalseAlarmRate > 0.0 && maxFalseAlarmRate < 1.0))
        fail(ErrorCode::Parameter, "maxFalseAlarmRate must be in (0,1)");
    if (winW < 3 || winH < 3) fail(ErrorCode::Parameter, "training window must be at least 3x3");
    if (!(acceptanceRatioBreakValue >= 0.0)) fail(ErrorCode::Parameter, "acceptanceRatioBreakValue must be >= 0");
    if (!(weightTrimRate > 0.0 && weightTrimRate <= 1.0)) fail(ErrorCode::Parameter, "weightTrimRate must be in (0,1]");
    if (!(scaleFactor > 1.0)) fail(ErrorCode::Parameter, "scaleFactor must be > 1");
}

const char* to_string(StopReason reason) noexcept {
    switch (reason) {
        case StopReason::StageLimit: return "stage-limit";
        case StopReason::BreakValue: return "break-value";
        case StopReason::NegativesExhausted: return "negatives-exhausted";
        case StopReason::PositivesExhausted: return "positives-exhausted";
    }
    return "unknown";
}

std::vector<LbpFeature> generate_feature_pool(int winW, int winH) {
    if (winW < 3 || winH < 3)
        fail(ErrorCode::Parameter, "feature pool needs a window of at least 3x3, got " + std::to_string(winW) + "x" +
                                       std::to_string(winH));
    std::vector<LbpFeature> pool;
    for (int ch = 1; 3 * ch <= winH; ++ch)
        for (int cw = 1; 3 * cw <= winW; ++cw)
            for (int y = 0; y + 3 * ch <= winH; ++y)
                for (int x = 0; x + 3 * cw <= winW; ++x) pool.push_back({x, y, cw, ch});
    return pool;
}

FeatureCodes window_codes(const IntegralImage& ii, int x, int y, double scale, std::span<const LbpFeature> pool) {
    FeatureCodes codes(pool.size());
    for (std::size_t f = 0; f < pool.size(); ++f)
        codes[f] = static_cast<std::uint8_t>(lbp_code(ii, pool[f], x, y, scale));
    return codes;
}

WeakResult train_weak(std::span<const WeightedSample> samples, std::span<const LbpFeature> pool, FeatureRange range) {
    std::vector<SampleView> views;
    views.reserve(samples.size());
    for (const auto& s : samples) {
        if (s.featureCodes.size() != pool.size())
            fail(ErrorCode::Training, "sample code cache does not match the feature pool");
        if (s.label != 1 && s.label != -1) fail(ErrorCode::Training, "labels must be +1 or -1");
        views.push_back({s.featureCodes.data(), static_cast<double>(s.label), s.weight});
    }
    if (views.empty()) fail(ErrorCode::Training, "no training samples");
    return fit_weak(views, pool.size(), range);
}

StageResult train_stage(std::span<const FeatureCodes> positives, std::span<const FeatureCodes> negatives,
                        std::span<const LbpFeature> pool, const TrainParams& p) {
    if (positives.size() < 2 || negatives.size() < 2)
        fail(ErrorCode::Training, "a stage needs at least 2 positive and 2 negative samples");
    const std::size_t np = positives.size();
    const std::size_t n = np + negatives.size();
    std::vector<const std::uint8_t*> codes(n);
    std::vector<double> y(n), w(n), score(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const FeatureCodes& c = i < np ? positives[i] : negatives[i - np];
        if (c.size() != pool.size()) fail(ErrorCode::Training, "sample code cache does not match the feature pool");
        codes[i] = c.data();
        y[i] = i < np ? 1.0 : -1.0;
        w[i] = i < np ? 0.5 / static_cast<double>(np) : 0.5 / static_cast<double>(negatives.size());
    }

    StageResult result;
    std::vector<double> posScores(np);
    std::vector<SampleView> views;
    for (int m = 0; m < p.maxWeakCount; ++m) {
        views.clear();
        for (std::size_t i : trimmed_indices(w, p.weightTrimRate)) views.push_back({codes[i], y[i], w[i]});
        const WeakResult fitted = fit_weak(views, pool.size(), {});
        const LbpWeak& weak = fitted.weak;
        result.stage.weaks.push_back(weak);

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = weak.response(codes[i][static_cast<std::size_t>(weak.featureIndex)]);
            score[i] += f;
            w[i] *= std::exp(-y[i] * f);
            total += w[i];
        }
        for (double& wi : w) wi /= total;

        std::copy(score.begin(), score.begin() + static_cast<std::ptrdiff_t>(np), posScores.begin());
        std::sort(posScores.begin(), posScores.end());
        result.stage.threshold = posScores[threshold_index(np, p.minHitRate)];

        std::size_t hits = 0, alarms = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (score[i] >= result.stage.threshold) ++(i < np ? hits : alarms);
        result.hitRate = static_cast<double>(hits) / np;
        result.falseAlarmRate = static_cast<double>(alarms) / negatives.size();
        if (result.falseAlarmRate <= p.maxFalseAlarmRate) return result;
    }
    result.belowTarget = true;
    return result;
}

BootstrapResult bootstrap_negatives(std::span<const IntegralImage> pool, const CascadeModel& partial,
                                    std::size_t count, int winW, int winH, double scaleFactor, std::mt19937_64& rng,
                                    std::uint64_t maxScans) {
    if (pool.empty()) fail(ErrorCode::Training, "negative pool is empty");
    DetectParams ladderParams;
    ladderParams.scaleFactor = scaleFactor;
    std::vector<std::vector<ScaleLevel>> ladders;
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const Rect b = pool[i].source_bounds();
        ladders.push_back(b.w >= winW && b.h >= winH ? scale_ladder(winW, winH, ladderParams, b.w, b.h)
                                                     : std::vector<ScaleLevel>{});
        if (!ladders.back().empty()) usable.push_back(i);
    }
    if (usable.empty()) fail(ErrorCode::Training, "no negative image is as large as the training window");

    std::vector<std::vector<std::optional<CompiledCascade>>> compiled(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) compiled[i].resize(ladders[i].size());

    BootstrapResult out;
    std::uniform_int_distribution<std::size_t> pickImage(0, usable.size() - 1);
    while (out.windows.size() < count && out.scanned < maxScans) {
        const std::size_t img = usable[pickImage(rng)];
        const auto& ladder = ladders[img];
        const std::size_t li = std::uniform_int_distribution<std::size_t>(0, ladder.size() - 1)(rng);
        const ScaleLevel& level = ladder[li];
        const Rect b = pool[img].source_bounds();
        const int x = std::uniform_int_distribution<int>(0, b.w - level.windowW)(rng);
        const int y = std::uniform_int_distribution<int>(0, b.h - level.windowH)(rng);
        ++out.scanned;
        auto& cascade = compiled[img][li];
        if (!cascade) cascade.emplace(partial, pool[img].width(), level.scale);
        if (cascade->evaluate(pool[img], x, y).accepted)
            out.windows.push_back({img, x, y, level.scale});
    }
    out.exhausted = out.windows.size() < count;
    out.acceptanceRatio = out.scanned == 0 ? 0.0 : static_cast<double>(out.windows.size()) / out.scanned;
    return out;
}

TrainResult train_cascade(const SampleSet& data, const TrainParams& p,
                          const std::function<void(const StageReport&)>& progress) {
    p.validate();
    if (static_cast<std::size_t>(p.numPos) > data.positives.size())
        fail(ErrorCode::Parameter, "numPos " + std::to_string(p.numPos) + " exceeds the " +
                                       std::to_string(data.positives.size()) + " available positives");
    for (const auto& pos : data.positives)
        if (pos.width() != p.winW || pos.height() != p.winH)
            fail(ErrorCode::Parameter, "positive samples must be " + std::to_string(p.winW) + "x" +
                                           std::to_string(p.winH));
    if (data.negativePool.empty()) fail(ErrorCode::Parameter, "negative pool is empty");

    const auto pool = generate_feature_pool(p.winW, p.winH);
    const std::vector<GrayImage> positives(data.positives.begin(), data.positives.begin() + p.numPos);
    const auto posIntegrals = integrals_of(positives);
    std::vector<FeatureCodes> posCodes;
    posCodes.reserve(positives.size());
    for (const auto& ii : posIntegrals) posCodes.push_back(window_codes(ii, 0, 0, 1.0, pool));
    const auto negIntegrals = integrals_of(data.negativePool);

    TrainResult result;
    CascadeModel model;
    model.windowW = p.winW;
    model.windowH = p.winH;
    model.features = pool;
    std::mt19937_64 rng(p.seed);
    const auto maxScans = static_cast<std::uint64_t>(std::min(
        1e9, std::ceil(p.acceptanceRatioBreakValue > 0 ? p.numNeg / p.acceptanceRatioBreakValue : 1e9)));

    for (int s = 0; s < p.numStages; ++s) {
        std::vector<FeatureCodes> stagePos;
        const CompiledCascade posCascade(model, p.winW + 1, 1.0);
        for (std::size_t i = 0; i < positives.size(); ++i)
            if (posCascade.evaluate(posIntegrals[i], 0, 0).accepted) stagePos.push_back(posCodes[i]);
        if (stagePos.size() < 2) {
            result.reason = StopReason::PositivesExhausted;
            break;
        }

        const BootstrapResult negs = bootstrap_negatives(negIntegrals, model, static_cast<std::size_t>(p.numNeg),
                                                         p.winW, p.winH, p.scaleFactor, rng, maxScans);
        result.finalAcceptanceRatio = negs.acceptanceRatio;
        if (negs.acceptanceRatio < p.acceptanceRatioBreakValue) {
            result.reason = StopReason::BreakValue;
            break;
        }
        if (negs.exhausted && negs.windows.size() < 2) {
            result.reason = StopReason::NegativesExhausted;
            break;
        }
        std::vector<FeatureCodes> stageNeg;
        stageNeg.reserve(negs.windows.size());
        for (const auto& nw : negs.windows) stageNeg.push_back(window_codes(negIntegrals[nw.image], nw.x, nw.y, nw.scale, pool));

        StageResult stage = train_stage(stagePos, stageNeg, pool, p);
        StageReport report;
        report.stage = s;
        report.weakCount = static_cast<int>(stage.stage.weaks.size());
        report.numPos = static_cast<int>(stagePos.size());
        report.numNeg = static_cast<int>(stageNeg.size());
        report.hitRate = stage.hitRate;
        report.falseAlarmRate = stage.falseAlarmRate;
        report.acceptanceRatio = negs.acceptanceRatio;
        report.belowTarget = stage.belowTarget;
        model.stages.push_back(std::move(stage.stage));
        result.stages.push_back(report);
        if (progress) progress(report);
        if (negs.exhausted) {
            result.reason = StopReason::NegativesExhausted;
            break;
        }
    }
    result.model = compact_features(model);
    return result;
}

CascadeModel compact_features(const CascadeModel& model) {
    CascadeModel out;
    out.windowW = model.windowW;
    out.windowH = model.windowH;
    std::vector<int> remap(model.features.size(), -1);
    for (const Stage& stage : model.stages) {
        Stage copy = stage;
        for (LbpWeak& weak : copy.weaks) {
            int& target = remap[static_cast<std::size_t>(weak.featureIndex)];
            if (target < 0) {
                target = static_cast<int>(out.features.size());
                out.features.push_back(model.features[static_cast<std::size_t>(weak.featureIndex)]);
            }
            weak.featureIndex = target;
        }
        out.stages.push_back(std::move(copy));
    }
    return out;
}

std::string stage_report_json(const StageReport& r) {
    nlohmann::ordered_json j{{"stage", r.stage},           {"weaks", r.weakCount},
                             {"numPos", r.numPos},         {"numNeg", r.numNeg},
                             {"hitRate", r.hitRate},       {"falseAlarmRate", r.falseAlarmRate},
                             {"acceptanceRatio", r.acceptanceRatio}, {"belowTarget", r.belowTarget}};
    return j.dump();
}

}  // namespace balldet
