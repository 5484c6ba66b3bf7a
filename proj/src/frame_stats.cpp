#include <json.hpp>

#include "balldet/patch_scheduler.hpp"

namespace balldet {

std::string frame_stats_json(const FrameStats& stats, bool includePatches) {
    nlohmann::ordered_json j;
    j["frame"] = stats.frame;
    if (stats.ball) {
        const BallPercept& b = *stats.ball;
        j["ball"] = {{"x", b.x}, {"y", b.y}, {"radius", b.radius}, {"score", b.score}, {"source", to_string(b.sourceKind)}};
    } else {
        j["ball"] = nullptr;
    }
    if (includePatches) {
        j["patches"] = nlohmann::ordered_json::array();
        for (const PatchStats& p : stats.patches) {
            const Rect& r = p.patch.rect;
            j["patches"].push_back({{"kind", to_string(p.patch.kind)},
                                    {"rect", {r.x, r.y, r.w, r.h}},
                                    {"minBallSize", p.patch.minBallSize},
                                    {"maxBallSize", p.patch.maxBallSize},
                                    {"neighbors", p.patch.neighborsThreshold},
                                    {"highRes", p.patch.useHighRes},
                                    {"windowsEvaluated", p.windowsEvaluated}});
        }
    }
    if (stats.estimate) {
        const BallEstimate& e = *stats.estimate;
        j["estimate"] = {{"px", e.x}, {"py", e.y}, {"vx", e.vx}, {"vy", e.vy}, {"stdX", e.stdX}, {"stdY", e.stdY}};
    } else {
        j["estimate"] = nullptr;
    }
    return j.dump();
}

}  // namespace balldet
