#include "balldet/evaluation.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <sstream>

#include "balldet/error.hpp"

namespace balldet {

double circle_box_iou(const Circle& a, const Circle& b) {
    const double ax0 = a.x - a.radius, ax1 = a.x + a.radius, ay0 = a.y - a.radius, ay1 = a.y + a.radius;
    const double bx0 = b.x - b.radius, bx1 = b.x + b.radius, by0 = b.y - b.radius, by1 = b.y + b.radius;
    const double iw = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
    const double ih = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
    const double inter = iw * ih;
    const double uni = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
    return uni > 0 ? inter / uni : 0.0;
}

EvalReport evaluate(std::span<const FrameBall> truth, std::span<const FrameBall> detections, double iouThreshold) {
    std::map<int, const FrameBall*> byFrame;
    for (const auto& t : truth)
        if (!byFrame.emplace(t.frame, &t).second)
            fail(ErrorCode::Input, "duplicate truth entry for frame " + std::to_string(t.frame));
    if (detections.size() != truth.size())
        fail(ErrorCode::Input, "truth covers " + std::to_string(truth.size()) + " frames but detections cover " +
                                   std::to_string(detections.size()));

    EvalReport r;
    double windows = 0.0;
    for (const auto& d : detections) {
        const auto it = byFrame.find(d.frame);
        if (it == byFrame.end()) fail(ErrorCode::Input, "no truth entry for frame " + std::to_string(d.frame));
        const FrameBall& t = *it->second;
        windows += d.windowsEvaluated;
        if (d.ball && t.ball && circle_box_iou(*d.ball, *t.ball) >= iouThreshold) {
            ++r.truePositives;
        } else {
            if (d.ball) ++r.falsePositives;
            if (t.ball) ++r.falseNegatives;
        }
    }
    const int predicted = r.truePositives + r.falsePositives;
    const int actual = r.truePositives + r.falseNegatives;
    r.precision = predicted == 0 ? 0.0 : static_cast<double>(r.truePositives) / predicted;
    r.recall = actual == 0 ? 1.0 : static_cast<double>(r.truePositives) / actual;
    r.meanWindowsPerFrame = detections.empty() ? 0.0 : windows / static_cast<double>(detections.size());
    return r;
}

std::vector<FrameBall> parse_frame_balls(std::string_view jsonl) {
    std::vector<FrameBall> out;
    std::istringstream in{std::string(jsonl)};
    int lineNo = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineNo;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (!j.contains("frame")) continue;  // summary lines carry no frame
            FrameBall fb;
            fb.frame = j.at("frame").get<int>();
            const auto& ball = j.at("ball");
            if (!ball.is_null()) {
                Circle c{ball.at("x").get<double>(), ball.at("y").get<double>(), ball.at("radius").get<double>()};
                if (!(c.radius > 0)) fail(ErrorCode::Input, "line " + std::to_string(lineNo) + ": radius must be > 0");
                fb.ball = c;
            }
            if (j.contains("windowsEvaluated")) {
                fb.windowsEvaluated = j["windowsEvaluated"].get<double>();
            } else if (j.contains("patches")) {
                for (const auto& p : j["patches"]) fb.windowsEvaluated += p.at("windowsEvaluated").get<double>();
            }
            out.push_back(fb);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::Parse, "line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
    return out;
}

std::string frame_ball_json(const FrameBall& fb) {
    nlohmann::ordered_json j;
    j["frame"] = fb.frame;
    if (fb.ball) j["ball"] = {{"x", fb.ball->x}, {"y", fb.ball->y}, {"radius", fb.ball->radius}};
    else j["ball"] = nullptr;
    return j.dump();
}

std::string eval_report_json(const EvalReport& r) {
    nlohmann::ordered_json j{{"truePositives", r.truePositives},   {"falsePositives", r.falsePositives},
                             {"falseNegatives", r.falseNegatives}, {"precision", r.precision},
                             {"recall", r.recall},                 {"meanWindowsPerFrame", r.meanWindowsPerFrame}};
    return j.dump();
}

}  // namespace balldet
