#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace balldet {

struct Circle {
    double x = 0.0;
    double y = 0.0;
    double radius = 0.0;

    friend bool operator==(const Circle&, const Circle&) = default;
};

/// Ground truth or detector output for one frame (JSON-lines `{frame, ball}`).
struct FrameBall {
    int frame = 0;
    std::optional<Circle> ball;
    double windowsEvaluated = 0.0;
};

struct EvalReport {
    int truePositives = 0;
    int falsePositives = 0;
    int falseNegatives = 0;
    double precision = 0.0;
    double recall = 0.0;
    double meanWindowsPerFrame = 0.0;
};

/// IoU of the two circles' bounding boxes.
double circle_box_iou(const Circle& a, const Circle& b);

/// Frame-by-frame matching, at most one match per frame. Both sides must cover
/// the same set of frames.
EvalReport evaluate(std::span<const FrameBall> truth, std::span<const FrameBall> detections, double iouThreshold = 0.5);

/// Parses `{frame, ball: {x, y, radius, ...} | null}` lines; extra keys are
/// ignored except `windowsEvaluated` (or the sum over `patches[].windowsEvaluated`).
std::vector<FrameBall> parse_frame_balls(std::string_view jsonl);

std::string frame_ball_json(const FrameBall& fb);
std::string eval_report_json(const EvalReport& report);

}  // namespace balldet
