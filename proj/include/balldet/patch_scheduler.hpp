#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "balldet/imaging.hpp"
#include "balldet/lbp_cascade.hpp"
#include "balldet/tracking.hpp"

namespace balldet {

enum class PatchKind { LastFrame, Kalman, Patrol, FullFrame };

const char* to_string(PatchKind kind) noexcept;

/// A region of the working frame to scan, with the ball sizes expected in it.
struct ImagePatch {
    Rect rect;
    int minBallSize = 16;
    int maxBallSize = 16;
    int neighborsThreshold = 1;
    PatchKind kind = PatchKind::Patrol;
    bool useHighRes = false;

    friend bool operator==(const ImagePatch&, const ImagePatch&) = default;
};

struct SchedulerConfig {
    int patrolCount = 4;  ///< n, number of patrol tiles
    double patrolOverlap = 0.25;
    double marginFactor = 3.0;  ///< prediction patch side as a multiple of the ball diameter
    int baseNeighbors = 1;
    int obstacleNeighborsBoost = 3;
    long long highResAreaCutoff = 64 * 64;
    double ballSizeSlack = 1.5;  ///< predicted diameters span [d / slack, d * slack]
    int patrolMaxBallSize = 0;   ///< 0 = tile size
    int modelWindow = 16;
    double scaleFactor = 1.1;
    int step = 1;
    double groupEps = 0.2;

    void validate() const;
};

struct FrameSize {
    int width = 0;
    int height = 0;
};

struct BallRecord {
    int frameIndex = 0;
    std::optional<Rect> ball;
};

/// Per-camera acquisition memory.
struct PerceptorState {
    std::vector<BallRecord> recentBalls;  ///< oldest first, at most 2 entries
    int frameIndex = 0;                   ///< index of the frame about to be processed
    int patrolIndex = 0;
    bool obstacleHint = false;
};

/// Expected ball location projected into the frame.
struct ProjectedBall {
    double x = 0.0;
    double y = 0.0;
    double stdX = 0.0;
    double stdY = 0.0;
    double diameter = 0.0;
};

struct BallPercept {
    double x = 0.0;
    double y = 0.0;
    double radius = 0.0;
    double score = 0.0;
    PatchKind sourceKind = PatchKind::Patrol;
    int frameIndex = 0;
    Rect rect;  ///< working-frame detection box
};

struct PatchStats {
    ImagePatch patch;
    std::uint64_t windowsEvaluated = 0;
};

struct FrameStats {
    int frame = 0;
    std::optional<BallPercept> ball;
    std::vector<PatchStats> patches;
    std::optional<BallEstimate> estimate;

    std::uint64_t windows_evaluated() const;
};

std::optional<ImagePatch> provide_last_frame(const PerceptorState& state, FrameSize frame, const SchedulerConfig& cfg);

std::optional<ImagePatch> provide_kalman(const std::optional<ProjectedBall>& estimate, FrameSize frame,
                                         const SchedulerConfig& cfg);

/// Returns the current patrol tile and advances the patrol index.
ImagePatch provide_patrol(PerceptorState& state, FrameSize frame, const SchedulerConfig& cfg);

/// The fixed patrol tiling in visiting order: bottom row first, left to right.
std::vector<Rect> patrol_tiles(FrameSize frame, const SchedulerConfig& cfg);

/// Tile to restart from after a ball loss: the center tile of the bottom row.
int patrol_reset_index(FrameSize frame, const SchedulerConfig& cfg);

/// Predicted scan cost: area times number of scan scales (in the resolution scanned).
double predicted_cost(const ImagePatch& patch, const SchedulerConfig& cfg);

std::vector<ImagePatch> assemble_patches(PerceptorState& state, FrameSize frame, const SchedulerConfig& cfg,
                                         const std::optional<ProjectedBall>& worldEstimate);

/// Scans patches in order and stops at the first one that yields a ball.
/// `highRes`, when given, must be exactly twice the working frame.
FrameStats run_frame(const CascadeModel& model, const GrayImage& frame, const GrayImage* highRes,
                     std::span<const ImagePatch> patches, PerceptorState& state, const SchedulerConfig& cfg);

/// Maps a tracker estimate (plus expected diameter) into frame coordinates.
using ProjectionHook = std::function<std::optional<ProjectedBall>(const BallEstimate&, double diameter)>;

std::optional<ProjectedBall> identity_projection(const BallEstimate& estimate, double diameter);

/// Scheduler, acquisition state and tracker for one camera stream.
class BallPerceptor {
public:
    BallPerceptor(CascadeModel model, SchedulerConfig cfg, NoiseParams noise = {},
                  ProjectionHook projection = identity_projection);

    /// Runs the scheduled patch list on one frame. `teammates` are extra
    /// estimates merged with the local tracker before predicting.
    FrameStats process(const GrayImage& frame, const GrayImage* highRes, double timestamp, bool obstacleHint = false,
                       std::span<const BallEstimate> teammates = {});

    /// Baseline: one patch covering the whole frame, no scheduling.
    FrameStats process_full_frame(const GrayImage& frame, double timestamp);

    const PerceptorState& state() const { return state_; }
    const SchedulerConfig& config() const { return cfg_; }
    const CascadeModel& model() const { return model_; }

private:
    void track(const FrameStats& stats, double timestamp);

    CascadeModel model_;
    SchedulerConfig cfg_;
    ProjectionHook projection_;
    PerceptorState state_;
    BallTracker tracker_;
};

/// One JSON object (no trailing newline) describing a processed frame.
std::string frame_stats_json(const FrameStats& stats, bool includePatches = true);

}  // namespace balldet
