#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>

namespace balldet {

/// Constant-velocity filter state over [px, py, vx, vy] in frame pixels.
struct KalmanState {
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Identity();
    double lastUpdate = 0.0;  ///< seconds
};

struct NoiseParams {
    double processAccelStd = 60.0;  ///< px/s^2, white-acceleration intensity
    double measurementStd = 2.0;    ///< px, isotropic
};

struct BallEstimate {
    double x = 0.0;
    double y = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double stdX = 0.0;
    double stdY = 0.0;

    friend bool operator==(const BallEstimate&, const BallEstimate&) = default;
};

/// Fresh state at a measured position with zero velocity and a diffuse velocity prior.
KalmanState initial_state(double x, double y, double timestamp, const NoiseParams& noise,
                          double velocityVariance = 1e12);

KalmanState predict(const KalmanState& state, double dt, const NoiseParams& noise);

/// Position-only measurement update. Throws an input error on non-finite measurements.
KalmanState update(const KalmanState& state, double mx, double my, const NoiseParams& noise);

BallEstimate estimate(const KalmanState& state);

/// Inverse-variance weighted consensus of several estimates. The merged
/// positional spread is the moment-matched spread of the weighted mixture, so
/// merging copies of one estimate returns it unchanged. Empty input yields none.
std::optional<BallEstimate> merge_estimates(std::span<const BallEstimate> estimates);

/// Owns one filter and handles (re)initialisation and staleness.
class BallTracker {
public:
    explicit BallTracker(NoiseParams noise = {}, double staleAfter = 1.0);

    void observe(double timestamp, double x, double y, double diameter);

    /// Estimate propagated to `timestamp`; none when the filter was never fed or
    /// has not seen a measurement for longer than the staleness cutoff.
    std::optional<BallEstimate> predicted(double timestamp) const;

    bool active(double timestamp) const;
    double last_diameter() const { return diameter_; }
    const std::optional<KalmanState>& state() const { return state_; }
    void reset() { state_.reset(); }

private:
    NoiseParams noise_;
    double staleAfter_;
    std::optional<KalmanState> state_;
    double stateTime_ = 0.0;
    double diameter_ = 0.0;
};

}  // namespace balldet
