#include "balldet/tracking.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "balldet/error.hpp"

namespace balldet {

KalmanState initial_state(double x, double y, double timestamp, const NoiseParams& noise, double velocityVariance) {
    KalmanState s;
    s.mean << x, y, 0.0, 0.0;
    const double r = noise.measurementStd * noise.measurementStd;
    s.covariance = Eigen::Vector4d(r, r, velocityVariance, velocityVariance).asDiagonal();
    s.lastUpdate = timestamp;
    return s;
}

KalmanState predict(const KalmanState& state, double dt, const NoiseParams& noise) {
    if (dt < 0) fail(ErrorCode::Input, "prediction interval must be non-negative");
    if (dt == 0) return state;
    Eigen::Matrix4d F = Eigen::Matrix4d::Identity();
    F(0, 2) = dt;
    F(1, 3) = dt;

    // Piecewise-constant white acceleration, independent per axis.
    const double q = noise.processAccelStd * noise.processAccelStd;
    const double dt2 = dt * dt;
    Eigen::Matrix4d Q = Eigen::Matrix4d::Zero();
    Q(0, 0) = Q(1, 1) = 0.25 * dt2 * dt2 * q;
    Q(0, 2) = Q(2, 0) = Q(1, 3) = Q(3, 1) = 0.5 * dt2 * dt * q;
    Q(2, 2) = Q(3, 3) = dt2 * q;

    KalmanState out = state;
    out.mean = F * state.mean;
    out.covariance = F * state.covariance * F.transpose() + Q;
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

KalmanState update(const KalmanState& state, double mx, double my, const NoiseParams& noise) {
    if (!std::isfinite(mx) || !std::isfinite(my)) fail(ErrorCode::Input, "measurement must be finite");
    Eigen::Matrix<double, 2, 4> H = Eigen::Matrix<double, 2, 4>::Zero();
    H(0, 0) = 1.0;
    H(1, 1) = 1.0;
    const Eigen::Matrix2d R = Eigen::Matrix2d::Identity() * (noise.measurementStd * noise.measurementStd);

    const Eigen::Vector2d innovation = Eigen::Vector2d(mx, my) - H * state.mean;
    const Eigen::Matrix2d S = H * state.covariance * H.transpose() + R;
    const Eigen::Matrix<double, 4, 2> K = state.covariance * H.transpose() * S.inverse();

    KalmanState out = state;
    out.mean = state.mean + K * innovation;
    // Joseph form keeps the covariance positive semidefinite under rounding.
    const Eigen::Matrix4d I_KH = Eigen::Matrix4d::Identity() - K * H;
    out.covariance = I_KH * state.covariance * I_KH.transpose() + K * R * K.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

BallEstimate estimate(const KalmanState& state) {
    return {state.mean(0),
            state.mean(1),
            state.mean(2),
            state.mean(3),
            std::sqrt(std::max(0.0, state.covariance(0, 0))),
            std::sqrt(std::max(0.0, state.covariance(1, 1)))};
}

std::optional<BallEstimate> merge_estimates(std::span<const BallEstimate> estimates) {
    if (estimates.empty()) return std::nullopt;
    // Canonical order makes the floating-point sums independent of input order.
    std::vector<BallEstimate> sorted(estimates.begin(), estimates.end());
    std::sort(sorted.begin(), sorted.end(), [](const BallEstimate& a, const BallEstimate& b) {
        return std::tie(a.x, a.y, a.vx, a.vy, a.stdX, a.stdY) < std::tie(b.x, b.y, b.vx, b.vy, b.stdX, b.stdY);
    });

    struct Axis {
        double pos, vel, std;
    };
    auto fuse = [&](auto pick) {
        std::vector<Axis> axis;
        for (const auto& e : sorted) axis.push_back(pick(e));
        // Exact (zero-variance) estimates dominate any uncertain ones.
        const bool anyExact = std::any_of(axis.begin(), axis.end(), [](const Axis& a) { return a.std == 0.0; });
        const Axis& ref = axis.front();
        double wsum = 0.0, dp = 0.0, dv = 0.0;
        std::vector<double> w(axis.size());
        for (std::size_t i = 0; i < axis.size(); ++i) {
            w[i] = anyExact ? (axis[i].std == 0.0 ? 1.0 : 0.0) : 1.0 / (axis[i].std * axis[i].std);
            wsum += w[i];
            dp += w[i] * (axis[i].pos - ref.pos);
            dv += w[i] * (axis[i].vel - ref.vel);
        }
        const double pos = ref.pos + dp / wsum;
        const double vel = ref.vel + dv / wsum;
        const double refVar = ref.std * ref.std;
        double dvar = 0.0;
        for (std::size_t i = 0; i < axis.size(); ++i) {
            const double spread = axis[i].pos - pos;
            dvar += w[i] * (axis[i].std * axis[i].std - refVar + spread * spread);
        }
        return Axis{pos, vel, std::sqrt(std::max(0.0, refVar + dvar / wsum))};
    };
    const Axis ax = fuse([](const BallEstimate& e) { return Axis{e.x, e.vx, e.stdX}; });
    const Axis ay = fuse([](const BallEstimate& e) { return Axis{e.y, e.vy, e.stdY}; });
    return BallEstimate{ax.pos, ay.pos, ax.vel, ay.vel, ax.std, ay.std};
}

BallTracker::BallTracker(NoiseParams noise, double staleAfter) : noise_(noise), staleAfter_(staleAfter) {}

void BallTracker::observe(double timestamp, double x, double y, double diameter) {
    if (!state_ || timestamp - state_->lastUpdate > staleAfter_ || timestamp < stateTime_) {
        state_ = initial_state(x, y, timestamp, noise_);
    } else {
        KalmanState s = predict(*state_, timestamp - stateTime_, noise_);
        s = update(s, x, y, noise_);
        s.lastUpdate = timestamp;
        state_ = s;
    }
    stateTime_ = timestamp;
    diameter_ = diameter;
}

bool BallTracker::active(double timestamp) const {
    return state_ && timestamp - state_->lastUpdate <= staleAfter_ && timestamp >= stateTime_;
}

std::optional<BallEstimate> BallTracker::predicted(double timestamp) const {
    if (!active(timestamp)) return std::nullopt;
    return estimate(predict(*state_, timestamp - stateTime_, noise_));
}

}  // namespace balldet
