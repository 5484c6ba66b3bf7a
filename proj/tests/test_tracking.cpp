#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "balldet/error.hpp"
#include "balldet/tracking.hpp"

using namespace balldet;

namespace {

bool symmetric_psd(const Eigen::Matrix4d& p) {
    if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(p);
    return es.eigenvalues().minCoeff() >= -1e-9 && p.diagonal().minCoeff() >= 0.0;
}

}  // namespace

TEST_CASE("predict follows the constant-velocity model") {
    const NoiseParams n;
    KalmanState s;
    s.mean << 0, 0, 10, 0;
    CHECK(predict(s, 0.0, n).mean == s.mean);
    CHECK(predict(s, 0.0, n).covariance == s.covariance);
    const KalmanState p = predict(s, 0.5, n);
    CHECK(p.mean(0) == doctest::Approx(5.0));
    CHECK(p.mean(1) == 0.0);
    CHECK(p.mean(2) == 10.0);
    CHECK(p.covariance.trace() > s.covariance.trace());
    CHECK_THROWS_AS(predict(s, -0.1, n), Error);
}

TEST_CASE("update with an uninformative measurement barely moves the mean") {
    NoiseParams n;
    n.measurementStd = 1e8;
    KalmanState s;
    s.mean << 3, 4, 1, 1;
    const KalmanState u = update(s, 1003.0, 4.0, n);
    CHECK(std::abs(u.mean(0) - 3.0) < 1e-6 * 1000.0);
    CHECK(std::abs(u.mean(1) - 4.0) < 1e-12);
}

TEST_CASE("update never increases the position variance") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-100, 100);
    const NoiseParams n;
    KalmanState s = initial_state(0, 0, 0, n, 1e4);
    for (int i = 0; i < 100; ++i) {
        s = predict(s, 0.05, n);
        const KalmanState after = update(s, u(rng), u(rng), n);
        CHECK(after.covariance(0, 0) <= s.covariance(0, 0));
        CHECK(after.covariance(1, 1) <= s.covariance(1, 1));
        s = after;
    }
    CHECK_THROWS_AS(update(s, std::numeric_limits<double>::quiet_NaN(), 0, n), Error);
    CHECK_THROWS_AS(update(s, 0, std::numeric_limits<double>::infinity(), n), Error);
}

TEST_CASE("estimate extracts position, velocity and per-axis spread") {
    KalmanState s;
    s.mean << 3, 4, 0, 0;
    s.covariance = Eigen::Vector4d(9, 16, 1, 1).asDiagonal();
    const BallEstimate e = estimate(s);
    CHECK(e.x == 3.0);
    CHECK(e.y == 4.0);
    CHECK(e.vx == 0.0);
    CHECK(e.vy == 0.0);
    CHECK(e.stdX == 3.0);
    CHECK(e.stdY == 4.0);
}

TEST_CASE("noiseless constant-velocity track converges") {
    const NoiseParams n;
    const double x0 = 10, y0 = 20, vx = 90, vy = -45, dt = 1.0 / 30;
    auto truth = [&](int k) { return Eigen::Vector2d(x0 + vx * k * dt, y0 + vy * k * dt); };
    KalmanState s = initial_state(x0, y0, 0.0, n);
    std::vector<double> posErr;
    for (int k = 1; k <= 10; ++k) {
        s = predict(s, dt, n);
        s = update(s, truth(k).x(), truth(k).y(), n);
        posErr.push_back((s.mean.head<2>() - truth(k)).norm());
        CHECK(symmetric_psd(s.covariance));
    }
    const BallEstimate e = estimate(s);
    CHECK(std::abs(e.vx - vx) < 1e-6);
    CHECK(std::abs(e.vy - vy) < 1e-6);
    CHECK(posErr.back() < 1e-6);
    for (std::size_t k = 4; k < posErr.size(); ++k) CHECK(posErr[k] <= posErr[k - 1] + 1e-12);
}

TEST_CASE("covariance stays symmetric PSD over 1000 random cycles") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> pos(-500, 500), dtD(0.0, 0.5), accel(1, 500), meas(0.1, 20);
    for (int trial = 0; trial < 5; ++trial) {
        NoiseParams n{accel(rng), meas(rng)};
        KalmanState s = initial_state(pos(rng), pos(rng), 0.0, n);
        bool ok = symmetric_psd(s.covariance);
        for (int i = 0; i < 1000 && ok; ++i) {
            s = predict(s, dtD(rng), n);
            ok = symmetric_psd(s.covariance);
            if (rng() % 4 != 0) {
                s = update(s, pos(rng), pos(rng), n);
                ok = ok && symmetric_psd(s.covariance);
            }
        }
        CHECK(ok);
    }
}

TEST_CASE("merge_estimates") {
    SUBCASE("empty and single") {
        CHECK_FALSE(merge_estimates({}));
        const BallEstimate e{1, 2, 3, 4, 5, 6};
        const std::vector<BallEstimate> one{e};
        CHECK(*merge_estimates(one) == e);
    }
    SUBCASE("equal spreads average") {
        const std::vector<BallEstimate> two{{0, 0, 0, 0, 2, 2}, {10, 0, 0, 0, 2, 2}};
        const auto m = merge_estimates(two);
        CHECK(m->x == doctest::Approx(5.0));
        CHECK(m->y == 0.0);
    }
    SUBCASE("inverse-variance weighting") {
        const std::vector<BallEstimate> two{{0, 0, 0, 0, 1, 1}, {10, 0, 0, 0, 3, 3}};
        const auto m = merge_estimates(two);
        CHECK(m->x == doctest::Approx(10.0 * (1.0 / 9.0) / (1.0 + 1.0 / 9.0)));
        CHECK(m->x == doctest::Approx(1.0));
    }
    SUBCASE("permutation invariant and idempotent") {
        std::mt19937_64 rng(33);
        std::uniform_real_distribution<double> u(-50, 50), sd(0.5, 10);
        for (int t = 0; t < 50; ++t) {
            std::vector<BallEstimate> es;
            for (int i = 0; i < 5; ++i) es.push_back({u(rng), u(rng), u(rng), u(rng), sd(rng), sd(rng)});
            const auto a = merge_estimates(es);
            std::shuffle(es.begin(), es.end(), rng);
            CHECK(*merge_estimates(es) == *a);
            const std::vector<BallEstimate> same(4, es[0]);
            const auto m = merge_estimates(same);
            CHECK(m->x == doctest::Approx(es[0].x));
            CHECK(m->vy == doctest::Approx(es[0].vy));
            CHECK(m->stdX == doctest::Approx(es[0].stdX));
        }
    }
}

TEST_CASE("tracker initialises, goes stale and re-initialises") {
    BallTracker t(NoiseParams{}, 1.0);
    CHECK_FALSE(t.predicted(0.0));
    t.observe(0.0, 100, 100, 20);
    REQUIRE(t.predicted(0.0));
    CHECK(t.predicted(0.0)->x == 100.0);
    t.observe(0.1, 110, 100, 20);
    const auto p = t.predicted(0.2);
    REQUIRE(p);
    CHECK(p->x == doctest::Approx(120.0).epsilon(0.01));
    CHECK(t.last_diameter() == 20.0);
    CHECK(t.active(1.1));
    CHECK_FALSE(t.active(1.2));
    CHECK_FALSE(t.predicted(1.2));
    t.observe(5.0, 0, 0, 12);
    CHECK(t.predicted(5.0)->x == 0.0);
    CHECK(t.predicted(5.0)->vx == 0.0);
    CHECK_FALSE(t.predicted(4.0));
}
