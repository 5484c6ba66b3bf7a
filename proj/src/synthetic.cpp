#include "balldet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "balldet/error.hpp"

namespace balldet::synth {

namespace {

using std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::uint8_t clamp_pixel(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

/// Inside a regular pentagon of circumradius `radius` centered at the origin,
/// with one vertex at angle `orientation`.
bool in_pentagon(double u, double v, double radius, double orientation) {
    const double r = std::hypot(u, v);
    if (r > radius) return false;
    const double sector = 2 * pi / 5;
    double phi = std::atan2(v, u) - orientation;
    phi = std::fmod(std::fmod(phi, sector) + sector, sector);
    const double edge = radius * std::cos(pi / 5) / std::cos(phi - pi / 5);
    return r <= edge;
}

/// Ball intensity at unit-disc coordinates (already rotated).
double ball_value(double u, double v, int white, int dark) {
    const double r2 = u * u + v * v;
    if (in_pentagon(u, v, 0.4, pi / 2)) return dark;
    for (int k = 0; k < 5; ++k) {
        const double a = pi / 2 + pi / 5 + k * 2 * pi / 5;
        if (in_pentagon(u - 0.92 * std::cos(a), v - 0.92 * std::sin(a), 0.3, a + pi)) return dark;
    }
    const double shade = white - 28.0 * r2 - 8.0 * v;
    return r2 > 0.88 ? 0.7 * shade : shade;
}

void add_noise(GrayImage& img, std::mt19937_64& rng, double sigma) {
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& p : img.pixels()) p = clamp_pixel(p + noise(rng));
}

struct Line {
    double nx, ny, offset, halfWidth;
    int value;
};

struct Block {
    double x0, y0, x1, y1;
    int value;
};

struct Blob {
    double cx, cy, rx, ry;
    int value;
};

}  // namespace

GrayImage background(int width, int height, std::mt19937_64& rng, double detail) {
    GrayImage img(width, height);
    const double base = uniform(rng, 75, 135);
    struct Wave {
        double kx, ky, phase, amp;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < 3; ++i) {
        const double angle = uniform(rng, 0, pi);
        const double wavelength = uniform(rng, 60, 220) * detail;
        waves.push_back({std::cos(angle) * 2 * pi / wavelength, std::sin(angle) * 2 * pi / wavelength,
                         uniform(rng, 0, 2 * pi), uniform(rng, 4, 12)});
    }
    std::vector<Line> lines;
    for (int i = uniform_int(rng, 0, 3); i > 0; --i) {
        const double angle = uniform(rng, 0, pi);
        const double nx = std::cos(angle), ny = std::sin(angle);
        const double px = uniform(rng, 0, width), py = uniform(rng, 0, height);
        lines.push_back({nx, ny, nx * px + ny * py, uniform(rng, 0.8, 2.2) * detail, uniform_int(rng, 195, 235)});
    }
    std::vector<Block> blocks;
    for (int i = uniform_int(rng, 0, 2); i > 0; --i) {
        const double w = uniform(rng, 14, 50) * detail, h = uniform(rng, 30, 110) * detail;
        const double x = uniform(rng, -w / 2, width - w / 2), y = uniform(rng, -h / 2, height - h / 2);
        blocks.push_back({x, y, x + w, y + h, uniform_int(rng, 180, 225)});
        // Dark joints/limbs on the robot body.
        for (int j = uniform_int(rng, 1, 3); j > 0; --j) {
            const double jw = uniform(rng, 0.2, 0.8) * w, jh = uniform(rng, 4, 14) * detail;
            const double jx = x + uniform(rng, 0, w - jw), jy = y + uniform(rng, 0, h - jh);
            blocks.push_back({jx, jy, jx + jw, jy + jh, uniform_int(rng, 30, 80)});
        }
    }
    std::vector<Blob> blobs;
    for (int i = uniform_int(rng, 0, 6); i > 0; --i)
        blobs.push_back({uniform(rng, 0, width), uniform(rng, 0, height), uniform(rng, 2, 8) * detail,
                         uniform(rng, 2, 8) * detail, uniform_int(rng, 20, 90)});

    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const double fx = x + 0.5, fy = y + 0.5;
            double v = base;
            for (const Wave& w : waves) v += w.amp * std::sin(w.kx * fx + w.ky * fy + w.phase);
            for (const Line& l : lines) {
                const double d = std::abs(l.nx * fx + l.ny * fy - l.offset);
                const double cover = std::clamp(l.halfWidth + 0.5 - d, 0.0, 1.0);
                v = v * (1 - cover) + l.value * cover;
            }
            for (const Block& b : blocks)
                if (fx >= b.x0 && fx < b.x1 && fy >= b.y0 && fy < b.y1) v = b.value;
            for (const Blob& b : blobs) {
                const double dx = (fx - b.cx) / b.rx, dy = (fy - b.cy) / b.ry;
                if (dx * dx + dy * dy <= 1.0) v = b.value;
            }
            img.at(x, y) = clamp_pixel(v);
        }
    add_noise(img, rng, 3.0);
    return img;
}

void render_ball(GrayImage& img, const Circle& ball, double rotation, int white, int dark) {
    if (!(ball.radius > 0)) fail(ErrorCode::Parameter, "ball radius must be positive");
    const int x0 = std::max(0, static_cast<int>(std::floor(ball.x - ball.radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(ball.y - ball.radius)));
    const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(ball.x + ball.radius)));
    const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(ball.y + ball.radius)));
    const double c = std::cos(rotation), s = std::sin(rotation);
    constexpr int kSub = 4;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            double acc = 0.0;
            int inside = 0;
            for (int sy = 0; sy < kSub; ++sy)
                for (int sx = 0; sx < kSub; ++sx) {
                    const double u0 = (x + (sx + 0.5) / kSub - ball.x) / ball.radius;
                    const double v0 = (y + (sy + 0.5) / kSub - ball.y) / ball.radius;
                    if (u0 * u0 + v0 * v0 > 1.0) continue;
                    acc += ball_value(c * u0 + s * v0, -s * u0 + c * v0, white, dark);
                    ++inside;
                }
            if (inside == 0) continue;
            const double cover = static_cast<double>(inside) / (kSub * kSub);
            img.at(x, y) = clamp_pixel(img.at(x, y) * (1 - cover) + acc / inside * cover);
        }
}

GrayImage positive_window(int winW, int winH, std::mt19937_64& rng) {
    const GrayImage clutter = background(3 * winW, 3 * winH, rng);
    GrayImage win = crop(clutter, {winW, winH, winW, winH});
    const double radius = 0.5 * std::min(winW, winH) * uniform(rng, 0.85, 1.0);
    const Circle ball{winW / 2.0 + uniform(rng, -0.75, 0.75), winH / 2.0 + uniform(rng, -0.75, 0.75), radius};
    render_ball(win, ball, uniform(rng, 0, 2 * pi), uniform_int(rng, 200, 240), uniform_int(rng, 20, 70));
    const double gain = uniform(rng, 0.8, 1.1);
    const double offset = uniform(rng, -25, 25);
    for (auto& p : win.pixels()) p = clamp_pixel(p * gain + offset);
    add_noise(win, rng, 2.0);
    return win;
}

SampleSet disc_dataset(const DatasetSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    SampleSet set;
    for (int i = 0; i < spec.numPositives; ++i) set.positives.push_back(positive_window(spec.winW, spec.winH, rng));
    for (int i = 0; i < spec.numNegativeImages; ++i)
        set.negativePool.push_back(background(spec.negativeWidth, spec.negativeHeight, rng));
    return set;
}

std::vector<SyntheticFrame> sequence(const SequenceSpec& spec) {
    if (spec.width < 1 || spec.height < 1 || spec.frames < 0 || !(spec.fps > 0))
        fail(ErrorCode::Parameter, "invalid sequence specification");
    std::mt19937_64 rng(spec.seed);
    const int hw = 2 * spec.width, hh = 2 * spec.height;
    const GrayImage scene = background(hw, hh, rng, 2.0);

    const double r = spec.radius;
    double x = uniform(rng, r + 1, spec.width - r - 1);
    double y = uniform(rng, r + 1, spec.height - r - 1);
    const double heading = uniform(rng, 0, 2 * pi);
    double vx = spec.speed * std::cos(heading), vy = spec.speed * std::sin(heading);
    double rotation = uniform(rng, 0, 2 * pi);
    const double dt = 1.0 / spec.fps;

    std::vector<SyntheticFrame> out;
    out.reserve(static_cast<std::size_t>(spec.frames));
    for (int i = 0; i < spec.frames; ++i) {
        GrayImage hi = scene;
        std::optional<Circle> truth;
        if (spec.ballPresent) {
            truth = Circle{x, y, r};
            render_ball(hi, {2 * x, 2 * y, 2 * r}, rotation);
        }
        add_noise(hi, rng, 3.0);
        GrayImage lo = downscale(hi, 2);
        out.push_back({std::move(lo), std::move(hi), truth});

        x += vx * dt;
        y += vy * dt;
        rotation += 0.05;
        if (x < r + 1 || x > spec.width - r - 1) {
            vx = -vx;
            x = std::clamp(x, r + 1, spec.width - r - 1);
        }
        if (y < r + 1 || y > spec.height - r - 1) {
            vy = -vy;
            y = std::clamp(y, r + 1, spec.height - r - 1);
        }
    }
    return out;
}

}  // namespace balldet::synth
