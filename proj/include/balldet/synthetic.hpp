#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "balldet/evaluation.hpp"
#include "balldet/imaging.hpp"
#include "balldet/training.hpp"

namespace balldet::synth {

/// Field-like clutter: shaded floor, field lines, robot-like blocks and dark
/// blobs. Geometry is multiplied by `detail` (2 for a 2x render of the same scene).
GrayImage background(int width, int height, std::mt19937_64& rng, double detail = 1.0);

/// Draws a black-and-white soccer ball (white disc, dark pentagon patches),
/// anti-aliased by 4x4 supersampling.
void render_ball(GrayImage& img, const Circle& ball, double rotation, int white = 225, int dark = 40);

/// A winW x winH positive: a ball nearly filling the window over clutter.
GrayImage positive_window(int winW, int winH, std::mt19937_64& rng);

struct DatasetSpec {
    int numPositives = 500;
    int numNegativeImages = 40;
    int winW = 16;
    int winH = 16;
    int negativeWidth = 160;
    int negativeHeight = 120;
    std::uint64_t seed = 1;
};

/// Synthetic disc dataset: positive windows plus ball-free clutter images.
SampleSet disc_dataset(const DatasetSpec& spec);

struct SequenceSpec {
    int width = 320;  ///< working frame; the high-resolution frame is twice this
    int height = 240;
    int frames = 200;
    double radius = 12.0;  ///< working-frame pixels
    double speed = 90.0;   ///< working-frame pixels per second
    double fps = 30.0;
    bool ballPresent = true;
    std::uint64_t seed = 7;
};

struct SyntheticFrame {
    GrayImage frame;
    GrayImage highRes;
    std::optional<Circle> truth;  ///< working-frame coordinates
};

/// Static-camera sequence with one ball moving at constant velocity and
/// bouncing off the frame borders.
std::vector<SyntheticFrame> sequence(const SequenceSpec& spec);

}  // namespace balldet::synth
