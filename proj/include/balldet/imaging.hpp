#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace balldet {

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int right() const { return x + w; }
    int bottom() const { return y + h; }
    long long area() const { return static_cast<long long>(w) * h; }
    bool empty() const { return w <= 0 || h <= 0; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Intersection of two rectangles; empty (w = h = 0) when they do not overlap.
Rect intersect(const Rect& a, const Rect& b);

/// True when `inner` lies completely inside `outer`.
bool contains(const Rect& outer, const Rect& inner);

/// 8-bit single channel image, row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, std::uint8_t fill = 0);
    GrayImage(int width, int height, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return data_.empty(); }
    Rect bounds() const { return {0, 0, width_, height_}; }

    std::uint8_t at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    std::uint8_t& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    std::span<const std::uint8_t> row(int y) const {
        return {data_.data() + static_cast<std::size_t>(y) * width_, static_cast<std::size_t>(width_)};
    }
    std::span<const std::uint8_t> pixels() const { return data_; }
    std::span<std::uint8_t> pixels() { return data_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Summed-area table with a zero first row and column: sum(x, y) is the
/// total over [0,x) x [0,y) of the source image.
class IntegralImage {
public:
    IntegralImage() = default;
    explicit IntegralImage(const GrayImage& img);

    /// Table dimensions (source dimensions + 1).
    int width() const { return width_; }
    int height() const { return height_; }
    Rect source_bounds() const { return {0, 0, width_ - 1, height_ - 1}; }

    std::int64_t sum(int x, int y) const { return sums_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const std::int64_t> table() const { return sums_; }

    /// Unchecked rectangle sum; the caller guarantees the rect is in bounds.
    std::int64_t box(int x, int y, int w, int h) const {
        const std::int64_t* top = sums_.data() + static_cast<std::size_t>(y) * width_;
        const std::int64_t* bot = top + static_cast<std::size_t>(h) * width_;
        return bot[x + w] - bot[x] - top[x + w] + top[x];
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::int64_t> sums_;
};

GrayImage luma_from_yuv422(std::span<const std::uint8_t> buffer, int width, int height);

/// Box-average downscale; each output pixel is the round-half-up mean of its
/// factor x factor block.
GrayImage downscale(const GrayImage& img, int factor);

IntegralImage integral(const GrayImage& img);

/// Exact sum over `r` via four table lookups. Throws a bounds error when `r`
/// leaves the source image.
std::int64_t rect_sum(const IntegralImage& ii, const Rect& r);

GrayImage crop(const GrayImage& img, const Rect& r);

/// Bilinear resample to an arbitrary size (pixel-center aligned).
GrayImage resize_bilinear(const GrayImage& img, int width, int height);

/// Burns a 1-pixel rectangle outline into the image, clipped to its bounds.
void draw_rect(GrayImage& img, const Rect& r, std::uint8_t value = 255);

GrayImage read_pgm(const std::filesystem::path& path);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);

/// Reads a PGM or PNG file (PNG is converted to luma).
GrayImage read_image(const std::filesystem::path& path);

/// True for the file extensions read_image understands.
bool is_image_path(const std::filesystem::path& path);

struct ImageSize {
    int width = 0;
    int height = 0;
};

/// Reads only the header of a PGM/PNG file.
ImageSize read_image_size(const std::filesystem::path& path);

}  // namespace balldet
