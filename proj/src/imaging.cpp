#include "balldet/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "balldet/error.hpp"

namespace balldet {

Rect intersect(const Rect& a, const Rect& b) {
    const int x0 = std::max(a.x, b.x);
    const int y0 = std::max(a.y, b.y);
    const int x1 = std::min(a.right(), b.right());
    const int y1 = std::min(a.bottom(), b.bottom());
    if (x1 <= x0 || y1 <= y0) return {};
    return {x0, y0, x1 - x0, y1 - y0};
}

bool contains(const Rect& outer, const Rect& inner) {
    return inner.x >= outer.x && inner.y >= outer.y && inner.w >= 0 && inner.h >= 0 &&
           inner.right() <= outer.right() && inner.bottom() <= outer.bottom();
}

GrayImage::GrayImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
    if (width < 1 || height < 1)
        fail(ErrorCode::Dimension, "image dimensions must be positive, got " + std::to_string(width) + "x" +
                                       std::to_string(height));
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1)
        fail(ErrorCode::Dimension, "image dimensions must be positive, got " + std::to_string(width) + "x" +
                                       std::to_string(height));
    if (data_.size() != static_cast<std::size_t>(width) * height)
        fail(ErrorCode::Dimension, "pixel buffer holds " + std::to_string(data_.size()) + " bytes, expected " +
                                       std::to_string(static_cast<std::size_t>(width) * height));
}

IntegralImage::IntegralImage(const GrayImage& img) : width_(img.width() + 1), height_(img.height() + 1) {
    sums_.assign(static_cast<std::size_t>(width_) * height_, 0);
    for (int y = 0; y < img.height(); ++y) {
        const auto src = img.row(y);
        const std::int64_t* above = sums_.data() + static_cast<std::size_t>(y) * width_;
        std::int64_t* out = sums_.data() + static_cast<std::size_t>(y + 1) * width_;
        std::int64_t run = 0;
        for (int x = 0; x < img.width(); ++x) {
            run += src[x];
            out[x + 1] = above[x + 1] + run;
        }
    }
}

GrayImage luma_from_yuv422(std::span<const std::uint8_t> buffer, int width, int height) {
    if (width < 1 || height < 1) fail(ErrorCode::Format, "YUV422 frame dimensions must be positive");
    if (width % 2 != 0) fail(ErrorCode::Format, "YUV422 frame width must be even");
    const std::size_t expected = 2u * static_cast<std::size_t>(width) * height;
    if (buffer.size() != expected)
        fail(ErrorCode::Format, "YUV422 buffer holds " + std::to_string(buffer.size()) + " bytes, expected " +
                                    std::to_string(expected));
    // Y0 U Y1 V: luma sits on every even byte.
    std::vector<std::uint8_t> luma(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < luma.size(); ++i) luma[i] = buffer[2 * i];
    return GrayImage(width, height, std::move(luma));
}

GrayImage downscale(const GrayImage& img, int factor) {
    if (factor < 1) fail(ErrorCode::Dimension, "downscale factor must be positive");
    if (img.width() % factor != 0 || img.height() % factor != 0)
        fail(ErrorCode::Dimension, "downscale factor " + std::to_string(factor) + " does not divide " +
                                       std::to_string(img.width()) + "x" + std::to_string(img.height()));
    if (factor == 1) return img;
    const int ow = img.width() / factor;
    const int oh = img.height() / factor;
    const unsigned area = static_cast<unsigned>(factor) * factor;
    GrayImage out(ow, oh);
    std::vector<unsigned> acc(ow);
    for (int oy = 0; oy < oh; ++oy) {
        std::fill(acc.begin(), acc.end(), 0u);
        for (int dy = 0; dy < factor; ++dy) {
            const auto src = img.row(oy * factor + dy);
            for (int x = 0; x < img.width(); ++x) acc[x / factor] += src[x];
        }
        for (int ox = 0; ox < ow; ++ox) out.at(ox, oy) = static_cast<std::uint8_t>((acc[ox] + area / 2) / area);
    }
    return out;
}

IntegralImage integral(const GrayImage& img) { return IntegralImage(img); }

std::int64_t rect_sum(const IntegralImage& ii, const Rect& r) {
    if (r.w < 0 || r.h < 0 || r.x < 0 || r.y < 0 || r.right() > ii.width() - 1 || r.bottom() > ii.height() - 1)
        fail(ErrorCode::Bounds, "rect (" + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                                    std::to_string(r.w) + "," + std::to_string(r.h) + ") outside " +
                                    std::to_string(ii.width() - 1) + "x" + std::to_string(ii.height() - 1) +
                                    " image");
    if (r.w == 0 || r.h == 0) return 0;
    return ii.box(r.x, r.y, r.w, r.h);
}

GrayImage crop(const GrayImage& img, const Rect& r) {
    if (r.w < 1 || r.h < 1 || !contains(img.bounds(), r))
        fail(ErrorCode::Bounds, "crop rect (" + std::to_string(r.x) + "," + std::to_string(r.y) + "," +
                                    std::to_string(r.w) + "," + std::to_string(r.h) + ") outside " +
                                    std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
    GrayImage out(r.w, r.h);
    for (int y = 0; y < r.h; ++y) {
        const auto src = img.row(r.y + y).subspan(static_cast<std::size_t>(r.x), static_cast<std::size_t>(r.w));
        std::copy(src.begin(), src.end(), out.pixels().begin() + static_cast<std::ptrdiff_t>(y) * r.w);
    }
    return out;
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
    if (width < 1 || height < 1) fail(ErrorCode::Dimension, "resize target must be positive");
    if (width == img.width() && height == img.height()) return img;
    GrayImage out(width, height);
    const double sx = static_cast<double>(img.width()) / width;
    const double sy = static_cast<double>(img.height()) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height() - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double ty = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width() - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double tx = fx - x0;
            const double top = img.at(x0, y0) * (1 - tx) + img.at(x1, y0) * tx;
            const double bot = img.at(x0, y1) * (1 - tx) + img.at(x1, y1) * tx;
            out.at(x, y) = static_cast<std::uint8_t>(std::lround(top * (1 - ty) + bot * ty));
        }
    }
    return out;
}

void draw_rect(GrayImage& img, const Rect& r, std::uint8_t value) {
    if (r.empty()) return;
    auto plot = [&](int x, int y) {
        if (x >= 0 && y >= 0 && x < img.width() && y < img.height()) img.at(x, y) = value;
    };
    for (int x = r.x; x < r.right(); ++x) {
        plot(x, r.y);
        plot(x, r.bottom() - 1);
    }
    for (int y = r.y; y < r.bottom(); ++y) {
        plot(r.x, y);
        plot(r.right() - 1, y);
    }
}

}  // namespace balldet
