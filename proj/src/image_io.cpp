#include <png.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>

#include "balldet/error.hpp"
#include "balldet/imaging.hpp"

namespace balldet {

namespace {

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct PgmHeader {
    int width = 0;
    int height = 0;
    int maxval = 0;
    std::size_t dataOffset = 0;
};

PgmHeader parse_pgm_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') fail(ErrorCode::Format, "not a binary PGM (P5) file");
    std::size_t pos = 2;
    auto next_int = [&]() {
        for (;;) {
            while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
            if (pos < bytes.size() && bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
                continue;
            }
            break;
        }
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) fail(ErrorCode::Format, "truncated PGM header");
        long value = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            value = value * 10 + (bytes[pos++] - '0');
            if (value > (1L << 30)) fail(ErrorCode::Format, "PGM header value out of range");
        }
        return static_cast<int>(value);
    };
    PgmHeader h;
    h.width = next_int();
    h.height = next_int();
    h.maxval = next_int();
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) fail(ErrorCode::Format, "truncated PGM header");
    h.dataOffset = pos + 1;
    return h;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

GrayImage read_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
    if (!file) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) fail(ErrorCode::Io, "libpng initialisation failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) fail(ErrorCode::Io, "libpng initialisation failed");

    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    if (setjmp(png_jmpbuf(r.png))) fail(ErrorCode::Format, "corrupt PNG file '" + path.string() + "'");

    png_init_io(r.png, file.get());
    png_read_info(r.png, r.info);
    width = png_get_image_width(r.png, r.info);
    height = png_get_image_height(r.png, r.info);
    const int colorType = png_get_color_type(r.png, r.info);
    const int depth = png_get_bit_depth(r.png, r.info);
    if (depth == 16) png_set_strip_16(r.png);
    if (colorType == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (colorType == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    if (colorType & PNG_COLOR_MASK_ALPHA || png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_strip_alpha(r.png);
    if (colorType == PNG_COLOR_TYPE_RGB || colorType == PNG_COLOR_TYPE_RGB_ALPHA ||
        colorType == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
    png_read_update_info(r.png, r.info);

    pixels.resize(static_cast<std::size_t>(width) * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * width;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

bool has_png_signature(std::span<const std::uint8_t> bytes) {
    static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    return bytes.size() >= 8 && std::equal(sig, sig + 8, bytes.begin());
}

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
    const PgmHeader h = parse_pgm_header(bytes);
    if (h.width < 1 || h.height < 1) fail(ErrorCode::Format, "PGM dimensions must be positive");
    if (h.maxval != 255) fail(ErrorCode::Format, "only maxval 255 PGM files are supported");
    const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
    if (bytes.size() < h.dataOffset + n) fail(ErrorCode::Format, "truncated PGM pixel data");
    std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(h.dataOffset),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(h.dataOffset + n));
    return GrayImage(h.width, h.height, std::move(data));
}

GrayImage read_pgm(const std::filesystem::path& path) {
    const auto bytes = slurp(path);
    try {
        return decode_pgm(bytes);
    } catch (const Error& e) {
        fail(e.code(), path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
    const auto bytes = encode_pgm(img);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

GrayImage read_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::uint8_t head[8] = {};
    probe.read(reinterpret_cast<char*>(head), sizeof head);
    probe.close();
    if (has_png_signature(head)) return read_png(path);
    return read_pgm(path);
}

bool is_image_path(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    return ext == ".pgm" || ext == ".png";
}

ImageSize read_image_size(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::vector<std::uint8_t> head(512);
    in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(in.gcount()));
    if (has_png_signature(head)) {
        // IHDR is always the first chunk: width and height are big-endian at offsets 16 and 20.
        if (head.size() < 24) fail(ErrorCode::Format, "truncated PNG header in '" + path.string() + "'");
        auto be32 = [&](std::size_t o) {
            return static_cast<int>((head[o] << 24) | (head[o + 1] << 16) | (head[o + 2] << 8) | head[o + 3]);
        };
        return {be32(16), be32(20)};
    }
    try {
        const PgmHeader h = parse_pgm_header(head);
        return {h.width, h.height};
    } catch (const Error& e) {
        fail(e.code(), path.string() + ": " + e.what());
    }
}

}  // namespace balldet
