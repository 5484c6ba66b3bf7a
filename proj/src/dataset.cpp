#include "balldet/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "balldet/error.hpp"

namespace balldet {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(line);
    }
    return out;
}

fs::path resolve(const fs::path& p, const fs::path& baseDir) { return p.is_absolute() ? p : baseDir / p; }

}  // namespace

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

DescriptionResult create_positives_description(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) fail(ErrorCode::Io, "cannot read directory '" + dir.string() + "'");
    std::vector<fs::path> files;
    fs::directory_iterator it(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot read directory '" + dir.string() + "': " + ec.message());
    for (const auto& entry : it)
        if (entry.is_regular_file()) files.push_back(entry.path().filename());
    std::sort(files.begin(), files.end());

    DescriptionResult out;
    for (const fs::path& name : files) {
        if (!is_image_path(name)) {
            out.warnings.push_back("skipping non-image file '" + (dir / name).generic_string() + "'");
            continue;
        }
        try {
            const ImageSize size = read_image_size(dir / name);
            out.text += (dir / name).generic_string() + " 1 0 0 " + std::to_string(size.width) + " " +
                        std::to_string(size.height) + "\n";
        } catch (const Error& e) {
            out.warnings.push_back(std::string("skipping unreadable image: ") + e.what());
        }
    }
    if (out.text.empty()) out.warnings.push_back("no positive images found in '" + dir.generic_string() + "'");
    return out;
}

std::string list_negatives(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) fail(ErrorCode::Io, "cannot read directory '" + dir.string() + "'");
    std::vector<std::string> files;
    fs::recursive_directory_iterator it(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot read directory '" + dir.string() + "': " + ec.message());
    for (const auto& entry : it)
        if (entry.is_regular_file() && is_image_path(entry.path()))
            files.push_back(fs::absolute(entry.path()).lexically_normal().generic_string());
    std::sort(files.begin(), files.end());
    std::string text;
    for (const auto& f : files) text += f + "\n";
    return text;
}

std::vector<PositiveEntry> parse_positives_description(std::string_view text, const fs::path& baseDir) {
    std::vector<PositiveEntry> out;
    int lineNo = 0;
    for (const std::string& line : lines_of(text)) {
        ++lineNo;
        std::istringstream in(line);
        std::string path;
        int count = 0;
        if (!(in >> path >> count) || count < 0)
            fail(ErrorCode::Parse, "positives description line " + std::to_string(lineNo) + ": expected '<path> <count> ...'");
        PositiveEntry entry{resolve(path, baseDir), {}};
        for (int i = 0; i < count; ++i) {
            Rect r;
            if (!(in >> r.x >> r.y >> r.w >> r.h) || r.w < 1 || r.h < 1)
                fail(ErrorCode::Parse, "positives description line " + std::to_string(lineNo) + ": bad box " +
                                           std::to_string(i));
            entry.boxes.push_back(r);
        }
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<fs::path> parse_negatives_list(std::string_view text, const fs::path& baseDir) {
    std::vector<fs::path> out;
    for (const std::string& line : lines_of(text)) {
        const auto b = line.find_first_not_of(" \t");
        const auto e = line.find_last_not_of(" \t");
        out.push_back(resolve(line.substr(b, e - b + 1), baseDir));
    }
    return out;
}

SampleSet load_sample_set(const fs::path& positivesFile, const fs::path& negativesFile, int winW, int winH) {
    SampleSet set;
    const auto entries = parse_positives_description(read_text_file(positivesFile), positivesFile.parent_path());
    for (const auto& entry : entries) {
        const GrayImage img = read_image(entry.image);
        for (const Rect& box : entry.boxes) {
            if (!contains(img.bounds(), box))
                fail(ErrorCode::Bounds, "box outside image '" + entry.image.string() + "'");
            set.positives.push_back(resize_bilinear(crop(img, box), winW, winH));
        }
    }
    for (const auto& path : parse_negatives_list(read_text_file(negativesFile), negativesFile.parent_path()))
        set.negativePool.push_back(read_image(path));
    return set;
}

}  // namespace balldet
