#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "balldet/imaging.hpp"
#include "balldet/training.hpp"

namespace balldet {

struct DescriptionResult {
    std::string text;
    std::vector<std::string> warnings;
};

/// One `<path> 1 0 0 <w> <h>` line per image in `dir`, sorted by file name.
/// Paths are `dir` joined with the file name, as given.
DescriptionResult create_positives_description(const std::filesystem::path& dir);

/// Absolute paths of every image below `dir` (recursive), sorted, one per line.
std::string list_negatives(const std::filesystem::path& dir);

struct PositiveEntry {
    std::filesystem::path image;
    std::vector<Rect> boxes;
};

/// Parses a positives description; relative paths resolve against `baseDir`.
std::vector<PositiveEntry> parse_positives_description(std::string_view text, const std::filesystem::path& baseDir);

std::vector<std::filesystem::path> parse_negatives_list(std::string_view text, const std::filesystem::path& baseDir);

/// Loads positives (each box resampled to winW x winH) and the negative pool
/// from a description file and a negatives list.
SampleSet load_sample_set(const std::filesystem::path& positivesFile, const std::filesystem::path& negativesFile,
                          int winW, int winH);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace balldet
