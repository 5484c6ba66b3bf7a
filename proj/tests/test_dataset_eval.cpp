#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>

#include "balldet/dataset.hpp"
#include "balldet/error.hpp"
#include "balldet/evaluation.hpp"

using namespace balldet;
namespace fs = std::filesystem;

namespace {

const fs::path kData = BALLDET_TEST_DATA;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

struct CurrentDir {
    fs::path saved = fs::current_path();
    explicit CurrentDir(const fs::path& p) { fs::current_path(p); }
    ~CurrentDir() { fs::current_path(saved); }
};

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Input;
}

FrameBall fb(int frame, std::optional<Circle> c, double windows = 0) { return {frame, c, windows}; }

}  // namespace

TEST_CASE("positives description") {
    TempDir root("balldet_pos_test");
    fs::create_directories(root.path / "pos_top");
    fs::copy_file(kData / "gray_16x16.png", root.path / "pos_top" / "img1.png");
    write_pgm(GrayImage(20, 18, 7), root.path / "pos_top" / "img0.pgm");
    std::ofstream(root.path / "pos_top" / "notes.txt") << "hello";

    CurrentDir cd(root.path);
    const DescriptionResult r = create_positives_description("pos_top");
    CHECK(r.text == "pos_top/img0.pgm 1 0 0 20 18\npos_top/img1.png 1 0 0 16 16\n");
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("notes.txt") != std::string::npos);

    const auto entries = parse_positives_description(r.text, root.path);
    REQUIRE(entries.size() == 2);
    CHECK(entries[1].image == root.path / "pos_top" / "img1.png");
    REQUIRE(entries[1].boxes.size() == 1);
    CHECK(entries[1].boxes[0] == Rect{0, 0, 16, 16});

    fs::create_directories(root.path / "empty");
    const DescriptionResult e = create_positives_description("empty");
    CHECK(e.text.empty());
    CHECK(e.warnings.size() == 1);
    CHECK(code_of([] { create_positives_description("no_such_dir"); }) == ErrorCode::Io);
}

TEST_CASE("many positives give one line each") {
    TempDir root("balldet_pos_many");
    for (int i = 0; i < 40; ++i) write_pgm(GrayImage(16, 16, static_cast<std::uint8_t>(i)), root.path / ("p" + std::to_string(1000 + i) + ".pgm"));
    const auto text = create_positives_description(root.path).text;
    CHECK(std::count(text.begin(), text.end(), '\n') == 40);
}

TEST_CASE("negatives list is recursive, absolute and sorted") {
    TempDir root("balldet_neg_test");
    fs::create_directories(root.path / "neg_top" / "deeper");
    write_pgm(GrayImage(32, 32, 1), root.path / "neg_top" / "img4.pgm");
    fs::copy_file(kData / "gray_16x16.png", root.path / "neg_top" / "img3.png");
    write_pgm(GrayImage(32, 32, 2), root.path / "neg_top" / "deeper" / "img5.pgm");
    std::ofstream(root.path / "neg_top" / "readme.md") << "x";

    const std::string text = list_negatives(root.path / "neg_top");
    const auto paths = parse_negatives_list(text, "/");
    REQUIRE(paths.size() == 3);
    for (const auto& p : paths) CHECK(p.is_absolute());
    CHECK(paths[0].filename() == "img5.pgm");
    CHECK(paths[1].filename() == "img3.png");
    CHECK(paths[2].filename() == "img4.pgm");

    fs::create_directories(root.path / "none");
    CHECK(list_negatives(root.path / "none").empty());
    CHECK(code_of([&] { list_negatives(root.path / "missing"); }) == ErrorCode::Io);
}

TEST_CASE("load_sample_set resamples boxes to the window") {
    TempDir root("balldet_load_test");
    write_pgm(GrayImage(32, 32, 90), root.path / "a.pgm");
    write_pgm(GrayImage(40, 30, 10), root.path / "n.pgm");
    std::ofstream(root.path / "pos.txt") << "a.pgm 2 0 0 32 32 8 8 16 16\n";
    std::ofstream(root.path / "neg.txt") << "n.pgm\n\n";
    const SampleSet s = load_sample_set(root.path / "pos.txt", root.path / "neg.txt", 16, 16);
    REQUIRE(s.positives.size() == 2);
    CHECK(s.positives[0] == GrayImage(16, 16, 90));
    REQUIRE(s.negativePool.size() == 1);
    CHECK(s.negativePool[0].width() == 40);

    std::ofstream(root.path / "bad.txt") << "a.pgm 1 0 0 64 64\n";
    CHECK(code_of([&] { load_sample_set(root.path / "bad.txt", root.path / "neg.txt", 16, 16); }) ==
          ErrorCode::Bounds);
    std::ofstream(root.path / "garbled.txt") << "a.pgm one\n";
    CHECK(code_of([&] { load_sample_set(root.path / "garbled.txt", root.path / "neg.txt", 16, 16); }) ==
          ErrorCode::Parse);
}

TEST_CASE("circle box IoU") {
    CHECK(circle_box_iou({10, 10, 5}, {10, 10, 5}) == 1.0);
    CHECK(circle_box_iou({10, 10, 5}, {30, 10, 5}) == 0.0);
    // Boxes [5,15] and [10,20] on x, same y: overlap 5x10 over union 150.
    CHECK(circle_box_iou({10, 10, 5}, {15, 10, 5}) == doctest::Approx(50.0 / 150.0));
}

TEST_CASE("evaluation conventions") {
    const std::vector<FrameBall> truth{fb(0, Circle{50, 50, 10}), fb(1, Circle{60, 50, 10}), fb(2, std::nullopt),
                                       fb(3, Circle{70, 50, 10})};
    SUBCASE("perfect detections") {
        const EvalReport r = evaluate(truth, truth);
        CHECK(r.truePositives == 3);
        CHECK(r.precision == 1.0);
        CHECK(r.recall == 1.0);
    }
    SUBCASE("no detections") {
        std::vector<FrameBall> none;
        for (const auto& t : truth) none.push_back(fb(t.frame, std::nullopt, 100));
        const EvalReport r = evaluate(truth, none);
        CHECK(r.precision == 0.0);
        CHECK(r.recall == 0.0);
        CHECK(r.falseNegatives == 3);
        CHECK(r.meanWindowsPerFrame == 100.0);
    }
    SUBCASE("nothing to find and nothing found") {
        const std::vector<FrameBall> empty{fb(0, std::nullopt), fb(1, std::nullopt)};
        const EvalReport r = evaluate(empty, empty);
        CHECK(r.precision == 0.0);
        CHECK(r.recall == 1.0);
    }
    SUBCASE("half found, one misplaced") {
        const std::vector<FrameBall> half{fb(0, Circle{51, 50, 10}), fb(1, std::nullopt), fb(2, std::nullopt),
                                          fb(3, Circle{200, 50, 10})};
        const EvalReport r = evaluate(truth, half);
        CHECK(r.truePositives == 1);
        CHECK(r.falsePositives == 1);
        CHECK(r.falseNegatives == 2);
        CHECK(r.precision == 0.5);
        CHECK(r.recall == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("IoU threshold") {
        const std::vector<FrameBall> off{fb(0, Circle{55, 50, 10}), fb(1, Circle{60, 50, 10}), fb(2, std::nullopt),
                                         fb(3, Circle{70, 50, 10})};
        CHECK(evaluate(truth, off, 0.5).truePositives == 3);
        CHECK(evaluate(truth, off, 0.9).truePositives == 2);
    }
    SUBCASE("frame sets must agree") {
        const std::vector<FrameBall> shorter(truth.begin(), truth.begin() + 3);
        CHECK(code_of([&] { evaluate(truth, shorter); }) == ErrorCode::Input);
        std::vector<FrameBall> shifted = truth;
        shifted[3].frame = 9;
        CHECK(code_of([&] { evaluate(truth, shifted); }) == ErrorCode::Input);
    }
}

TEST_CASE("frame ball JSON lines") {
    const std::string text =
        "{\"frame\":0,\"ball\":{\"x\":1.5,\"y\":2,\"radius\":3,\"source\":\"patrol\"},\"windowsEvaluated\":40}\n"
        "\n"
        "{\"frame\":1,\"ball\":null,\"patches\":[{\"windowsEvaluated\":10},{\"windowsEvaluated\":5}]}\n"
        "{\"summary\":{\"frames\":2}}\n";
    const auto balls = parse_frame_balls(text);
    REQUIRE(balls.size() == 2);
    CHECK(balls[0].ball == Circle{1.5, 2, 3});
    CHECK(balls[0].windowsEvaluated == 40);
    CHECK_FALSE(balls[1].ball);
    CHECK(balls[1].windowsEvaluated == 15);

    CHECK(parse_frame_balls(frame_ball_json(balls[0]))[0].ball == balls[0].ball);
    CHECK(code_of([] { parse_frame_balls("{\"frame\": 0, \"ball\": {\"x\": 1}}\n"); }) == ErrorCode::Parse);
    CHECK(code_of([] { parse_frame_balls("not json\n"); }) == ErrorCode::Parse);

    EvalReport r;
    r.truePositives = 4;
    r.precision = 1.0;
    const auto j = nlohmann::json::parse(eval_report_json(r));
    CHECK(j["truePositives"] == 4);
    CHECK(j["precision"] == 1.0);
    CHECK(j.contains("meanWindowsPerFrame"));
}
