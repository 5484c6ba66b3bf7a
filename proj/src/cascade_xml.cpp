#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

#include "balldet/error.hpp"
#include "balldet/lbp_cascade.hpp"

namespace balldet {

namespace pt = boost::property_tree;

namespace {

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

const pt::ptree& child(const pt::ptree& node, const std::string& name, const std::string& where) {
    const auto c = node.get_child_optional(name);
    if (!c) fail(ErrorCode::Parse, where + ": missing <" + name + ">");
    return *c;
}

std::string text_of(const pt::ptree& node, const std::string& name, const std::string& where) {
    return trimmed(child(node, name, where).data());
}

std::vector<std::string> tokens(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

long long to_integer(const std::string& token, const std::string& where) {
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        fail(ErrorCode::Parse, where + ": '" + token + "' is not an integer");
    return value;
}

double to_real(const std::string& token, const std::string& where) {
    double value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        fail(ErrorCode::Parse, where + ": '" + token + "' is not a number");
    return value;
}

int integer_field(const pt::ptree& node, const std::string& name, const std::string& where) {
    return static_cast<int>(to_integer(text_of(node, name, where), where + "/" + name));
}

/// Children named "_" (the format's anonymous list items), skipping comments.
std::vector<const pt::ptree*> items(const pt::ptree& list) {
    std::vector<const pt::ptree*> out;
    for (const auto& [key, value] : list)
        if (key == "_") out.push_back(&value);
    return out;
}

std::string real_text(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

LbpWeak parse_weak(const pt::ptree& node, const std::string& where) {
    const auto nodes = tokens(text_of(node, "internalNodes", where));
    if (nodes.size() != 11)
        fail(ErrorCode::Parse, where + ": internalNodes must hold 11 integers (2 child tags, feature index, 8 "
                                       "subset words), found " + std::to_string(nodes.size()));
    LbpWeak weak;
    const long long left = to_integer(nodes[0], where);
    const long long right = to_integer(nodes[1], where);
    if (left != 0 || right != -1)
        fail(ErrorCode::UnsupportedModel, where + ": only single-split (stump) weak classifiers are supported");
    weak.featureIndex = static_cast<int>(to_integer(nodes[2], where));
    for (int k = 0; k < 8; ++k) {
        const long long word = to_integer(nodes[3 + k], where);
        if (word < INT32_MIN || word > UINT32_MAX) fail(ErrorCode::Parse, where + ": subset word out of range");
        weak.subset[k] = static_cast<std::uint32_t>(word);
    }
    const auto leaves = tokens(text_of(node, "leafValues", where));
    if (leaves.size() != 2) fail(ErrorCode::Parse, where + ": leafValues must hold 2 reals");
    weak.leafIn = to_real(leaves[0], where);
    weak.leafOut = to_real(leaves[1], where);
    return weak;
}

}  // namespace

CascadeModel parse_cascade(std::string_view xml) {
    pt::ptree doc;
    try {
        std::istringstream in{std::string(xml)};
        pt::read_xml(in, doc);
    } catch (const pt::xml_parser_error& e) {
        fail(ErrorCode::Parse, "line " + std::to_string(e.line()) + ": " + e.message());
    }

    const pt::ptree* root = nullptr;
    if (auto c = doc.get_child_optional("opencv_storage.cascade")) root = &*c;
    else if (auto bare = doc.get_child_optional("cascade")) root = &*bare;
    if (!root) fail(ErrorCode::Parse, "no <cascade> element");

    const std::string stageType = text_of(*root, "stageType", "cascade");
    if (stageType != "BOOST") fail(ErrorCode::UnsupportedModel, "stageType '" + stageType + "' is not supported");
    const std::string featureType = text_of(*root, "featureType", "cascade");
    if (featureType != "LBP")
        fail(ErrorCode::UnsupportedModel, "featureType '" + featureType + "' is not supported (LBP only)");
    if (const auto fp = root->get_child_optional("featureParams")) {
        if (fp->get_child_optional("maxCatCount") && integer_field(*fp, "maxCatCount", "featureParams") != 256)
            fail(ErrorCode::UnsupportedModel, "LBP models must have maxCatCount 256");
    }

    CascadeModel model;
    model.windowH = integer_field(*root, "height", "cascade");
    model.windowW = integer_field(*root, "width", "cascade");
    const int stageNum = integer_field(*root, "stageNum", "cascade");

    const auto stageNodes = items(child(*root, "stages", "cascade"));
    if (static_cast<int>(stageNodes.size()) != stageNum)
        fail(ErrorCode::Validation, "stageNum says " + std::to_string(stageNum) + " but " +
                                        std::to_string(stageNodes.size()) + " stages are present");
    for (std::size_t s = 0; s < stageNodes.size(); ++s) {
        const std::string where = "stage " + std::to_string(s);
        Stage stage;
        stage.threshold = to_real(text_of(*stageNodes[s], "stageThreshold", where), where);
        const auto weakNodes = items(child(*stageNodes[s], "weakClassifiers", where));
        if (stageNodes[s]->get_child_optional("maxWeakCount") &&
            integer_field(*stageNodes[s], "maxWeakCount", where) != static_cast<int>(weakNodes.size()))
            fail(ErrorCode::Validation, where + ": maxWeakCount disagrees with the weak classifier list");
        for (std::size_t w = 0; w < weakNodes.size(); ++w)
            stage.weaks.push_back(parse_weak(*weakNodes[w], where + " weak " + std::to_string(w)));
        model.stages.push_back(std::move(stage));
    }

    for (const pt::ptree* f : items(child(*root, "features", "cascade"))) {
        const std::string where = "feature " + std::to_string(model.features.size());
        const auto r = tokens(text_of(*f, "rect", where));
        if (r.size() != 4) fail(ErrorCode::Parse, where + ": rect must hold 4 integers");
        model.features.push_back({static_cast<int>(to_integer(r[0], where)), static_cast<int>(to_integer(r[1], where)),
                                  static_cast<int>(to_integer(r[2], where)),
                                  static_cast<int>(to_integer(r[3], where))});
    }
    model.validate();
    return model;
}

std::string serialize_cascade(const CascadeModel& model) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\"?>\n<opencv_storage>\n<cascade>\n"
        << "  <stageType>BOOST</stageType>\n"
        << "  <featureType>LBP</featureType>\n"
        << "  <height>" << model.windowH << "</height>\n"
        << "  <width>" << model.windowW << "</width>\n"
        << "  <stageParams>\n    <maxWeakCount>" << model.max_weak_count() << "</maxWeakCount></stageParams>\n"
        << "  <featureParams>\n    <maxCatCount>256</maxCatCount>\n    <featSize>1</featSize></featureParams>\n"
        << "  <stageNum>" << model.stages.size() << "</stageNum>\n"
        << "  <stages>\n";
    for (std::size_t s = 0; s < model.stages.size(); ++s) {
        const Stage& stage = model.stages[s];
        out << "    <!-- stage " << s << " -->\n    <_>\n"
            << "      <maxWeakCount>" << stage.weaks.size() << "</maxWeakCount>\n"
            << "      <stageThreshold>" << real_text(stage.threshold) << "</stageThreshold>\n"
            << "      <weakClassifiers>\n";
        for (const LbpWeak& weak : stage.weaks) {
            out << "        <_>\n          <internalNodes>\n            0 -1 " << weak.featureIndex;
            for (std::uint32_t word : weak.subset) out << ' ' << static_cast<std::int32_t>(word);
            out << "</internalNodes>\n          <leafValues>\n            " << real_text(weak.leafIn) << ' '
                << real_text(weak.leafOut) << "</leafValues></_>\n";
        }
        out << "      </weakClassifiers></_>\n";
    }
    out << "  </stages>\n  <features>\n";
    for (const LbpFeature& f : model.features)
        out << "    <_>\n      <rect>\n        " << f.cellX << ' ' << f.cellY << ' ' << f.cellW << ' ' << f.cellH
            << "</rect></_>\n";
    out << "  </features>\n</cascade>\n</opencv_storage>\n";
    return out.str();
}

CascadeModel load_cascade(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open model '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_cascade(text.str());
    } catch (const Error& e) {
        fail(e.code(), path.string() + ": " + e.what());
    }
}

void save_cascade(const CascadeModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write model '" + path.string() + "'");
    out << serialize_cascade(model);
    if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

}  // namespace balldet
