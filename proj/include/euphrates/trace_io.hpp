#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "euphrates/error.hpp"
#include "euphrates/roi.hpp"
#include "euphrates/scheduler.hpp"

namespace euphrates {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolName = "euphrates";
inline constexpr const char* kToolVersion = "0.1.0";

inline Json roi_to_json(const Roi& r) {
    Json j;
    j["x"] = r.x;
    j["y"] = r.y;
    j["w"] = r.w;
    j["h"] = r.h;
    if (r.label) j["label"] = *r.label;
    if (r.score) j["score"] = *r.score;
    return j;
}

inline Roi roi_from_json(const Json& j) {
    if (!j.is_object()) fail(ErrorKind::Format, "box must be an object");
    auto number = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_number()) fail(ErrorKind::Format, std::string("box field '") + key + "' missing or not a number");
        return j[key].get<double>();
    };
    Roi r{number("x"), number("y"), number("w"), number("h")};
    if (!(r.w > 0 && r.h > 0)) fail(ErrorKind::Format, "box has non-positive extent");
    if (j.contains("label") && !j["label"].is_null()) {
        if (!j["label"].is_number_integer()) fail(ErrorKind::Format, "box label must be an integer");
        r.label = j["label"].get<int>();
    }
    if (j.contains("score") && !j["score"].is_null()) {
        if (!j["score"].is_number()) fail(ErrorKind::Format, "box score must be a number");
        r.score = j["score"].get<double>();
        if (*r.score < 0 || *r.score > 1) fail(ErrorKind::Format, "box score must lie in [0, 1]");
    }
    return r;
}

/// Reads a line-oriented JSON trace: one {"frame": n, "boxes": [...]} record
/// per line. Header lines without a "frame" key (config echoes) are skipped,
/// so result traces read back as detection traces.
inline DetectionTrace parse_detection_trace(std::istream& in, const std::string& name = "<trace>") {
    DetectionTrace trace;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = name + ":" + std::to_string(line_no) + ": ";
        Json rec;
        try {
            rec = Json::parse(line);
        } catch (const Json::parse_error& e) {
            fail(ErrorKind::Format, where + "invalid JSON (" + e.what() + ")");
        }
        if (!rec.is_object()) fail(ErrorKind::Format, where + "record must be an object");
        if (!rec.contains("frame")) continue;
        if (!rec["frame"].is_number_integer() || rec["frame"].get<long long>() < 0)
            fail(ErrorKind::Format, where + "'frame' must be a non-negative integer");
        const auto frame = rec["frame"].get<std::size_t>();
        if (trace.contains(frame)) fail(ErrorKind::Format, where + "duplicate frame " + std::to_string(frame));
        FrameBoxes boxes;
        if (rec.contains("boxes")) {
            if (!rec["boxes"].is_array()) fail(ErrorKind::Format, where + "'boxes' must be an array");
            try {
                for (const auto& b : rec["boxes"]) boxes.push_back(roi_from_json(b));
            } catch (const Error& e) {
                fail(e.kind(), where + e.what());
            }
        }
        trace.emplace(frame, std::move(boxes));
    }
    return trace;
}

inline DetectionTrace read_detection_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    return parse_detection_trace(in, path.string());
}

inline void write_detection_trace(std::ostream& out, const DetectionTrace& trace, const Json* header = nullptr) {
    if (header) out << header->dump() << '\n';
    for (const auto& [frame, boxes] : trace) {
        Json rec;
        rec["frame"] = frame;
        rec["boxes"] = Json::array();
        for (const auto& b : boxes) rec["boxes"].push_back(roi_to_json(b));
        out << rec.dump() << '\n';
    }
}

inline std::string_view to_string(FrameKind k) { return k == FrameKind::Inference ? "I" : "E"; }

inline Json frame_result_to_json(const FrameResult& f) {
    Json rec;
    rec["frame"] = f.index;
    rec["kind"] = to_string(f.kind);
    rec["ew"] = f.ew;
    if (f.diff) rec["diff"] = *f.diff;
    rec["covered_mbs"] = f.cost.covered_mbs;
    rec["ops"] = f.cost.arithmetic_ops;
    rec["boxes"] = Json::array();
    for (const auto& b : f.boxes) {
        Json jb;
        jb["id"] = b.id;
        const Json roi = roi_to_json(b.roi);
        for (const auto& [k, v] : roi.items()) jb[k] = v;
        rec["boxes"].push_back(std::move(jb));
    }
    return rec;
}

/// Header line carrying the tool version and the effective configuration.
inline Json trace_header(const Json& config) {
    Json h;
    h["tool"] = kToolName;
    h["version"] = kToolVersion;
    h["config"] = config;
    return h;
}

inline void write_result_trace(std::ostream& out, const ResultTrace& trace, const Json& config) {
    out << trace_header(config).dump() << '\n';
    for (const auto& f : trace.frames) out << frame_result_to_json(f).dump() << '\n';
}

inline std::string serialize_result_trace(const ResultTrace& trace, const Json& config) {
    std::ostringstream s;
    write_result_trace(s, trace, config);
    return s.str();
}

}  // namespace euphrates
