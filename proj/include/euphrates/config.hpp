#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include "euphrates/error.hpp"
#include "euphrates/extrapolate.hpp"
#include "euphrates/motion.hpp"
#include "euphrates/scheduler.hpp"
#include "euphrates/socmodel.hpp"
#include "euphrates/trace_io.hpp"

namespace euphrates {

/// Everything one simulation run needs. Every field has a default, and the
/// effective values are echoed into each output file.
struct RunConfig {
    std::string frames_dir;      // frame sequence (motion estimated on the fly) ...
    std::string motion_dir;      // ... or precomputed .eumv metadata
    std::optional<RawDims> raw_dims;
    std::optional<std::size_t> frame_count;  // defaults to the input length
    std::string detections;      // detection trace replayed as inference output
    std::string ground_truth;    // optional; used by sweep for accuracy
    PipelineConfig pipeline{};
    MotionParams motion{};
    SocConfig soc{};
    double provider_noise = 0.0;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
};

inline std::string mode_string(const PipelineConfig& p) {
    return p.mode == EwMode::Adaptive ? "adaptive" : "ew:" + std::to_string(p.constant_ew);
}

/// Parses "ew:N" or "adaptive".
inline void parse_mode(const std::string& s, PipelineConfig& p) {
    if (s == "adaptive") {
        p.mode = EwMode::Adaptive;
        return;
    }
    if (s.rfind("ew:", 0) == 0) {
        try {
            std::size_t used = 0;
            const int n = std::stoi(s.substr(3), &used);
            if (used == s.size() - 3 && n >= 1) {
                p.mode = EwMode::Constant;
                p.constant_ew = n;
                return;
            }
        } catch (const std::exception&) {
        }
    }
    fail(ErrorKind::Config, "invalid mode '" + s + "' (expected ew:N with N >= 1, or adaptive)");
}

inline Scenario parse_scenario(const std::string& s) {
    if (s == "detection") return Scenario::Detection;
    if (s == "tracking") return Scenario::Tracking;
    fail(ErrorKind::Config, "invalid scenario '" + s + "' (expected detection|tracking)");
}

inline std::string_view to_string(Scenario s) { return s == Scenario::Detection ? "detection" : "tracking"; }

inline Json soc_to_json(const SocConfig& c) {
    Json j;
    j["network"] = c.network;
    j["net_gop"] = c.net_gop;
    j["sensor_power"] = c.sensor_power;
    j["isp_power"] = c.isp_power;
    j["nnx_power"] = c.nnx_power;
    j["nnx_peak_tops"] = c.nnx_peak_tops;
    j["nnx_utilization"] = c.nnx_utilization;
    j["mc_power"] = c.mc_power;
    j["mc_idle_power"] = c.mc_idle_power;
    j["dram_idle_power"] = c.dram_idle_power;
    j["dram_energy_per_byte_pj"] = c.dram_energy_per_byte_pj;
    j["capture_fps"] = c.capture_fps;
    j["iframe_traffic"] = c.iframe_traffic;
    j["eframe_traffic"] = c.eframe_traffic;
    j["extrapolation_time"] = c.extrapolation_time;
    j["cpu_extrapolation"] = c.cpu_extrapolation;
    j["cpu_power"] = c.cpu_power;
    j["cpu_extrapolation_time"] = c.cpu_extrapolation_time;
    j["dram_split"] = "calibrated idle + per-byte surrogate";
    return j;
}

namespace detail {

inline void reject_unknown_keys(const Json& j, std::initializer_list<const char*> known, const std::string& where) {
    if (!j.is_object()) fail(ErrorKind::Config, where + " must be an object");
    std::set<std::string> allowed(known.begin(), known.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.contains(it.key())) fail(ErrorKind::Config, "unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read_field(const Json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key) || j[key].is_null()) return;
    try {
        out = j[key].get<T>();
    } catch (const Json::exception&) {
        fail(ErrorKind::Config, where + "." + key + " has the wrong type");
    }
}

}  // namespace detail

/// The network preset is applied first; explicit fields override it.
inline SocConfig soc_from_json(const Json& j) {
    const std::string where = "soc";
    detail::reject_unknown_keys(j,
                                {"network", "net_gop", "sensor_power", "isp_power", "nnx_power", "nnx_peak_tops",
                                 "nnx_utilization", "mc_power", "mc_idle_power", "dram_idle_power",
                                 "dram_energy_per_byte_pj", "capture_fps", "iframe_traffic", "eframe_traffic",
                                 "extrapolation_time", "cpu_extrapolation", "cpu_power", "cpu_extrapolation_time",
                                 "dram_split"},
                                where);
    SocConfig c;
    if (j.contains("network")) c.apply(network_profile(j["network"].get<std::string>()));
    detail::read_field(j, "net_gop", c.net_gop, where);
    detail::read_field(j, "sensor_power", c.sensor_power, where);
    detail::read_field(j, "isp_power", c.isp_power, where);
    detail::read_field(j, "nnx_power", c.nnx_power, where);
    detail::read_field(j, "nnx_peak_tops", c.nnx_peak_tops, where);
    detail::read_field(j, "nnx_utilization", c.nnx_utilization, where);
    detail::read_field(j, "mc_power", c.mc_power, where);
    detail::read_field(j, "mc_idle_power", c.mc_idle_power, where);
    detail::read_field(j, "dram_idle_power", c.dram_idle_power, where);
    detail::read_field(j, "dram_energy_per_byte_pj", c.dram_energy_per_byte_pj, where);
    detail::read_field(j, "capture_fps", c.capture_fps, where);
    detail::read_field(j, "iframe_traffic", c.iframe_traffic, where);
    detail::read_field(j, "eframe_traffic", c.eframe_traffic, where);
    detail::read_field(j, "extrapolation_time", c.extrapolation_time, where);
    detail::read_field(j, "cpu_extrapolation", c.cpu_extrapolation, where);
    detail::read_field(j, "cpu_power", c.cpu_power, where);
    detail::read_field(j, "cpu_extrapolation_time", c.cpu_extrapolation_time, where);
    c.validate();
    return c;
}

inline Json run_config_to_json(const RunConfig& c) {
    Json j;
    j["frames_dir"] = c.frames_dir;
    j["motion_dir"] = c.motion_dir;
    if (c.raw_dims) j["raw_dims"] = {{"width", c.raw_dims->width}, {"height", c.raw_dims->height}};
    if (c.frame_count) j["frame_count"] = *c.frame_count;
    j["detections"] = c.detections;
    j["ground_truth"] = c.ground_truth;
    j["mode"] = mode_string(c.pipeline);
    j["scenario"] = to_string(c.pipeline.scenario);
    j["motion"] = {{"mb_size", c.motion.mb_size},
                   {"search_range", c.motion.search_range},
                   {"algorithm", to_string(c.motion.algorithm)}};
    j["extrapolation"] = {{"grid_rows", c.pipeline.extrapolation.grid.rows},
                          {"grid_cols", c.pipeline.extrapolation.grid.cols},
                          {"beta_threshold", c.pipeline.extrapolation.beta_threshold},
                          {"sub_roi_policy", "persist within EW, re-split at each I-frame"}};
    j["adaptive"] = {{"ew_min", c.pipeline.adaptive.ew_min},
                     {"ew_max", c.pipeline.adaptive.ew_max},
                     {"initial_ew", c.pipeline.adaptive.initial_ew},
                     {"diff_threshold", c.pipeline.adaptive.diff_threshold},
                     {"k_up", c.pipeline.adaptive.k_up}};
    j["soc"] = soc_to_json(c.soc);
    j["provider"] = {{"noise_sigma", c.provider_noise}};
    j["seed"] = c.seed;
    j["out"] = c.out_dir;
    return j;
}

inline RunConfig run_config_from_json(const Json& root) {
    // A result-trace header ({"tool", "version", "config"}) is accepted as well.
    const Json& j = (root.contains("config") && root.contains("tool")) ? root["config"] : root;
    const std::string where = "config";
    detail::reject_unknown_keys(j,
                                {"frames_dir", "motion_dir", "raw_dims", "frame_count", "detections", "ground_truth",
                                 "mode", "scenario", "motion", "extrapolation", "adaptive", "soc", "provider", "seed",
                                 "out"},
                                where);
    RunConfig c;
    detail::read_field(j, "frames_dir", c.frames_dir, where);
    detail::read_field(j, "motion_dir", c.motion_dir, where);
    if (j.contains("raw_dims")) {
        detail::reject_unknown_keys(j["raw_dims"], {"width", "height"}, "raw_dims");
        RawDims d;
        detail::read_field(j["raw_dims"], "width", d.width, "raw_dims");
        detail::read_field(j["raw_dims"], "height", d.height, "raw_dims");
        c.raw_dims = d;
    }
    if (j.contains("frame_count")) {
        std::size_t n = 0;
        detail::read_field(j, "frame_count", n, where);
        c.frame_count = n;
    }
    detail::read_field(j, "detections", c.detections, where);
    detail::read_field(j, "ground_truth", c.ground_truth, where);
    if (j.contains("mode")) parse_mode(j["mode"].get<std::string>(), c.pipeline);
    if (j.contains("scenario")) c.pipeline.scenario = parse_scenario(j["scenario"].get<std::string>());
    if (j.contains("motion")) {
        const Json& m = j["motion"];
        detail::reject_unknown_keys(m, {"mb_size", "search_range", "algorithm"}, "motion");
        detail::read_field(m, "mb_size", c.motion.mb_size, "motion");
        detail::read_field(m, "search_range", c.motion.search_range, "motion");
        if (m.contains("algorithm")) c.motion.algorithm = parse_search_algorithm(m["algorithm"].get<std::string>());
    }
    if (j.contains("extrapolation")) {
        const Json& e = j["extrapolation"];
        detail::reject_unknown_keys(e, {"grid_rows", "grid_cols", "beta_threshold", "sub_roi_policy"},
                                    "extrapolation");
        detail::read_field(e, "grid_rows", c.pipeline.extrapolation.grid.rows, "extrapolation");
        detail::read_field(e, "grid_cols", c.pipeline.extrapolation.grid.cols, "extrapolation");
        detail::read_field(e, "beta_threshold", c.pipeline.extrapolation.beta_threshold, "extrapolation");
    }
    if (j.contains("adaptive")) {
        const Json& a = j["adaptive"];
        detail::reject_unknown_keys(a, {"ew_min", "ew_max", "initial_ew", "diff_threshold", "k_up"}, "adaptive");
        detail::read_field(a, "ew_min", c.pipeline.adaptive.ew_min, "adaptive");
        detail::read_field(a, "ew_max", c.pipeline.adaptive.ew_max, "adaptive");
        detail::read_field(a, "initial_ew", c.pipeline.adaptive.initial_ew, "adaptive");
        detail::read_field(a, "diff_threshold", c.pipeline.adaptive.diff_threshold, "adaptive");
        detail::read_field(a, "k_up", c.pipeline.adaptive.k_up, "adaptive");
    }
    if (j.contains("soc")) c.soc = soc_from_json(j["soc"]);
    if (j.contains("provider")) {
        detail::reject_unknown_keys(j["provider"], {"noise_sigma"}, "provider");
        detail::read_field(j["provider"], "noise_sigma", c.provider_noise, "provider");
    }
    detail::read_field(j, "seed", c.seed, where);
    detail::read_field(j, "out", c.out_dir, where);
    return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open config " + path.string());
    // Accept either a plain JSON document or the first line of a result trace.
    std::string first;
    std::getline(in, first);
    std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Json j;
    try {
        j = Json::parse(first + "\n" + rest);
    } catch (const Json::parse_error&) {
        try {
            j = Json::parse(first);
        } catch (const Json::parse_error& e) {
            fail(ErrorKind::Config, path.string() + ": invalid JSON (" + e.what() + ")");
        }
    }
    return run_config_from_json(j);
}

inline void validate(const RunConfig& c) {
    c.motion.validate();
    c.pipeline.extrapolation.validate();
    c.pipeline.initial_ew_state();
    c.soc.validate();
    if (c.frames_dir.empty() == c.motion_dir.empty())
        fail(ErrorKind::Config, "exactly one of frames_dir or motion_dir must be set");
    if (c.detections.empty()) fail(ErrorKind::Config, "detections trace path is required");
    if (c.provider_noise < 0) fail(ErrorKind::Config, "provider noise must be non-negative");
    auto must_exist = [](const std::string& p, const char* what) {
        if (!p.empty() && !std::filesystem::exists(p))
            fail(ErrorKind::Io, std::string(what) + " does not exist: " + p);
    };
    must_exist(c.frames_dir, "frames_dir");
    must_exist(c.motion_dir, "motion_dir");
    must_exist(c.detections, "detections");
    must_exist(c.ground_truth, "ground_truth");
}

}  // namespace euphrates
