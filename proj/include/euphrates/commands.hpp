#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "euphrates/config.hpp"
#include "euphrates/frame.hpp"
#include "euphrates/metadata.hpp"
#include "euphrates/metrics.hpp"
#include "euphrates/parallel.hpp"
#include "euphrates/scheduler.hpp"
#include "euphrates/socmodel.hpp"
#include "euphrates/synthetic.hpp"
#include "euphrates/trace_io.hpp"

namespace euphrates {

namespace fs = std::filesystem;

namespace detail {

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

inline void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

inline std::string frame_file_name(std::size_t index, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu%s", index, ext);
    return buf;
}

// Fixed formatting so CSV output does not depend on stream state.
inline std::string fmt(double v, int precision = 6) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v;
    return s.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateOptions {
    fs::path frames_dir;
    MotionParams params{};
    fs::path out_dir;
    std::optional<RawDims> raw_dims;
    unsigned threads = 1;
};

struct EstimateSummary {
    int cols = 0;
    int rows = 0;
    std::size_t files = 0;
    std::size_t bytes_per_file = 0;
    std::size_t mv_payload_bytes = 0;
};

/// One metadata file per consecutive frame pair, named by the later frame's index.
inline EstimateSummary cmd_estimate(const EstimateOptions& opt, std::ostream& log) {
    opt.params.validate();
    const auto frames = load_frame_sequence(opt.frames_dir, opt.raw_dims);
    if (frames.size() < 2)
        fail(ErrorKind::MissingData, opt.frames_dir.string() + ": need at least 2 frames, found " +
                                         std::to_string(frames.size()));
    detail::ensure_dir(opt.out_dir);
    EstimateSummary s;
    for (std::size_t t = 1; t < frames.size(); ++t) {
        const MotionField field = estimate_motion_field(frames[t - 1], frames[t], opt.params, opt.threads);
        save_metadata(opt.out_dir / detail::frame_file_name(t, ".eumv"), field);
        s.cols = field.cols();
        s.rows = field.rows();
        s.bytes_per_file = metadata::encoded_size(field);
        s.mv_payload_bytes = metadata::mv_payload_size(field);
        ++s.files;
    }
    log << "grid " << s.cols << "x" << s.rows << " (" << s.cols * s.rows << " MBs), " << s.files
        << " files, " << s.bytes_per_file << " bytes each (" << s.mv_payload_bytes << " bytes of MVs)\n";
    return s;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulationOutcome {
    ResultTrace trace;
    EnergyReport energy;
    Json config;
};

inline Json energy_report_to_json(const EnergyReport& r, const Json& config) {
    auto breakdown = [](const EnergyBreakdown& e) {
        Json j;
        j["frontend_mj"] = e.frontend;
        j["dram_mj"] = e.dram;
        j["backend_mj"] = e.backend;
        j["total_mj"] = e.total();
        return j;
    };
    Json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["config"] = config;
    j["frames"] = r.frames;
    j["inferences"] = r.inferences;
    j["inference_rate"] = r.inference_rate;
    j["total"] = breakdown(r.total);
    j["per_frame"] = breakdown(r.per_frame);
    j["baseline_total"] = breakdown(r.baseline_total);
    j["energy_saving"] = r.saving();
    j["achieved_fps"] = r.achieved_fps;
    j["baseline_fps"] = r.baseline_fps;
    return j;
}

/// (component, mJ, percent) rows; the config echo rides along as comment lines.
inline std::string energy_report_csv(const EnergyReport& r, const Json& config) {
    std::ostringstream s;
    s << "# " << kToolName << " " << kToolVersion << "\n# config " << config.dump() << "\n";
    s << "component,mj,percent\n";
    const double total = r.total.total();
    auto row = [&](const char* name, double v) {
        s << name << "," << detail::fmt(v) << "," << detail::fmt(total > 0 ? 100.0 * v / total : 0.0, 3) << "\n";
    };
    row("frontend", r.total.frontend);
    row("dram", r.total.dram);
    row("backend", r.total.backend);
    row("total", total);
    return s.str();
}

/// Runs scheduler + energy model as described by `cfg` without touching disk
/// outputs. Inputs are read from the paths in `cfg`.
inline SimulationOutcome simulate(const RunConfig& cfg, unsigned threads = 1) {
    validate(cfg);
    TraceProvider provider(read_detection_trace(cfg.detections), cfg.provider_noise, cfg.seed);
    SimulationOutcome out;
    out.config = run_config_to_json(cfg);
    if (!cfg.frames_dir.empty()) {
        const auto frames = load_frame_sequence(cfg.frames_dir, cfg.raw_dims);
        if (frames.empty()) fail(ErrorKind::MissingData, cfg.frames_dir + ": no frames");
        const std::size_t n = std::min(cfg.frame_count.value_or(frames.size()), frames.size());
        const FrameMotionSource motion(frames, cfg.motion, threads);
        out.trace = run_pipeline(n, provider, motion, cfg.pipeline);
    } else {
        const MetadataDirMotionSource motion(cfg.motion_dir);
        const std::size_t n = cfg.frame_count.value_or(motion.file_count() + 1);
        out.trace = run_pipeline(n, provider, motion, cfg.pipeline);
    }
    out.energy = summarize(out.trace, cfg.soc);
    return out;
}

/// simulate, then write trace.jsonl, energy.json, energy.csv and config.json under cfg.out_dir.
inline SimulationOutcome cmd_simulate(const RunConfig& cfg, std::ostream& log, unsigned threads = 1) {
    SimulationOutcome out = simulate(cfg, threads);
    const fs::path dir = cfg.out_dir;
    detail::ensure_dir(dir);
    detail::write_text(dir / "trace.jsonl", serialize_result_trace(out.trace, out.config));
    detail::write_text(dir / "energy.json", energy_report_to_json(out.energy, out.config).dump(2) + "\n");
    detail::write_text(dir / "energy.csv", energy_report_csv(out.energy, out.config));
    detail::write_text(dir / "config.json", trace_header(out.config).dump(2) + "\n");
    log << mode_string(cfg.pipeline) << ": " << out.trace.frames.size() << " frames, "
        << out.energy.inferences << " inferences, energy saving " << detail::fmt(100 * out.energy.saving(), 2)
        << "%, " << detail::fmt(out.energy.achieved_fps, 2) << " FPS\n";
    return out;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

enum class MetricKind { AveragePrecision, SuccessRate, Both };

struct EvaluateOptions {
    fs::path trace;
    fs::path ground_truth;
    std::vector<double> thresholds = default_thresholds();
    MetricKind metric = MetricKind::Both;
    fs::path out_dir;
};

struct EvaluationSummary {
    std::vector<CurvePoint> ap;
    std::vector<CurvePoint> success;
    bool empty_trace = false;
};

/// Aligns a trace with ground truth by frame index (the index sets must match).
inline std::pair<std::vector<FrameBoxes>, std::vector<FrameBoxes>> align_traces(const DetectionTrace& trace,
                                                                                const DetectionTrace& truth) {
    std::vector<FrameBoxes> d, g;
    for (const auto& [frame, boxes] : truth) {
        auto it = trace.find(frame);
        if (it == trace.end())
            fail(ErrorKind::Dimension, "frame " + std::to_string(frame) + " is in the ground truth but not the trace");
        d.push_back(it->second);
        g.push_back(boxes);
    }
    for (const auto& [frame, _] : trace)
        if (!truth.contains(frame))
            fail(ErrorKind::Dimension, "frame " + std::to_string(frame) + " is in the trace but not the ground truth");
    return {std::move(d), std::move(g)};
}

inline EvaluationSummary evaluate_traces(const DetectionTrace& trace, const DetectionTrace& truth,
                                         std::span<const double> thresholds, MetricKind metric) {
    EvaluationSummary s;
    std::size_t boxes = 0;
    for (const auto& [_, b] : trace) boxes += b.size();
    s.empty_trace = boxes == 0;
    if (s.empty_trace && trace.empty()) {
        validate_thresholds(thresholds);
        for (double t : thresholds) {
            if (metric != MetricKind::SuccessRate) s.ap.push_back({t, 0.0});
            if (metric != MetricKind::AveragePrecision) s.success.push_back({t, 0.0});
        }
        return s;
    }
    const auto [det, gt] = align_traces(trace, truth);
    if (metric != MetricKind::SuccessRate) s.ap = precision_curve(det, gt, thresholds);
    if (metric != MetricKind::AveragePrecision) {
        std::vector<std::optional<Roi>> pred;
        std::vector<Roi> truth_boxes;
        for (std::size_t f = 0; f < gt.size(); ++f) {
            if (gt[f].empty()) continue;  // tracking protocol: frames with a target only
            pred.push_back(det[f].empty() ? std::nullopt : std::optional<Roi>(det[f].front()));
            truth_boxes.push_back(gt[f].front());
        }
        s.success = success_curve(pred, truth_boxes, thresholds);
    }
    return s;
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve, const char* column) {
    std::ostringstream s;
    s << "threshold," << column << "\n";
    for (const auto& p : curve) s << detail::fmt(p.threshold, 4) << "," << detail::fmt(p.value) << "\n";
    return s.str();
}

inline EvaluationSummary cmd_evaluate(const EvaluateOptions& opt, std::ostream& log, std::ostream& warn) {
    const DetectionTrace trace = read_detection_trace(opt.trace);
    const DetectionTrace truth = read_detection_trace(opt.ground_truth);
    EvaluationSummary s = evaluate_traces(trace, truth, opt.thresholds, opt.metric);
    if (s.empty_trace) warn << "warning: trace " << opt.trace.string() << " contains no detections; AP is 0\n";
    Json summary;
    summary["tool"] = kToolName;
    summary["version"] = kToolVersion;
    summary["config"] = {{"trace", opt.trace.string()},
                         {"ground_truth", opt.ground_truth.string()},
                         {"thresholds", opt.thresholds},
                         {"matching", "greedy one-to-one by IoU, TP iff IoU > threshold"}};
    summary["empty_trace"] = s.empty_trace;
    auto at = [](const std::vector<CurvePoint>& c, double t) -> Json {
        for (const auto& p : c)
            if (std::abs(p.threshold - t) < 1e-12) return p.value;
        return nullptr;
    };
    if (!s.ap.empty()) summary["ap_at_0.5"] = at(s.ap, 0.5);
    if (!s.success.empty()) summary["success_at_0.5"] = at(s.success, 0.5);
    if (!opt.out_dir.empty()) {
        detail::ensure_dir(opt.out_dir);
        if (!s.ap.empty()) detail::write_text(opt.out_dir / "ap.csv", curve_csv(s.ap, "ap"));
        if (!s.success.empty()) detail::write_text(opt.out_dir / "success.csv", curve_csv(s.success, "success_rate"));
        detail::write_text(opt.out_dir / "summary.json", summary.dump(2) + "\n");
    }
    log << summary.dump(2) << "\n";
    return s;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

inline Json synthetic_spec_to_json(const SyntheticSpec& s) {
    Json traj = Json::array();
    for (const auto& d : s.trajectory) traj.push_back({d.dx, d.dy});
    return {{"canvas", {s.canvas_width, s.canvas_height}},
            {"object", {s.object_width, s.object_height}},
            {"start", {s.start_x, s.start_y}},
            {"trajectory", traj},
            {"seed", s.seed},
            {"background", s.background == Texture::Flat ? "flat" : "noise"},
            {"object_texture", s.object_texture == Texture::Flat ? "flat" : "noise"},
            {"frames", s.frame_count}};
}

/// Writes frames/NNNNNN.pgm and ground_truth.jsonl under out_dir.
inline SyntheticSequence cmd_synth(const SyntheticSpec& spec, const fs::path& out_dir, std::ostream& log) {
    SyntheticSequence seq = generate_sequence(spec);
    const fs::path frames_dir = out_dir / "frames";
    detail::ensure_dir(frames_dir);
    for (std::size_t t = 0; t < seq.frames.size(); ++t)
        save_frame(frames_dir / detail::frame_file_name(t, ".pgm"), seq.frames[t], FrameFormat::Pgm);
    DetectionTrace gt;
    for (std::size_t t = 0; t < seq.ground_truth.size(); ++t) gt[t] = {seq.ground_truth[t]};
    std::ostringstream text;
    const Json header = {{"tool", kToolName}, {"version", kToolVersion}, {"synthetic", synthetic_spec_to_json(spec)}};
    write_detection_trace(text, gt, &header);
    detail::write_text(out_dir / "ground_truth.jsonl", text.str());
    log << seq.frames.size() << " frames written to " << frames_dir.string() << "\n";
    return seq;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

enum class SweepAxis { Ew, MbSize, Algorithm };

inline SweepAxis parse_sweep_axis(const std::string& s) {
    if (s == "ew") return SweepAxis::Ew;
    if (s == "mb_size") return SweepAxis::MbSize;
    if (s == "algorithm") return SweepAxis::Algorithm;
    fail(ErrorKind::Config, "invalid sweep axis '" + s + "' (expected ew|mb_size|algorithm)");
}

struct SweepRow {
    std::string value;
    double accuracy = 0;  // AP@0.5 (detection) or success rate@0.5 (tracking)
    double energy_saving = 0;
    double fps = 0;
    std::size_t inferences = 0;
};

inline RunConfig sweep_variant(const RunConfig& base, SweepAxis axis, const std::string& value) {
    RunConfig c = base;
    switch (axis) {
        case SweepAxis::Ew:
            parse_mode(value == "adaptive" ? value : "ew:" + value, c.pipeline);
            break;
        case SweepAxis::MbSize:
            if (base.frames_dir.empty())
                fail(ErrorKind::Config, "mb_size sweeps need frames_dir (metadata fixes the MB size)");
            try {
                c.motion.mb_size = std::stoi(value);
            } catch (const std::exception&) {
                fail(ErrorKind::Config, "invalid mb_size value '" + value + "'");
            }
            break;
        case SweepAxis::Algorithm:
            if (base.frames_dir.empty())
                fail(ErrorKind::Config, "algorithm sweeps need frames_dir (metadata fixes the algorithm)");
            c.motion.algorithm = parse_search_algorithm(value);
            break;
    }
    return c;
}

inline double accuracy_at_half(const ResultTrace& trace, const DetectionTrace& truth, Scenario scenario) {
    DetectionTrace as_detections;
    for (const auto& f : trace.frames) {
        FrameBoxes b;
        for (const auto& t : f.boxes) b.push_back(t.roi);
        if (truth.contains(f.index)) as_detections[f.index] = std::move(b);
    }
    const double half[] = {0.5};
    const auto metric = scenario == Scenario::Detection ? MetricKind::AveragePrecision : MetricKind::SuccessRate;
    DetectionTrace truth_window;
    for (const auto& [frame, boxes] : truth)
        if (frame < trace.frames.size()) truth_window[frame] = boxes;
    const auto s = evaluate_traces(as_detections, truth_window, half, metric);
    return scenario == Scenario::Detection ? s.ap.front().value : s.success.front().value;
}

/// One simulate + evaluate run per value. Runs are independent and execute
/// on up to `threads` workers; rows come back in value order.
inline std::vector<SweepRow> run_sweep(const RunConfig& base, SweepAxis axis, const std::vector<std::string>& values,
                                       unsigned threads = 1) {
    if (values.empty()) fail(ErrorKind::Config, "sweep needs at least one value");
    if (base.ground_truth.empty()) fail(ErrorKind::Config, "sweep needs a ground_truth trace for accuracy");
    const DetectionTrace truth = read_detection_trace(base.ground_truth);
    std::vector<SweepRow> rows(values.size());
    parallel_for(values.size(), threads, [&](std::size_t i) {
        try {
            const RunConfig cfg = sweep_variant(base, axis, values[i]);
            const SimulationOutcome out = simulate(cfg, 1);
            rows[i] = {values[i], accuracy_at_half(out.trace, truth, cfg.pipeline.scenario), out.energy.saving(),
                       out.energy.achieved_fps, out.energy.inferences};
        } catch (const Error& e) {
            fail(e.kind(), "sweep run '" + values[i] + "': " + e.what());
        }
    });
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, const char* axis, const Json& config) {
    std::ostringstream s;
    s << "# " << kToolName << " " << kToolVersion << "\n# config " << config.dump() << "\n";
    s << axis << ",accuracy_at_0.5,energy_saving,fps,inferences\n";
    for (const auto& r : rows)
        s << r.value << "," << detail::fmt(r.accuracy) << "," << detail::fmt(r.energy_saving) << ","
          << detail::fmt(r.fps, 3) << "," << r.inferences << "\n";
    return s.str();
}

/// Qualitative orderings expected of a real-data sweep.
struct PropertyCheck {
    std::string name;
    bool holds = false;
    std::string detail;
};

inline constexpr double kTssEsTolerance = 0.05;

inline std::vector<PropertyCheck> sweep_property_checks(SweepAxis axis, const std::vector<SweepRow>& rows) {
    std::vector<PropertyCheck> checks;
    if (axis == SweepAxis::Ew) {
        bool acc = true, energy = true;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            acc = acc && rows[i].accuracy <= rows[i - 1].accuracy;
            energy = energy && rows[i].energy_saving >= rows[i - 1].energy_saving;
        }
        checks.push_back({"accuracy non-increasing in EW", acc, ""});
        checks.push_back({"energy saving non-decreasing in EW", energy, ""});
    } else if (axis == SweepAxis::MbSize) {
        auto find = [&](const char* v) -> const SweepRow* {
            for (const auto& r : rows)
                if (r.value == v) return &r;
            return nullptr;
        };
        const SweepRow* m16 = find("16");
        const SweepRow* m4 = find("4");
        const SweepRow* m128 = find("128");
        if (m16 && m4 && m128)
            checks.push_back({"16x16 MBs weakly dominate 4x4 and 128x128",
                              m16->accuracy >= m4->accuracy && m16->accuracy >= m128->accuracy,
                              "16:" + detail::fmt(m16->accuracy) + " 4:" + detail::fmt(m4->accuracy) +
                                  " 128:" + detail::fmt(m128->accuracy)});
    } else {
        const SweepRow *es = nullptr, *tss = nullptr;
        for (const auto& r : rows) {
            if (r.value == "es" || r.value == "ES") es = &r;
            if (r.value == "tss" || r.value == "TSS") tss = &r;
        }
        if (es && tss)
            checks.push_back({"TSS accuracy within 0.05 of ES", std::abs(es->accuracy - tss->accuracy) <= kTssEsTolerance,
                              "es:" + detail::fmt(es->accuracy) + " tss:" + detail::fmt(tss->accuracy)});
    }
    return checks;
}

inline std::vector<SweepRow> cmd_sweep(const RunConfig& base, SweepAxis axis, const std::vector<std::string>& values,
                                       const fs::path& out_dir, std::ostream& log, unsigned threads = 1) {
    const auto rows = run_sweep(base, axis, values, threads);
    const char* axis_name = axis == SweepAxis::Ew ? "ew" : axis == SweepAxis::MbSize ? "mb_size" : "algorithm";
    Json config = run_config_to_json(base);
    config["sweep"] = {{"axis", axis_name}, {"values", values}};
    detail::ensure_dir(out_dir);
    const std::string csv = sweep_csv(rows, axis_name, config);
    detail::write_text(out_dir / "sweep.csv", csv);
    Json checks = Json::array();
    for (const auto& c : sweep_property_checks(axis, rows))
        checks.push_back({{"property", c.name}, {"holds", c.holds}, {"detail", c.detail}});
    detail::write_text(out_dir / "checks.json", Json{{"tool", kToolName}, {"version", kToolVersion},
                                                     {"config", config}, {"checks", checks}}
                                                    .dump(2) +
                                                    "\n");
    log << csv;
    return rows;
}

}  // namespace euphrates
