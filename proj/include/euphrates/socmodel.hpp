#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "euphrates/error.hpp"
#include "euphrates/scheduler.hpp"

namespace euphrates {

/// Per-inference cost of a network on the accelerator.
struct NetworkProfile {
    std::string name;
    double gop_per_inference = 0;  // GOPS at 60 FPS / 60
    double iframe_traffic = 0;     // bytes moved per I-frame
};

// Throughput numbers are the networks' 60 FPS GOPS figures divided by 60.
// YOLOv2's traffic is the measured 646 MB; the other two are calibrated
// (see README, "Energy model").
inline NetworkProfile yolov2_profile() { return {"yolov2", 3423.0 / 60.0, 646e6}; }
inline NetworkProfile tiny_yolo_profile() { return {"tiny_yolo", 675.0 / 60.0, 50e6}; }
inline NetworkProfile mdnet_profile() { return {"mdnet", 635.0 / 60.0, 38e6}; }

inline NetworkProfile network_profile(std::string_view name) {
    if (name == "yolov2") return yolov2_profile();
    if (name == "tiny_yolo") return tiny_yolo_profile();
    if (name == "mdnet") return mdnet_profile();
    fail(ErrorKind::Config, "unknown network '" + std::string(name) + "' (expected yolov2|tiny_yolo|mdnet)");
}

/// Analytical SoC model. Powers in mW, times in seconds, traffic in bytes.
struct SocConfig {
    double sensor_power = 180.0;
    double isp_power = 153.0 * 1.025;  // measured ISP plus motion-estimation overhead
    double nnx_power = 651.0;
    double nnx_peak_tops = 1.152;
    double nnx_utilization = 0.84;
    double mc_power = 2.2;
    double mc_idle_power = 0.0;
    double dram_idle_power = 230.0;
    double dram_energy_per_byte_pj = 80.0;
    double capture_fps = 60.0;
    double iframe_traffic = 646e6;
    double eframe_traffic = 22.8e6;
    double net_gop = 3423.0 / 60.0;
    std::string network = "yolov2";
    double extrapolation_time = 1e-3;  // motion controller, per E-frame
    bool cpu_extrapolation = false;
    double cpu_power = 3000.0;
    double cpu_extrapolation_time = 4e-3;

    static SocConfig for_network(const NetworkProfile& net) {
        SocConfig c;
        c.apply(net);
        return c;
    }

    void apply(const NetworkProfile& net) {
        network = net.name;
        net_gop = net.gop_per_inference;
        iframe_traffic = net.iframe_traffic;
    }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0)) fail(ErrorKind::Config, std::string("soc ") + name + " must be positive");
        };
        auto non_negative = [](double v, const char* name) {
            if (!(v >= 0)) fail(ErrorKind::Config, std::string("soc ") + name + " must be non-negative");
        };
        positive(sensor_power, "sensor_power");
        positive(isp_power, "isp_power");
        positive(nnx_power, "nnx_power");
        positive(nnx_peak_tops, "nnx_peak_tops");
        positive(mc_power, "mc_power");
        positive(dram_idle_power, "dram_idle_power");
        positive(dram_energy_per_byte_pj, "dram_energy_per_byte_pj");
        positive(capture_fps, "capture_fps");
        positive(net_gop, "net_gop");
        positive(cpu_power, "cpu_power");
        non_negative(mc_idle_power, "mc_idle_power");
        non_negative(iframe_traffic, "iframe_traffic");
        non_negative(eframe_traffic, "eframe_traffic");
        non_negative(extrapolation_time, "extrapolation_time");
        non_negative(cpu_extrapolation_time, "cpu_extrapolation_time");
        if (!(nnx_utilization > 0 && nnx_utilization <= 1))
            fail(ErrorKind::Config, "soc nnx_utilization must lie in (0, 1]");
        if (extrapolation_time > 1.0 / capture_fps)
            fail(ErrorKind::Config, "soc extrapolation_time exceeds one capture period");
    }

    friend bool operator==(const SocConfig&, const SocConfig&) = default;
};

/// Seconds per CNN inference at the sustained accelerator throughput.
inline double inference_time(const SocConfig& cfg) {
    return cfg.net_gop / (cfg.nnx_peak_tops * 1e3 * cfg.nnx_utilization);
}

/// Seconds of backend work per E-frame.
inline double extrapolation_time(const SocConfig& cfg) {
    return cfg.cpu_extrapolation ? cfg.cpu_extrapolation_time : cfg.extrapolation_time;
}

/// Sustained frame rate of a constant window: ew frames per (one inference
/// plus ew-1 extrapolations), capped by the capture rate.
inline double achieved_fps(const SocConfig& cfg, int ew) {
    if (ew < 1) fail(ErrorKind::Range, "EW must be >= 1");
    const double busy = inference_time(cfg) + (ew - 1) * extrapolation_time(cfg);
    return std::min(cfg.capture_fps, ew / busy);
}

/// Energy of one frame in mJ, split the way the pipeline is laid out.
struct EnergyBreakdown {
    double frontend = 0;  // sensor + ISP
    double dram = 0;
    double backend = 0;   // accelerator + motion controller (or CPU)

    double total() const noexcept { return frontend + dram + backend; }

    EnergyBreakdown& operator+=(const EnergyBreakdown& o) {
        frontend += o.frontend;
        dram += o.dram;
        backend += o.backend;
        return *this;
    }
};

inline EnergyBreakdown frame_energy(FrameKind kind, const SocConfig& cfg) {
    // mW * s = mJ; bytes * pJ/B * 1e-9 = mJ.
    const double period = 1.0 / cfg.capture_fps;
    EnergyBreakdown e;
    e.frontend = (cfg.sensor_power + cfg.isp_power) * period;
    const double traffic = kind == FrameKind::Inference ? cfg.iframe_traffic : cfg.eframe_traffic;
    e.dram = cfg.dram_idle_power * period + traffic * cfg.dram_energy_per_byte_pj * 1e-9;
    if (kind == FrameKind::Inference) {
        e.backend = cfg.nnx_power * inference_time(cfg) + cfg.mc_idle_power * period;
    } else {
        e.backend = cfg.cpu_extrapolation ? cfg.cpu_power * cfg.cpu_extrapolation_time
                                          : cfg.mc_power * cfg.extrapolation_time;
    }
    return e;
}

struct EnergyReport {
    std::size_t frames = 0;
    std::size_t inferences = 0;
    EnergyBreakdown total;           // mJ over the trace
    EnergyBreakdown per_frame;       // mJ per captured frame
    EnergyBreakdown baseline_total;  // same trace length, every frame inferred
    double achieved_fps = 0;
    double baseline_fps = 0;
    double inference_rate = 0;

    double saving() const noexcept {
        return baseline_total.total() > 0 ? 1.0 - total.total() / baseline_total.total() : 0.0;
    }
};

inline EnergyReport summarize(std::span<const FrameKind> kinds, const SocConfig& cfg) {
    cfg.validate();
    if (kinds.empty()) fail(ErrorKind::Range, "cannot summarize an empty trace");
    EnergyReport r;
    r.frames = kinds.size();
    const EnergyBreakdown i_frame = frame_energy(FrameKind::Inference, cfg);
    const EnergyBreakdown e_frame = frame_energy(FrameKind::Extrapolation, cfg);
    for (FrameKind k : kinds) {
        if (k == FrameKind::Inference) {
            ++r.inferences;
            r.total += i_frame;
        } else {
            r.total += e_frame;
        }
        r.baseline_total += i_frame;
    }
    const double n = static_cast<double>(r.frames);
    r.per_frame = {r.total.frontend / n, r.total.dram / n, r.total.backend / n};
    r.inference_rate = static_cast<double>(r.inferences) / n;
    const double busy = static_cast<double>(r.inferences) * inference_time(cfg) +
                        static_cast<double>(r.frames - r.inferences) * extrapolation_time(cfg);
    r.achieved_fps = busy > 0 ? std::min(cfg.capture_fps, n / busy) : cfg.capture_fps;
    r.baseline_fps = achieved_fps(cfg, 1);
    return r;
}

inline EnergyReport summarize(const ResultTrace& trace, const SocConfig& cfg) {
    const auto kinds = trace.kinds();
    return summarize(kinds, cfg);
}

/// Frame kinds of a constant-window schedule of length n.
inline std::vector<FrameKind> constant_schedule(std::size_t n, int ew) {
    if (ew < 1) fail(ErrorKind::Range, "EW must be >= 1");
    std::vector<FrameKind> k(n, FrameKind::Extrapolation);
    for (std::size_t t = 0; t < n; t += static_cast<std::size_t>(ew)) k[t] = FrameKind::Inference;
    return k;
}

}  // namespace euphrates
