// euphrates: motion-extrapolated continuous vision simulator.
//
//   euphrates synth    --out DIR [--frames N --trajectory "U,V;U,V" ...]
//   euphrates estimate --frames DIR --out DIR [--mb-size N --search-range N --algo es|tss]
//   euphrates simulate --config PATH [--mode ew:N|adaptive ...] --out DIR
//   euphrates evaluate --trace PATH --ground-truth PATH --out DIR
//   euphrates sweep    --config PATH --axis ew|mb_size|algorithm --values a,b,c --out DIR
//
// On failure the last stderr line is "error <class>: <message>" and the exit
// status is nonzero.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "euphrates/commands.hpp"

namespace {

using namespace euphrates;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::pair<int, int> parse_pair(const std::string& s, char sep, const char* what) {
    const auto parts = split(s, sep);
    try {
        if (parts.size() == 2) return {std::stoi(parts[0]), std::stoi(parts[1])};
    } catch (const std::exception&) {
    }
    fail(ErrorKind::Config, std::string("invalid ") + what + " '" + s + "'");
}

Texture parse_texture(const std::string& s) {
    if (s == "flat") return Texture::Flat;
    if (s == "noise") return Texture::Noise;
    fail(ErrorKind::Config, "invalid texture '" + s + "' (expected flat|noise)");
}

// Flags shared by simulate and sweep; each overrides the config file field.
struct RunOverrides {
    std::string config;
    std::string mode;
    int mb_size = 0;
    int search_range = 0;
    std::string algo;
    long long seed = -1;
    std::string out;
    std::string frames;
    std::string motion;
    std::string detections;
    std::string ground_truth;
    std::string network;
    std::string scenario;

    void add_to(CLI::App& app) {
        app.add_option("--config", config, "Run configuration (JSON, or a trace whose header echoes one)");
        app.add_option("--mode", mode, "Extrapolation window: ew:N or adaptive");
        app.add_option("--mb-size", mb_size, "Macroblock edge L");
        app.add_option("--search-range", search_range, "Block-matching search range d");
        app.add_option("--algo", algo, "Block matching: es or tss");
        app.add_option("--seed", seed, "Seed for provider noise");
        app.add_option("--out", out, "Output directory");
        app.add_option("--frames", frames, "Frame directory (motion estimated on the fly)");
        app.add_option("--motion", motion, "Directory of .eumv motion metadata");
        app.add_option("--detections", detections, "Detection trace replayed as inference output");
        app.add_option("--ground-truth", ground_truth, "Ground-truth trace (sweep accuracy)");
        app.add_option("--network", network, "Network preset: yolov2, tiny_yolo, mdnet");
        app.add_option("--scenario", scenario, "detection or tracking");
    }

    RunConfig resolve() const {
        RunConfig c = config.empty() ? RunConfig{} : load_run_config(config);
        if (!mode.empty()) parse_mode(mode, c.pipeline);
        if (mb_size) c.motion.mb_size = mb_size;
        if (search_range) c.motion.search_range = search_range;
        if (!algo.empty()) c.motion.algorithm = parse_search_algorithm(algo);
        if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
        if (!out.empty()) c.out_dir = out;
        if (!frames.empty()) {
            c.frames_dir = frames;
            c.motion_dir.clear();
        }
        if (!motion.empty()) {
            c.motion_dir = motion;
            c.frames_dir.clear();
        }
        if (!detections.empty()) c.detections = detections;
        if (!ground_truth.empty()) c.ground_truth = ground_truth;
        if (!network.empty()) c.soc.apply(network_profile(network));
        if (!scenario.empty()) c.pipeline.scenario = parse_scenario(scenario);
        return c;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"Motion-extrapolated continuous vision simulator"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);
    const unsigned threads = thread_budget();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic sequence with ground truth");
    SyntheticSpec spec;
    std::string canvas = "128x128", object = "32x16", start = "16,16", trajectory = "2,1";
    std::string background = "flat", texture = "noise", synth_out;
    synth->add_option("--canvas", canvas, "Canvas WxH")->capture_default_str();
    synth->add_option("--object", object, "Object WxH")->capture_default_str();
    synth->add_option("--start", start, "Object top-left X,Y")->capture_default_str();
    synth->add_option("--trajectory", trajectory, "Per-frame displacements 'U,V;U,V;...' applied cyclically")
        ->capture_default_str();
    synth->add_option("--frames", spec.frame_count, "Frame count")->capture_default_str();
    synth->add_option("--seed", spec.seed, "Texture seed")->capture_default_str();
    synth->add_option("--background", background, "flat or noise")->capture_default_str();
    synth->add_option("--object-texture", texture, "flat or noise")->capture_default_str();
    synth->add_option("--out", synth_out, "Output directory")->required();

    // estimate
    auto* estimate = app.add_subcommand("estimate", "Compute motion metadata for a frame directory");
    EstimateOptions est;
    std::string est_frames, est_out, est_algo = "es";
    estimate->add_option("--frames", est_frames, "Frame directory")->required();
    estimate->add_option("--mb-size", est.params.mb_size, "Macroblock edge L")->capture_default_str();
    estimate->add_option("--search-range", est.params.search_range, "Search range d")->capture_default_str();
    estimate->add_option("--algo", est_algo, "es or tss")->capture_default_str();
    estimate->add_option("--out", est_out, "Output directory")->required();
    std::string est_raw;
    estimate->add_option("--raw-dims", est_raw, "WxH for headerless .y8/.raw frames");

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "Run the I/E-frame pipeline and the energy model");
    RunOverrides sim;
    sim.add_to(*simulate_cmd);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "AP and success-rate curves of a trace against ground truth");
    EvaluateOptions ev;
    std::string ev_trace, ev_gt, ev_out, ev_metric = "both";
    double t_start = 0.0, t_stop = 1.0, t_step = 0.05;
    evaluate->add_option("--trace", ev_trace, "Result or detection trace")->required();
    evaluate->add_option("--ground-truth", ev_gt, "Ground-truth trace")->required();
    evaluate->add_option("--metric", ev_metric, "ap, success or both")->capture_default_str();
    evaluate->add_option("--threshold-start", t_start)->capture_default_str();
    evaluate->add_option("--threshold-stop", t_stop)->capture_default_str();
    evaluate->add_option("--threshold-step", t_step)->capture_default_str();
    evaluate->add_option("--out", ev_out, "Output directory for CSV and summary");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Simulate + evaluate across one parameter axis");
    RunOverrides sw;
    sw.add_to(*sweep);
    std::string axis, values;
    sweep->add_option("--axis", axis, "ew, mb_size or algorithm")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code != 0) std::cerr << "error usage: " << e.what() << "\n";
        return code;
    }

    if (synth->parsed()) {
        std::tie(spec.canvas_width, spec.canvas_height) = parse_pair(canvas, 'x', "canvas");
        std::tie(spec.object_width, spec.object_height) = parse_pair(object, 'x', "object");
        std::tie(spec.start_x, spec.start_y) = parse_pair(start, ',', "start");
        for (const auto& step : split(trajectory, ';')) {
            auto [dx, dy] = parse_pair(step, ',', "trajectory step");
            spec.trajectory.push_back({dx, dy});
        }
        spec.background = parse_texture(background);
        spec.object_texture = parse_texture(texture);
        cmd_synth(spec, synth_out, std::cout);
    } else if (estimate->parsed()) {
        est.frames_dir = est_frames;
        est.out_dir = est_out;
        est.params.algorithm = parse_search_algorithm(est_algo);
        est.threads = threads;
        if (!est_raw.empty()) {
            auto [w, h] = parse_pair(est_raw, 'x', "raw dims");
            est.raw_dims = RawDims{w, h};
        }
        cmd_estimate(est, std::cout);
    } else if (simulate_cmd->parsed()) {
        cmd_simulate(sim.resolve(), std::cout, threads);
    } else if (evaluate->parsed()) {
        ev.trace = ev_trace;
        ev.ground_truth = ev_gt;
        ev.out_dir = ev_out;
        if (ev_metric == "ap")
            ev.metric = MetricKind::AveragePrecision;
        else if (ev_metric == "success")
            ev.metric = MetricKind::SuccessRate;
        else if (ev_metric == "both")
            ev.metric = MetricKind::Both;
        else
            fail(ErrorKind::Config, "invalid metric '" + ev_metric + "' (expected ap|success|both)");
        if (!(t_step > 0)) fail(ErrorKind::Config, "threshold step must be positive");
        ev.thresholds.clear();
        for (int i = 0;; ++i) {
            const double t = t_start + i * t_step;
            if (t > t_stop + 1e-9) break;
            ev.thresholds.push_back(std::min(t, 1.0));
        }
        cmd_evaluate(ev, std::cout, std::cerr);
    } else if (sweep->parsed()) {
        const RunConfig base = sw.resolve();
        cmd_sweep(base, parse_sweep_axis(axis), split(values, ','), base.out_dir, std::cout, threads);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const euphrates::Error& e) {
        std::cerr << "error " << euphrates::to_string(e.kind()) << ": " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error internal: " << e.what() << "\n";
    }
    return 1;
}
