#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "euphrates/commands.hpp"
#include "test_util.hpp"

using namespace euphrates;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::size_t count_files(const fs::path& dir, const char* ext) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
    return n;
}

// synth output: dir/frames/*.pgm and dir/ground_truth.jsonl.
SyntheticSequence make_synth(const fs::path& dir, int frames = 10) {
    SyntheticSpec spec;
    spec.trajectory = {{2, 1}, {-2, -1}};
    spec.frame_count = frames;
    std::ostringstream log;
    return cmd_synth(spec, dir, log);
}

RunConfig base_config(const fs::path& dir) {
    RunConfig c;
    c.frames_dir = (dir / "frames").string();
    c.detections = (dir / "ground_truth.jsonl").string();
    c.ground_truth = c.detections;
    c.out_dir = (dir / "out").string();
    return c;
}

}  // namespace

TEST(Synth, WritesFramesAndTrace) {
    test_util::TempDir dir;
    make_synth(dir.path());
    EXPECT_EQ(count_files(dir.path() / "frames", ".pgm"), 10u);
    const auto gt = read_detection_trace(dir.path() / "ground_truth.jsonl");
    EXPECT_EQ(gt.size(), 10u);
    // Header line plus one record per frame.
    EXPECT_EQ(count_lines(slurp(dir.path() / "ground_truth.jsonl")), 11u);
}

TEST(Estimate, OneFilePerPairWithCodecSize) {
    test_util::TempDir dir;
    make_synth(dir.path());
    EstimateOptions opt;
    opt.frames_dir = dir.path() / "frames";
    opt.out_dir = dir.path() / "mv";
    std::ostringstream log;
    const auto s = cmd_estimate(opt, log);
    EXPECT_EQ(s.files, 9u);
    EXPECT_EQ(count_files(opt.out_dir, ".eumv"), 9u);
    for (int t = 1; t <= 9; ++t)
        EXPECT_EQ(fs::file_size(opt.out_dir / detail::frame_file_name(t, ".eumv")), 18u + 5u * 64u);
    EXPECT_FALSE(fs::exists(opt.out_dir / "000000.eumv"));
}

TEST(Estimate, IdenticalFramesGiveZeroVectors) {
    test_util::TempDir dir;
    fs::create_directories(dir.path() / "f");
    const Frame f(48, 32, std::uint8_t{77});
    save_frame(dir.path() / "f/0.pgm", f, FrameFormat::Pgm);
    save_frame(dir.path() / "f/1.pgm", f, FrameFormat::Pgm);
    EstimateOptions opt;
    opt.frames_dir = dir.path() / "f";
    opt.out_dir = dir.path() / "mv";
    std::ostringstream log;
    cmd_estimate(opt, log);
    const MotionField field = load_metadata(opt.out_dir / "000001.eumv");
    for (const auto& b : field.blocks()) EXPECT_EQ(b.mv, (MotionVector{0, 0}));
}

TEST(Estimate, MixedDimensionsNameTheFile) {
    test_util::TempDir dir;
    fs::create_directories(dir.path() / "f");
    save_frame(dir.path() / "f/0.pgm", Frame(32, 32, std::uint8_t{0}), FrameFormat::Pgm);
    save_frame(dir.path() / "f/1.pgm", Frame(16, 32, std::uint8_t{0}), FrameFormat::Pgm);
    EstimateOptions opt;
    opt.frames_dir = dir.path() / "f";
    opt.out_dir = dir.path() / "mv";
    std::ostringstream log;
    try {
        cmd_estimate(opt, log);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Dimension);
        EXPECT_NE(std::string(e.what()).find("1.pgm"), std::string::npos);
    }
}

TEST(Simulate, EwOneIsBaseline) {
    test_util::TempDir dir;
    const auto seq = make_synth(dir.path());
    auto cfg = base_config(dir.path());
    std::ostringstream log;
    const auto out = cmd_simulate(cfg, log);
    EXPECT_NEAR(out.energy.saving(), 0.0, 1e-12);
    const auto boxes = out.trace.boxes();
    for (std::size_t t = 0; t < boxes.size(); ++t) {
        ASSERT_EQ(boxes[t].size(), 1u);
        EXPECT_EQ(boxes[t][0], seq.ground_truth[t]);
    }
    for (const char* f : {"trace.jsonl", "energy.json", "energy.csv", "config.json"})
        EXPECT_TRUE(fs::exists(dir.path() / "out" / f)) << f;
}

TEST(Simulate, EwFourSavesAboutTwoThirds) {
    test_util::TempDir dir;
    make_synth(dir.path(), 40);
    auto cfg = base_config(dir.path());
    parse_mode("ew:4", cfg.pipeline);
    const auto out = simulate(cfg);
    EXPECT_EQ(out.energy.inferences, 10u);
    EXPECT_NEAR(out.energy.saving(), 0.66, 0.05);
}

TEST(Simulate, MetadataDirEqualsFrameDir) {
    test_util::TempDir dir;
    make_synth(dir.path());
    EstimateOptions opt;
    opt.frames_dir = dir.path() / "frames";
    opt.out_dir = dir.path() / "mv";
    std::ostringstream log;
    cmd_estimate(opt, log);
    auto a = base_config(dir.path());
    parse_mode("ew:4", a.pipeline);
    auto b = a;
    b.frames_dir.clear();
    b.motion_dir = opt.out_dir.string();
    EXPECT_EQ(serialize_result_trace(simulate(a).trace, Json::object()),
              serialize_result_trace(simulate(b).trace, Json::object()));
}

TEST(Simulate, RerunsAreByteIdenticalAndReproducibleFromEcho) {
    test_util::TempDir dir;
    make_synth(dir.path());
    auto cfg = base_config(dir.path());
    parse_mode("adaptive", cfg.pipeline);
    cfg.provider_noise = 1.0;
    cfg.seed = 7;
    std::ostringstream log;
    cmd_simulate(cfg, log, 1);
    const std::string first = slurp(dir.path() / "out/trace.jsonl");
    const std::string energy = slurp(dir.path() / "out/energy.csv");
    cmd_simulate(cfg, log, 4);
    EXPECT_EQ(slurp(dir.path() / "out/trace.jsonl"), first);
    EXPECT_EQ(slurp(dir.path() / "out/energy.csv"), energy);

    // The trace header alone is enough to reproduce the run.
    const RunConfig echoed = load_run_config(dir.path() / "out/trace.jsonl");
    cmd_simulate(echoed, log);
    EXPECT_EQ(slurp(dir.path() / "out/trace.jsonl"), first);
    const RunConfig from_json = load_run_config(dir.path() / "out/config.json");
    EXPECT_EQ(run_config_to_json(from_json), run_config_to_json(cfg));
}

TEST(Simulate, EnergyCsvLayout) {
    test_util::TempDir dir;
    make_synth(dir.path());
    std::ostringstream log;
    cmd_simulate(base_config(dir.path()), log);
    std::istringstream csv(slurp(dir.path() / "out/energy.csv"));
    std::string line;
    std::vector<std::string> body;
    while (std::getline(csv, line))
        if (!line.starts_with("#")) body.push_back(line);
    ASSERT_EQ(body.size(), 5u);
    EXPECT_EQ(body[0], "component,mj,percent");
    EXPECT_TRUE(body[4].starts_with("total,"));
}

TEST(Config, RejectsUnknownKeysAndBadModes) {
    test_util::TempDir dir;
    {
        std::ofstream(dir.path() / "c.json") << R"({"mode": "ew:2", "bogus": 1})";
    }
    EXPECT_THROW(load_run_config(dir.path() / "c.json"), Error);
    {
        std::ofstream(dir.path() / "c.json") << R"({"soc": {"nnx_powr": 1}})";
    }
    EXPECT_THROW(load_run_config(dir.path() / "c.json"), Error);
    PipelineConfig p;
    EXPECT_THROW(parse_mode("ew:0", p), Error);
    EXPECT_THROW(parse_mode("fixed", p), Error);
    parse_mode("ew:8", p);
    EXPECT_EQ(p.constant_ew, 8);
}

TEST(Evaluate, IdentityTraceScoresOne) {
    test_util::TempDir dir;
    make_synth(dir.path());
    EvaluateOptions opt;
    opt.trace = dir.path() / "ground_truth.jsonl";
    opt.ground_truth = opt.trace;
    opt.out_dir = dir.path() / "eval";
    std::ostringstream log, warn;
    const auto s = cmd_evaluate(opt, log, warn);
    EXPECT_TRUE(warn.str().empty());
    for (const auto& p : s.ap) EXPECT_DOUBLE_EQ(p.value, p.threshold < 1.0 ? 1.0 : 0.0);
    EXPECT_EQ(count_lines(slurp(opt.out_dir / "ap.csv")), 22u);
    EXPECT_EQ(count_lines(slurp(opt.out_dir / "success.csv")), 22u);
    EXPECT_TRUE(fs::exists(opt.out_dir / "summary.json"));
}

TEST(Evaluate, ResultTraceOfSimulation) {
    test_util::TempDir dir;
    make_synth(dir.path());
    std::ostringstream log, warn;
    cmd_simulate(base_config(dir.path()), log);
    EvaluateOptions opt;
    opt.trace = dir.path() / "out/trace.jsonl";
    opt.ground_truth = dir.path() / "ground_truth.jsonl";
    const auto s = cmd_evaluate(opt, log, warn);
    EXPECT_DOUBLE_EQ(s.ap[10].value, 1.0);
}

TEST(Evaluate, EmptyTraceWarnsAndScoresZero) {
    test_util::TempDir dir;
    make_synth(dir.path());
    { std::ofstream(dir.path() / "empty.jsonl"); }
    EvaluateOptions opt;
    opt.trace = dir.path() / "empty.jsonl";
    opt.ground_truth = dir.path() / "ground_truth.jsonl";
    std::ostringstream log, warn;
    const auto s = cmd_evaluate(opt, log, warn);
    EXPECT_NE(warn.str().find("warning"), std::string::npos);
    for (const auto& p : s.ap) EXPECT_DOUBLE_EQ(p.value, 0.0);
}

TEST(Evaluate, FrameMismatchIsDimensionError) {
    DetectionTrace a, b;
    a[0] = {Roi{0, 0, 1, 1}};
    b[1] = {Roi{0, 0, 1, 1}};
    const auto t = default_thresholds();
    try {
        evaluate_traces(a, b, t, MetricKind::Both);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Dimension);
    }
}

TEST(Sweep, EwAxisSixRowsMonotoneEnergy) {
    test_util::TempDir dir;
    make_synth(dir.path(), 64);
    std::ostringstream log;
    const auto rows =
        cmd_sweep(base_config(dir.path()), SweepAxis::Ew, {"1", "2", "4", "8", "16", "32"}, dir.path() / "sw", log, 4);
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GE(rows[i].energy_saving, rows[i - 1].energy_saving);
    EXPECT_TRUE(fs::exists(dir.path() / "sw/checks.json"));
    std::size_t data_rows = 0;
    std::istringstream csv(slurp(dir.path() / "sw/sweep.csv"));
    for (std::string line; std::getline(csv, line);) data_rows += !line.starts_with("#");
    EXPECT_EQ(data_rows, 7u);
}

TEST(Sweep, MbSizeAndAlgorithmAxes) {
    test_util::TempDir dir;
    make_synth(dir.path(), 20);
    auto base = base_config(dir.path());
    parse_mode("ew:4", base.pipeline);
    const auto mb = run_sweep(base, SweepAxis::MbSize, {"4", "8", "16", "32", "64", "128"}, 4);
    ASSERT_EQ(mb.size(), 6u);
    EXPECT_EQ(mb[2].value, "16");
    const auto algo = run_sweep(base, SweepAxis::Algorithm, {"es", "tss"}, 2);
    ASSERT_EQ(algo.size(), 2u);
    const auto checks = sweep_property_checks(SweepAxis::Algorithm, algo);
    ASSERT_EQ(checks.size(), 1u);
    base.frames_dir.clear();
    base.motion_dir = (dir.path() / "frames").string();
    EXPECT_THROW(run_sweep(base, SweepAxis::MbSize, {"8"}), Error);
}

#ifdef EUPHRATES_CLI_PATH
namespace {

struct CliResult {
    int status;
    std::string err;
};

CliResult run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path err = scratch / "stderr.txt";
    const std::string cmd = std::string("\"") + EUPHRATES_CLI_PATH + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
    const int rc = std::system(cmd.c_str());
    return {WIFEXITED(rc) ? WEXITSTATUS(rc) : -1, slurp(err)};
}

}  // namespace

TEST(Cli, EndToEnd) {
    test_util::TempDir dir;
    const std::string d = dir.path().string();
    ASSERT_EQ(run_cli("synth --out " + d + "/s --frames 12 --trajectory '2,1;-2,-1'", dir.path()).status, 0);
    ASSERT_EQ(run_cli("estimate --frames " + d + "/s/frames --out " + d + "/mv", dir.path()).status, 0);
    EXPECT_EQ(count_files(dir.path() / "mv", ".eumv"), 11u);
    ASSERT_EQ(run_cli("simulate --motion " + d + "/mv --detections " + d + "/s/ground_truth.jsonl --mode ew:2 --out " +
                          d + "/sim",
                      dir.path())
                  .status,
              0);
    ASSERT_EQ(run_cli("evaluate --trace " + d + "/sim/trace.jsonl --ground-truth " + d +
                          "/s/ground_truth.jsonl --out " + d + "/ev",
                      dir.path())
                  .status,
              0);
    EXPECT_TRUE(fs::exists(dir.path() / "ev/ap.csv"));
}

TEST(Cli, ErrorsCarryTheirClass) {
    test_util::TempDir dir;
    const std::string d = dir.path().string();
    fs::create_directories(dir.path() / "f");
    save_frame(dir.path() / "f/0.pgm", Frame(32, 32, std::uint8_t{0}), FrameFormat::Pgm);
    save_frame(dir.path() / "f/1.pgm", Frame(16, 32, std::uint8_t{0}), FrameFormat::Pgm);
    auto r = run_cli("estimate --frames " + d + "/f --out " + d + "/mv", dir.path());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("error dimension_error:"), std::string::npos) << r.err;

    r = run_cli("simulate --mode sometimes --out " + d + "/x", dir.path());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("error config_error:"), std::string::npos) << r.err;

    r = run_cli("estimate --frames " + d + "/nope --out " + d + "/mv", dir.path());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.err.find("error io_error:"), std::string::npos) << r.err;

    EXPECT_NE(run_cli("frobnicate", dir.path()).status, 0);
}
#endif
