#include <gtest/gtest.h>

#include "euphrates/socmodel.hpp"

using namespace euphrates;

namespace {

double saving(const SocConfig& cfg, int ew, std::size_t frames = 960) {
    return summarize(constant_schedule(frames, ew), cfg).saving();
}

}  // namespace

TEST(InferenceTime, NetworkPresets) {
    const auto yolo = SocConfig::for_network(yolov2_profile());
    EXPECT_NEAR(inference_time(yolo), 0.0589, 0.0001);
    auto raw = yolo;
    raw.nnx_utilization = 1.0;
    EXPECT_NEAR(inference_time(raw), 0.0495, 0.0001);
    const auto mdnet = SocConfig::for_network(mdnet_profile());
    EXPECT_NEAR(inference_time(mdnet), 0.0109, 0.0001);
    EXPECT_LT(inference_time(mdnet), 1.0 / 60);
}

TEST(AchievedFps, YoloWindows) {
    const auto cfg = SocConfig::for_network(yolov2_profile());
    EXPECT_NEAR(achieved_fps(cfg, 1), 17, 1);
    EXPECT_NEAR(achieved_fps(cfg, 2), 34.5, 1.5);
    EXPECT_DOUBLE_EQ(achieved_fps(cfg, 4), 60);
    EXPECT_DOUBLE_EQ(achieved_fps(SocConfig::for_network(mdnet_profile()), 1), 60);
    EXPECT_THROW(achieved_fps(cfg, 0), Error);
}

TEST(AchievedFps, NonDecreasingInEw) {
    for (const auto& net : {yolov2_profile(), tiny_yolo_profile(), mdnet_profile()}) {
        const auto cfg = SocConfig::for_network(net);
        for (int ew = 1; ew < 64; ++ew) EXPECT_LE(achieved_fps(cfg, ew), achieved_fps(cfg, ew + 1));
    }
}

TEST(FrameEnergy, Components) {
    const SocConfig cfg;
    const auto e = frame_energy(FrameKind::Extrapolation, cfg);
    EXPECT_NEAR(e.frontend, (180.0 + 153.0 * 1.025) / 60.0, 1e-12);
    EXPECT_NEAR(e.frontend, 5.614, 0.001);
    // 22.8 MB at 80 pJ/B on top of idle DRAM power.
    EXPECT_NEAR(e.dram - 230.0 / 60.0, 1.824, 1e-9);
    EXPECT_NEAR(e.backend, 2.2e-3, 1e-12);
    const auto i = frame_energy(FrameKind::Inference, cfg);
    EXPECT_NEAR(i.dram - 230.0 / 60.0, 646e6 * 80e-12 * 1e3, 1e-9);
    EXPECT_NEAR(i.backend, 651.0 * inference_time(cfg), 1e-12);
    EXPECT_NEAR(i.total(), i.frontend + i.dram + i.backend, 1e-12);
}

TEST(FrameEnergy, DegenerateFrameIsFrontendPlusIdle) {
    SocConfig cfg;
    cfg.eframe_traffic = 0;
    cfg.extrapolation_time = 0;
    const auto e = frame_energy(FrameKind::Extrapolation, cfg);
    EXPECT_DOUBLE_EQ(e.backend, 0);
    EXPECT_NEAR(e.total(), e.frontend + 230.0 / 60.0, 1e-12);
}

TEST(Summarize, YoloSavings) {
    const auto cfg = SocConfig::for_network(yolov2_profile());
    EXPECT_NEAR(saving(cfg, 1), 0.0, 1e-12);
    EXPECT_NEAR(saving(cfg, 2), 0.45, 0.05);
    EXPECT_NEAR(saving(cfg, 4), 0.66, 0.05);
}

TEST(Summarize, MdnetSavings) {
    const auto cfg = SocConfig::for_network(mdnet_profile());
    EXPECT_NEAR(saving(cfg, 2), 0.21, 0.05);
    EXPECT_NEAR(saving(cfg, 4), 0.31, 0.05);
    EXPECT_NEAR(saving(cfg, 32), 0.42, 0.05);
}

TEST(Summarize, EnergyNonIncreasingInEw) {
    for (const auto& net : {yolov2_profile(), tiny_yolo_profile(), mdnet_profile()}) {
        const auto cfg = SocConfig::for_network(net);
        double prev = summarize(constant_schedule(960, 1), cfg).total.total();
        for (int ew = 2; ew <= 64; ++ew) {
            const double e = summarize(constant_schedule(960, ew), cfg).total.total();
            EXPECT_LE(e, prev + 1e-9) << net.name << " ew " << ew;
            prev = e;
        }
    }
}

TEST(Summarize, LimitApproachesEFrameCost) {
    const auto cfg = SocConfig::for_network(yolov2_profile());
    const auto r = summarize(constant_schedule(100000, 100000), cfg);
    EXPECT_NEAR(r.per_frame.total(), frame_energy(FrameKind::Extrapolation, cfg).total(), 0.01);
}

TEST(Summarize, ComponentsSumToTotalAndCountsMatch) {
    const auto cfg = SocConfig::for_network(tiny_yolo_profile());
    const auto r = summarize(constant_schedule(101, 3), cfg);
    EXPECT_EQ(r.frames, 101u);
    EXPECT_EQ(r.inferences, 34u);
    EXPECT_NEAR(r.total.total(), r.per_frame.total() * 101, 1e-9);
    EXPECT_NEAR(r.inference_rate, 34.0 / 101, 1e-12);
    EXPECT_THROW(summarize(std::vector<FrameKind>{}, cfg), Error);
}

TEST(CpuExtrapolation, CostsAboutAsMuchAtEw8AsMcAtEw4) {
    auto cpu = SocConfig::for_network(yolov2_profile());
    cpu.cpu_extrapolation = true;
    const auto mc = SocConfig::for_network(yolov2_profile());
    const double ratio = summarize(constant_schedule(960, 8), cpu).total.total() /
                         summarize(constant_schedule(960, 4), mc).total.total();
    EXPECT_NEAR(ratio, 1.0, 0.05);
    EXPECT_GT(frame_energy(FrameKind::Extrapolation, cpu).backend,
              frame_energy(FrameKind::Extrapolation, mc).backend);
}

TEST(SocConfig, Validation) {
    SocConfig c;
    c.nnx_utilization = 0;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.extrapolation_time = 0.1;
    EXPECT_THROW(c.validate(), Error);
    EXPECT_THROW(network_profile("resnet"), Error);
    EXPECT_EQ(network_profile("mdnet").name, "mdnet");
}
