#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "euphrates/frame.hpp"
#include "euphrates/synthetic.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace euphrates;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected an euphrates::Error";
    return ErrorKind::Io;
}

}  // namespace

TEST(Pgm, DecodesTinyRaster) {
    auto bytes = bytes_of("P5\n2 2\n255\n");
    for (int v : {0, 128, 255, 7}) bytes.push_back(static_cast<std::uint8_t>(v));
    const Frame f = decode_pgm(bytes);
    EXPECT_EQ(f.width(), 2);
    EXPECT_EQ(f.height(), 2);
    EXPECT_EQ(f.at(0, 0), 0);
    EXPECT_EQ(f.at(1, 0), 128);
    EXPECT_EQ(f.at(0, 1), 255);
    EXPECT_EQ(f.at(1, 1), 7);
}

TEST(Pgm, SkipsHeaderComments) {
    auto bytes = bytes_of("P5\n# made by hand\n1 1 # trailing\n255\n");
    bytes.push_back(42);
    EXPECT_EQ(decode_pgm(bytes).at(0, 0), 42);
}

TEST(Pgm, RejectsMalformedHeaders) {
    EXPECT_EQ(kind_of([] { decode_pgm(bytes_of("P2\n1 1\n255\n\x01")); }), ErrorKind::Format);
    EXPECT_EQ(kind_of([] { decode_pgm(bytes_of("P5\n1 1\n65535\n\x01\x02")); }), ErrorKind::Format);
    EXPECT_EQ(kind_of([] { decode_pgm(bytes_of("P5\nx 1\n255\n")); }), ErrorKind::Format);
    EXPECT_EQ(kind_of([] { decode_pgm(bytes_of("P5\n2 2\n255\n\x01")); }), ErrorKind::Dimension);
}

TEST(RawY8, DecodesDeclaredDims) {
    const std::vector<std::uint8_t> zeros(4096, 0);
    const Frame f = decode_raw(zeros, {64, 64});
    EXPECT_EQ(f.width(), 64);
    EXPECT_EQ(f.height(), 64);
    for (auto p : f.data()) EXPECT_EQ(p, 0);
}

TEST(RawY8, ShortPayloadIsSizeMismatch) {
    const std::vector<std::uint8_t> short_payload(4095, 0);
    EXPECT_EQ(kind_of([&] { decode_raw(short_payload, {64, 64}); }), ErrorKind::Dimension);
}

TEST(FrameIo, RoundTripsBothFormats) {
    test_util::TempDir dir;
    const Frame f = oracle::random_frame(37, 21, 5);
    save_frame(dir.path() / "a.pgm", f, FrameFormat::Pgm);
    save_frame(dir.path() / "a.y8", f, FrameFormat::RawY8);
    EXPECT_EQ(load_frame(dir.path() / "a.pgm", FrameFormat::Pgm), f);
    EXPECT_EQ(load_frame(dir.path() / "a.y8", FrameFormat::RawY8, RawDims{37, 21}), f);
    EXPECT_EQ(kind_of([&] { load_frame(dir.path() / "a.y8", FrameFormat::RawY8); }), ErrorKind::Format);
}

TEST(FrameIo, SequenceIsOrderedNumerically) {
    test_util::TempDir dir;
    for (int i : {10, 2, 1}) save_frame(dir.path() / (std::to_string(i) + ".pgm"), Frame(4, 4, std::uint8_t(i)),
                                        FrameFormat::Pgm);
    const auto frames = load_frame_sequence(dir.path());
    ASSERT_EQ(frames.size(), 3u);
    EXPECT_EQ(frames[0].at(0, 0), 1);
    EXPECT_EQ(frames[1].at(0, 0), 2);
    EXPECT_EQ(frames[2].at(0, 0), 10);
}

TEST(FrameIo, MixedDimsNameTheOffendingFile) {
    test_util::TempDir dir;
    save_frame(dir.path() / "000000.pgm", Frame(8, 8, std::uint8_t{0}), FrameFormat::Pgm);
    save_frame(dir.path() / "000001.pgm", Frame(8, 4, std::uint8_t{0}), FrameFormat::Pgm);
    try {
        load_frame_sequence(dir.path());
        FAIL() << "expected a dimension error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Dimension);
        EXPECT_NE(std::string(e.what()).find("000001.pgm"), std::string::npos);
    }
}

TEST(Synthetic, ConstantVelocityGroundTruth) {
    SyntheticSpec spec;
    spec.trajectory = {{2, 1}};
    spec.frame_count = 8;
    const auto seq = generate_sequence(spec);
    ASSERT_EQ(seq.frames.size(), 8u);
    for (int t = 0; t < 8; ++t) {
        EXPECT_DOUBLE_EQ(seq.ground_truth[t].x, 16 + 2 * t);
        EXPECT_DOUBLE_EQ(seq.ground_truth[t].y, 16 + t);
        EXPECT_DOUBLE_EQ(seq.ground_truth[t].w, 32);
        EXPECT_DOUBLE_EQ(seq.ground_truth[t].h, 16);
    }
    // Object content is carried unchanged by the displacement.
    for (int t = 1; t < 8; ++t)
        for (int oy = 0; oy < 16; ++oy)
            for (int ox = 0; ox < 32; ++ox)
                ASSERT_EQ(seq.frames[t].at(16 + 2 * t + ox, 16 + t + oy),
                          seq.frames[0].at(16 + ox, 16 + oy));
}

TEST(Synthetic, EmptyTrajectoryIsStatic) {
    SyntheticSpec spec;
    const auto seq = generate_sequence(spec);
    for (const auto& f : seq.frames) EXPECT_EQ(f, seq.frames.front());
}

TEST(Synthetic, DeterministicPerSeed) {
    SyntheticSpec spec;
    spec.trajectory = {{1, 0}};
    spec.background = Texture::Noise;
    EXPECT_EQ(generate_sequence(spec).frames, generate_sequence(spec).frames);
    SyntheticSpec other = spec;
    other.seed = 2;
    EXPECT_NE(generate_sequence(spec).frames.front(), generate_sequence(other).frames.front());
}

TEST(Synthetic, LeavingTheCanvasIsARangeError) {
    SyntheticSpec spec;
    spec.trajectory = {{20, 0}};
    EXPECT_EQ(kind_of([&] { generate_sequence(spec); }), ErrorKind::Range);
}
