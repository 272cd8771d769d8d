#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "euphrates/error.hpp"
#include "euphrates/frame.hpp"
#include "euphrates/roi.hpp"

namespace euphrates {

struct Displacement {
    int dx = 0;
    int dy = 0;
    friend bool operator==(const Displacement&, const Displacement&) = default;
};

enum class Texture { Flat, Noise };

/// Stand-in for a captured video: one textured object moving over a static
/// background. trajectory[(t-1) % n] moves the object from frame t-1 to t;
/// an empty trajectory means a static scene.
struct SyntheticSpec {
    int canvas_width = 128;
    int canvas_height = 128;
    int object_width = 32;
    int object_height = 16;
    int start_x = 16;
    int start_y = 16;
    std::vector<Displacement> trajectory;
    std::uint64_t seed = 1;
    Texture background = Texture::Flat;
    Texture object_texture = Texture::Noise;
    int frame_count = 10;
    std::uint8_t background_level = 96;
    std::uint8_t object_level = 200;
};

struct SyntheticSequence {
    std::vector<Frame> frames;
    std::vector<Roi> ground_truth;
};

inline Displacement trajectory_step(const SyntheticSpec& spec, int t) {
    if (spec.trajectory.empty() || t <= 0) return {};
    return spec.trajectory[static_cast<std::size_t>(t - 1) % spec.trajectory.size()];
}

inline SyntheticSequence generate_sequence(const SyntheticSpec& spec) {
    if (spec.canvas_width <= 0 || spec.canvas_height <= 0)
        fail(ErrorKind::Config, "synthetic canvas must be non-empty");
    if (spec.object_width <= 0 || spec.object_height <= 0)
        fail(ErrorKind::Config, "synthetic object must be non-empty");
    if (spec.frame_count <= 0) fail(ErrorKind::Config, "synthetic frame_count must be positive");

    // Separate streams so background and object textures do not depend on each other's size.
    std::mt19937_64 bg_rng(spec.seed * 0x9E3779B97F4A7C15ull + 1);
    std::mt19937_64 obj_rng(spec.seed * 0x9E3779B97F4A7C15ull + 2);

    Frame background(spec.canvas_width, spec.canvas_height, spec.background_level);
    if (spec.background == Texture::Noise)
        for (auto& px : background.data()) px = static_cast<std::uint8_t>(bg_rng() & 0xFF);

    std::vector<std::uint8_t> object(static_cast<std::size_t>(spec.object_width) * spec.object_height,
                                     spec.object_level);
    if (spec.object_texture == Texture::Noise)
        for (auto& px : object) px = static_cast<std::uint8_t>(obj_rng() & 0xFF);

    SyntheticSequence seq;
    seq.frames.reserve(static_cast<std::size_t>(spec.frame_count));
    int x = spec.start_x;
    int y = spec.start_y;
    for (int t = 0; t < spec.frame_count; ++t) {
        const Displacement step = trajectory_step(spec, t);
        x += step.dx;
        y += step.dy;
        if (x < 0 || y < 0 || x + spec.object_width > spec.canvas_width ||
            y + spec.object_height > spec.canvas_height)
            fail(ErrorKind::Range, "synthetic object leaves the canvas at frame " + std::to_string(t) +
                                       " (top-left " + std::to_string(x) + "," + std::to_string(y) + ")");
        Frame frame = background;
        for (int oy = 0; oy < spec.object_height; ++oy)
            for (int ox = 0; ox < spec.object_width; ++ox)
                frame.at(x + ox, y + oy) = object[static_cast<std::size_t>(oy) * spec.object_width + ox];
        seq.frames.push_back(std::move(frame));
        Roi gt{static_cast<double>(x), static_cast<double>(y), static_cast<double>(spec.object_width),
               static_cast<double>(spec.object_height)};
        gt.label = 0;
        gt.score = 1.0;
        seq.ground_truth.push_back(gt);
    }
    return seq;
}

}  // namespace euphrates
