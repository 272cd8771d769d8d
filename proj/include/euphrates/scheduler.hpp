#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "euphrates/error.hpp"
#include "euphrates/extrapolate.hpp"
#include "euphrates/frame.hpp"
#include "euphrates/metadata.hpp"
#include "euphrates/metrics.hpp"
#include "euphrates/motion.hpp"
#include "euphrates/roi.hpp"

namespace euphrates {

/// Frame-indexed detections, as replayed from a trace file.
using DetectionTrace = std::map<std::size_t, FrameBoxes>;

// ---------------------------------------------------------------------------
// Inference and motion sources
// ---------------------------------------------------------------------------

/// Stand-in for the CNN engine: answers "what does inference see at frame t".
class InferenceProvider {
public:
    virtual ~InferenceProvider() = default;
    virtual FrameBoxes infer(std::size_t frame) const = 0;
};

/// Replays a detection trace, optionally jittering box positions with
/// seeded Gaussian noise (sigma in pixels). Noise for a given (seed, frame)
/// does not depend on which other frames were queried.
class TraceProvider final : public InferenceProvider {
public:
    explicit TraceProvider(DetectionTrace trace, double noise_sigma = 0.0, std::uint64_t seed = 0)
        : trace_(std::move(trace)), noise_sigma_(noise_sigma), seed_(seed) {
        if (noise_sigma < 0) fail(ErrorKind::Config, "provider noise sigma must be non-negative");
    }

    FrameBoxes infer(std::size_t frame) const override {
        auto it = trace_.find(frame);
        if (it == trace_.end())
            fail(ErrorKind::MissingData, "no detection record for inference frame " + std::to_string(frame));
        FrameBoxes boxes = it->second;
        if (noise_sigma_ > 0) {
            std::mt19937_64 rng(seed_ ^ (0x9E3779B97F4A7C15ull * (frame + 1)));
            std::normal_distribution<double> jitter(0.0, noise_sigma_);
            for (Roi& b : boxes) {
                b.x += jitter(rng);
                b.y += jitter(rng);
            }
        }
        return boxes;
    }

    const DetectionTrace& trace() const noexcept { return trace_; }

private:
    DetectionTrace trace_;
    double noise_sigma_;
    std::uint64_t seed_;
};

/// Supplies the motion field of frame t relative to frame t-1 (t >= 1).
class MotionSource {
public:
    virtual ~MotionSource() = default;
    virtual MotionField field(std::size_t frame) const = 0;
};

/// Block matching on the fly, as the ISP would.
class FrameMotionSource final : public MotionSource {
public:
    FrameMotionSource(std::span<const Frame> frames, MotionParams params, unsigned threads = 1)
        : frames_(frames), params_(params), threads_(threads) {
        params_.validate();
    }

    MotionField field(std::size_t frame) const override {
        if (frame == 0 || frame >= frames_.size())
            fail(ErrorKind::MissingData, "no frame pair for motion field " + std::to_string(frame));
        return estimate_motion_field(frames_[frame - 1], frames_[frame], params_, threads_);
    }

private:
    std::span<const Frame> frames_;
    MotionParams params_;
    unsigned threads_;
};

/// Precomputed fields keyed by frame index.
class FieldMapMotionSource final : public MotionSource {
public:
    explicit FieldMapMotionSource(std::map<std::size_t, MotionField> fields) : fields_(std::move(fields)) {}

    MotionField field(std::size_t frame) const override {
        auto it = fields_.find(frame);
        if (it == fields_.end())
            fail(ErrorKind::MissingData, "no motion field for frame " + std::to_string(frame));
        return it->second;
    }

private:
    std::map<std::size_t, MotionField> fields_;
};

/// Metadata files from a directory; the number in each file name is the
/// index of the later frame of its pair. Files are decoded on demand.
class MetadataDirMotionSource final : public MotionSource {
public:
    explicit MetadataDirMotionSource(const std::filesystem::path& dir) {
        if (!std::filesystem::is_directory(dir)) fail(ErrorKind::Io, dir.string() + ": not a directory");
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".eumv") continue;
            auto index = detail::numeric_stem(entry.path());
            if (!index) fail(ErrorKind::Format, entry.path().string() + ": metadata file name has no index");
            files_[static_cast<std::size_t>(*index)] = entry.path();
        }
    }

    MotionField field(std::size_t frame) const override {
        auto it = files_.find(frame);
        if (it == files_.end())
            fail(ErrorKind::MissingData, "no motion metadata file for frame " + std::to_string(frame));
        return load_metadata(it->second);
    }

    std::size_t file_count() const noexcept { return files_.size(); }

private:
    std::map<std::size_t, std::filesystem::path> files_;
};

// ---------------------------------------------------------------------------
// Extrapolation window control
// ---------------------------------------------------------------------------

enum class EwMode { Constant, Adaptive };

struct AdaptiveParams {
    int ew_min = 1;
    int ew_max = 32;
    int initial_ew = 4;
    double diff_threshold = 0.2;  // tau_diff
    int k_up = 3;                 // clean comparisons needed to grow

    void validate() const {
        if (ew_min < 1 || ew_max < ew_min) fail(ErrorKind::Config, "adaptive EW bounds must satisfy 1 <= min <= max");
        if (initial_ew < ew_min || initial_ew > ew_max)
            fail(ErrorKind::Config, "adaptive initial EW must lie within its bounds");
        if (!(diff_threshold >= 0.0 && diff_threshold <= 1.0))
            fail(ErrorKind::Config, "adaptive diff threshold must lie in [0, 1]");
        if (k_up < 1) fail(ErrorKind::Config, "adaptive k_up must be >= 1");
    }
};

struct EwState {
    EwMode mode = EwMode::Constant;
    int current = 1;
    int ew_min = 1;
    int ew_max = 32;
    int streak = 0;
    double diff_threshold = 0.2;
    int k_up = 3;

    static EwState constant(int ew) {
        if (ew < 1) fail(ErrorKind::Config, "constant EW must be >= 1");
        EwState s;
        s.mode = EwMode::Constant;
        s.current = ew;
        s.ew_min = s.ew_max = ew;
        return s;
    }

    static EwState adaptive(const AdaptiveParams& p) {
        p.validate();
        EwState s;
        s.mode = EwMode::Adaptive;
        s.current = p.initial_ew;
        s.ew_min = p.ew_min;
        s.ew_max = p.ew_max;
        s.diff_threshold = p.diff_threshold;
        s.k_up = p.k_up;
        return s;
    }

    friend bool operator==(const EwState&, const EwState&) = default;
};

/// Greedy IoU association of extrapolated predictions with inferred boxes.
inline Matching associate(std::span<const Roi> predicted, std::span<const Roi> inferred) {
    return greedy_match(predicted, inferred);
}

/// 1 - mean IoU over associated pairs, where every unmatched box on either
/// side contributes a full disagreement of 1. Zero when both lists are empty.
inline double disagreement(std::span<const Roi> predicted, std::span<const Roi> inferred) {
    const Matching m = associate(predicted, inferred);
    const std::size_t n = m.pairs.size() + m.unmatched_first.size() + m.unmatched_second.size();
    if (n == 0) return 0.0;
    double total = static_cast<double>(m.unmatched_first.size() + m.unmatched_second.size());
    for (const auto& p : m.pairs) total += 1.0 - p.iou;
    return total / static_cast<double>(n);
}

/// Applies one comparison outcome to the window: shrink on disagreement,
/// grow after k_up consecutive agreements. Constant mode is left untouched.
inline EwState adaptive_update(EwState state, double diff) {
    if (state.mode == EwMode::Constant) return state;
    if (diff > state.diff_threshold) {
        state.current = std::max(state.ew_min, state.current - 1);
        state.streak = 0;
    } else if (++state.streak >= state.k_up) {
        state.current = std::min(state.ew_max, state.current + 1);
        state.streak = 0;
    }
    return state;
}

inline EwState adaptive_update(const EwState& state, std::span<const Roi> predicted, std::span<const Roi> inferred) {
    return adaptive_update(state, disagreement(predicted, inferred));
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

enum class FrameKind : std::uint8_t { Inference, Extrapolation };

enum class Scenario { Detection, Tracking };

struct PipelineConfig {
    EwMode mode = EwMode::Constant;
    int constant_ew = 1;
    AdaptiveParams adaptive{};
    ExtrapolationParams extrapolation{};
    Scenario scenario = Scenario::Detection;

    EwState initial_ew_state() const {
        return mode == EwMode::Constant ? EwState::constant(constant_ew) : EwState::adaptive(adaptive);
    }
};

struct TrackedBox {
    int id = 0;
    Roi roi;
    friend bool operator==(const TrackedBox&, const TrackedBox&) = default;
};

struct FrameResult {
    std::size_t index = 0;
    FrameKind kind = FrameKind::Inference;
    std::vector<TrackedBox> boxes;
    int ew = 1;                   // window in force after this frame
    std::optional<double> diff;   // adaptive comparison, I-frames only
    ExtrapolationCost cost;
};

struct ResultTrace {
    std::vector<FrameResult> frames;

    std::size_t inference_count() const {
        return static_cast<std::size_t>(std::count_if(frames.begin(), frames.end(),
                                                      [](const FrameResult& f) { return f.kind == FrameKind::Inference; }));
    }

    std::vector<FrameKind> kinds() const {
        std::vector<FrameKind> k;
        k.reserve(frames.size());
        for (const auto& f : frames) k.push_back(f.kind);
        return k;
    }

    /// Boxes per frame with ids dropped, for evaluation.
    std::vector<FrameBoxes> boxes() const {
        std::vector<FrameBoxes> out;
        out.reserve(frames.size());
        for (const auto& f : frames) {
            FrameBoxes b;
            for (const auto& t : f.boxes) b.push_back(t.roi);
            out.push_back(std::move(b));
        }
        return out;
    }
};

namespace detail {

inline FrameBoxes select_inferred(FrameBoxes inferred, Scenario scenario) {
    if (scenario == Scenario::Detection || inferred.size() <= 1) return inferred;
    // Tracking follows a single object: keep the most confident box.
    auto best = std::max_element(inferred.begin(), inferred.end(), [](const Roi& a, const Roi& b) {
        return a.score.value_or(0.0) < b.score.value_or(0.0);
    });
    return {*best};
}

}  // namespace detail

/// Runs the I-frame/E-frame schedule over `frame_count` frames.
///
/// I-frames take the provider's boxes and re-seed one track per box; inferred
/// boxes inherit the id of the track they associate with. E-frames move every
/// live track with the motion field of that frame. In adaptive mode each
/// I-frame after the first also extrapolates the live tracks through its own
/// field and compares the prediction with the inferred boxes to steer EW.
inline ResultTrace run_pipeline(std::size_t frame_count, const InferenceProvider& provider, const MotionSource& motion,
                                const PipelineConfig& cfg) {
    if (frame_count == 0) fail(ErrorKind::Range, "pipeline needs at least one frame");
    cfg.extrapolation.validate();
    EwState ew = cfg.initial_ew_state();

    ResultTrace trace;
    trace.frames.reserve(frame_count);
    std::vector<TrackState> tracks;
    int next_id = 0;
    std::size_t next_inference = 0;

    for (std::size_t t = 0; t < frame_count; ++t) {
        FrameResult result;
        result.index = t;
        if (t == next_inference) {
            result.kind = FrameKind::Inference;
            const FrameBoxes inferred = detail::select_inferred(provider.infer(t), cfg.scenario);

            std::vector<Roi> reference;
            std::vector<int> reference_ids;
            if (ew.mode == EwMode::Adaptive && t > 0) {
                const MotionField field = motion.field(t);
                for (const auto& track : tracks) {
                    auto step = extrapolate_track(track, field);
                    result.cost += step.cost;
                    if (step.lost) continue;
                    reference.push_back(step.roi);
                    reference_ids.push_back(track.id);
                }
                const double diff = disagreement(reference, inferred);
                result.diff = diff;
                ew = adaptive_update(ew, diff);
            } else {
                for (const auto& track : tracks) {
                    reference.push_back(track.roi);
                    reference_ids.push_back(track.id);
                }
            }

            std::vector<int> ids(inferred.size(), -1);
            if (cfg.scenario == Scenario::Tracking) {
                std::fill(ids.begin(), ids.end(), 0);
            } else {
                const Matching m = associate(reference, inferred);
                for (const auto& p : m.pairs) ids[p.second] = reference_ids[p.first];
                for (int& id : ids)
                    if (id < 0) id = next_id++;
                for (int id : ids) next_id = std::max(next_id, id + 1);
            }

            tracks.clear();
            for (std::size_t i = 0; i < inferred.size(); ++i) {
                if (!inferred[i].valid()) continue;
                tracks.push_back(init_track(ids[i], inferred[i], cfg.extrapolation));
                result.boxes.push_back({ids[i], inferred[i]});
            }
            next_inference = t + static_cast<std::size_t>(ew.current);
        } else {
            result.kind = FrameKind::Extrapolation;
            const MotionField field = motion.field(t);
            std::vector<TrackState> survivors;
            survivors.reserve(tracks.size());
            bool any_lost = false;
            for (const auto& track : tracks) {
                auto step = extrapolate_track(track, field);
                result.cost += step.cost;
                if (step.lost) {
                    any_lost = true;
                    continue;
                }
                result.boxes.push_back({track.id, step.roi});
                survivors.push_back(std::move(step.state));
            }
            tracks = std::move(survivors);
            if (any_lost && ew.mode == EwMode::Adaptive) next_inference = t + 1;
        }
        result.ew = ew.current;
        trace.frames.push_back(std::move(result));
    }
    return trace;
}

/// Pipeline driven directly by frames: motion is estimated between neighbours.
inline ResultTrace run_pipeline(std::span<const Frame> frames, const InferenceProvider& provider,
                                const MotionParams& params, const PipelineConfig& cfg, unsigned threads = 1) {
    const FrameMotionSource motion(frames, params, threads);
    return run_pipeline(frames.size(), provider, motion, cfg);
}

}  // namespace euphrates
