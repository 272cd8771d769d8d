#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "euphrates/error.hpp"
#include "euphrates/motion.hpp"
#include "euphrates/roi.hpp"

namespace euphrates {

struct Vec2 {
    double x = 0;
    double y = 0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct SubGrid {
    int rows = 2;
    int cols = 2;
    friend bool operator==(const SubGrid&, const SubGrid&) = default;
};

struct ExtrapolationParams {
    SubGrid grid{};
    double beta_threshold = 0.7;  // T_beta

    void validate() const {
        if (grid.rows < 1 || grid.cols < 1) fail(ErrorKind::Config, "sub-ROI grid must be at least 1x1");
        if (!(beta_threshold >= 0.0 && beta_threshold <= 1.0))
            fail(ErrorKind::Config, "beta threshold must lie in [0, 1]");
    }
};

struct SubTrack {
    Roi roi;
    Vec2 prev_mv;  // last filtered velocity, pixels/frame
};

struct TrackState {
    int id = 0;
    std::vector<SubTrack> sub_tracks;
    SubGrid grid{};
    double beta_threshold = 0.7;
    Roi roi;
    bool lost = false;
};

/// Arithmetic work done by one extrapolation step.
struct ExtrapolationCost {
    std::uint64_t covered_mbs = 0;
    std::uint64_t arithmetic_ops = 0;

    ExtrapolationCost& operator+=(const ExtrapolationCost& o) {
        covered_mbs += o.covered_mbs;
        arithmetic_ops += o.arithmetic_ops;
        return *this;
    }
};

namespace detail {

struct RoiAverages {
    Vec2 mv;
    double confidence = 0;
    double area = 0;
    std::uint64_t covered_mbs = 0;
};

// Area-weighted sums over the macroblocks overlapping `roi` (clipped to the frame).
// Each pixel inherits its MB's vector, so weighting MBs by overlap area is
// the per-pixel mean.
inline RoiAverages accumulate(const MotionField& field, const Roi& roi) {
    const Roi clipped = intersection(roi, frame_rect(field.frame_width(), field.frame_height()));
    RoiAverages acc;
    if (clipped.area() <= 0) return acc;
    const int L = field.mb_size();
    const int col0 = std::max(0, static_cast<int>(std::floor(clipped.x / L)));
    const int row0 = std::max(0, static_cast<int>(std::floor(clipped.y / L)));
    const int col1 = std::min(field.cols() - 1, static_cast<int>(std::ceil(clipped.right() / L)) - 1);
    const int row1 = std::min(field.rows() - 1, static_cast<int>(std::ceil(clipped.bottom() / L)) - 1);
    double su = 0, sv = 0, sc = 0;
    for (int row = row0; row <= row1; ++row) {
        for (int col = col0; col <= col1; ++col) {
            const Roi mb{double(col * L), double(row * L), double(L), double(L)};
            const double a = intersection_area(clipped, mb);
            if (a <= 0) continue;
            const BlockMatch& b = field.at(col, row);
            su += a * b.mv.u;
            sv += a * b.mv.v;
            sc += a * field.confidence_at(col, row);
            acc.area += a;
            ++acc.covered_mbs;
        }
    }
    if (acc.area > 0) {
        acc.mv = {su / acc.area, sv / acc.area};
        acc.confidence = sc / acc.area;
    }
    return acc;
}

}  // namespace detail

/// Mean motion vector of the pixels inside `roi` (mu).
inline Vec2 roi_average_mv(const MotionField& field, const Roi& roi) {
    const auto acc = detail::accumulate(field, roi);
    if (acc.area <= 0) fail(ErrorKind::Range, "roi does not intersect the frame");
    return acc.mv;
}

/// Mean MV confidence over the ROI (alpha).
inline double roi_confidence(const MotionField& field, const Roi& roi) {
    const auto acc = detail::accumulate(field, roi);
    if (acc.area <= 0) fail(ErrorKind::Range, "roi does not intersect the frame");
    return acc.confidence;
}

struct FilteredMv {
    Vec2 mv;
    double beta = 0;
};

/// Recursive confidence-weighted filter: beta = alpha above the threshold, else 0.5.
inline FilteredMv filtered_mv(Vec2 mu, double alpha, Vec2 prev_mv, double beta_threshold) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::Range, "confidence must lie in [0, 1]");
    const double beta = alpha > beta_threshold ? alpha : 0.5;
    return {{beta * mu.x + (1.0 - beta) * prev_mv.x, beta * mu.y + (1.0 - beta) * prev_mv.y}, beta};
}

/// Tiles `roi` into rows x cols sub-ROIs with shared real-valued edges.
inline std::vector<Roi> split_sub_rois(const Roi& roi, SubGrid grid) {
    if (grid.rows < 1 || grid.cols < 1) fail(ErrorKind::Config, "sub-ROI grid must be at least 1x1");
    auto edge = [](double origin, double extent, int i, int n) {
        return i == n ? origin + extent : origin + extent * i / n;
    };
    std::vector<Roi> tiles;
    tiles.reserve(static_cast<std::size_t>(grid.rows) * grid.cols);
    for (int r = 0; r < grid.rows; ++r) {
        const double y0 = edge(roi.y, roi.h, r, grid.rows);
        const double y1 = edge(roi.y, roi.h, r + 1, grid.rows);
        for (int c = 0; c < grid.cols; ++c) {
            const double x0 = edge(roi.x, roi.w, c, grid.cols);
            const double x1 = edge(roi.x, roi.w, c + 1, grid.cols);
            Roi t = roi;
            t.x = x0;
            t.y = y0;
            t.w = x1 - x0;
            t.h = y1 - y0;
            tiles.push_back(t);
        }
    }
    if (grid.rows == 1 && grid.cols == 1) tiles.front() = roi;
    return tiles;
}

inline TrackState init_track(int id, const Roi& roi, const ExtrapolationParams& params) {
    params.validate();
    if (!roi.valid()) fail(ErrorKind::Range, "cannot track an empty roi");
    TrackState state;
    state.id = id;
    state.grid = params.grid;
    state.beta_threshold = params.beta_threshold;
    state.roi = roi;
    for (const Roi& tile : split_sub_rois(roi, params.grid)) state.sub_tracks.push_back({tile, {0.0, 0.0}});
    return state;
}

struct ExtrapolationResult {
    TrackState state;
    Roi roi;
    bool lost = false;
    ExtrapolationCost cost;
};

/// Advances one track by one frame using the field of that frame.
inline ExtrapolationResult extrapolate_track(const TrackState& state, const MotionField& field) {
    if (state.sub_tracks.empty()) fail(ErrorKind::Range, "track has no sub-ROIs");
    ExtrapolationResult out{state, state.roi, false, {}};
    bool first = true;
    Roi composed;
    for (SubTrack& sub : out.state.sub_tracks) {
        const auto acc = detail::accumulate(field, sub.roi);
        // A sub-ROI wholly outside the frame has no motion evidence; coast on its velocity.
        const Vec2 mu = acc.area > 0 ? acc.mv : sub.prev_mv;
        const double alpha = acc.area > 0 ? std::clamp(acc.confidence, 0.0, 1.0) : 0.0;
        const FilteredMv f = filtered_mv(mu, alpha, sub.prev_mv, state.beta_threshold);
        sub.roi = sub.roi.translated(f.mv.x, f.mv.y);
        sub.prev_mv = f.mv;
        composed = first ? sub.roi : bounding_union(composed, sub.roi);
        first = false;
        out.cost.covered_mbs += acc.covered_mbs;
        out.cost.arithmetic_ops += 7 * acc.covered_mbs + 6;
    }
    out.cost.arithmetic_ops += 4 * (out.state.sub_tracks.size() - 1);
    composed.label = state.roi.label;
    composed.score = state.roi.score;
    const Roi clamped = intersection(composed, frame_rect(field.frame_width(), field.frame_height()));
    Roi result = composed;
    result.x = clamped.x;
    result.y = clamped.y;
    result.w = clamped.w;
    result.h = clamped.h;
    out.lost = !(clamped.w > 0 && clamped.h > 0);
    out.state.lost = out.lost;
    out.state.roi = result;
    out.roi = result;
    return out;
}

}  // namespace euphrates
