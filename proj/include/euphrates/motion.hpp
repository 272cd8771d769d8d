#pragma once

#include <bit>
#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "euphrates/error.hpp"
#include "euphrates/frame.hpp"
#include "euphrates/parallel.hpp"

namespace euphrates {

enum class SearchAlgorithm : std::uint8_t { Exhaustive = 0, ThreeStep = 1 };

inline std::string_view to_string(SearchAlgorithm a) {
    return a == SearchAlgorithm::Exhaustive ? "es" : "tss";
}

inline SearchAlgorithm parse_search_algorithm(std::string_view s) {
    if (s == "es" || s == "ES") return SearchAlgorithm::Exhaustive;
    if (s == "tss" || s == "TSS") return SearchAlgorithm::ThreeStep;
    fail(ErrorKind::Config, "unknown search algorithm '" + std::string(s) + "' (expected es|tss)");
}

struct MotionParams {
    int mb_size = 16;       // L
    int search_range = 7;   // d
    SearchAlgorithm algorithm = SearchAlgorithm::Exhaustive;

    void validate() const {
        if (mb_size < 4 || !std::has_single_bit(static_cast<unsigned>(mb_size)))
            fail(ErrorKind::Config, "macroblock size must be a power of two >= 4, got " + std::to_string(mb_size));
        if (search_range < 1)
            fail(ErrorKind::Config, "search range must be >= 1, got " + std::to_string(search_range));
    }

    friend bool operator==(const MotionParams&, const MotionParams&) = default;
};

/// Displacement of a macroblock's content: the block at p in the current
/// frame was at p - (u, v) in the previous frame.
struct MotionVector {
    int u = 0;
    int v = 0;
    friend bool operator==(const MotionVector&, const MotionVector&) = default;
};

struct BlockMatch {
    MotionVector mv;
    std::uint32_t sad = 0;
    friend bool operator==(const BlockMatch&, const BlockMatch&) = default;
};

inline std::uint32_t max_sad(int mb_size) {
    return 255u * static_cast<std::uint32_t>(mb_size) * static_cast<std::uint32_t>(mb_size);
}

/// Match quality in [0, 1]: 1 - sad / (255 L^2).
inline double confidence(std::uint64_t sad, int mb_size) {
    if (mb_size <= 0) fail(ErrorKind::Range, "macroblock size must be positive");
    const std::uint64_t worst = max_sad(mb_size);
    if (sad > worst)
        fail(ErrorKind::Range, "sad " + std::to_string(sad) + " exceeds maximum " + std::to_string(worst));
    return 1.0 - static_cast<double>(sad) / static_cast<double>(worst);
}

inline std::uint32_t sad(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size())
        fail(ErrorKind::Dimension, "sad: block sizes differ (" + std::to_string(a.size()) + " vs " +
                                       std::to_string(b.size()) + ")");
    std::uint32_t total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) total += static_cast<std::uint32_t>(std::abs(int(a[i]) - int(b[i])));
    return total;
}

/// Per-macroblock matches for one (prev, cur) pair over a ceil(W/L) x ceil(H/L) grid.
class MotionField {
public:
    MotionField() = default;

    MotionField(int frame_width, int frame_height, MotionParams params)
        : frame_width_(frame_width), frame_height_(frame_height), params_(params) {
        params_.validate();
        if (frame_width <= 0 || frame_height <= 0)
            fail(ErrorKind::Dimension, "motion field needs positive frame dims");
        cols_ = (frame_width + params.mb_size - 1) / params.mb_size;
        rows_ = (frame_height + params.mb_size - 1) / params.mb_size;
        blocks_.resize(static_cast<std::size_t>(cols_) * rows_);
    }

    int frame_width() const noexcept { return frame_width_; }
    int frame_height() const noexcept { return frame_height_; }
    int cols() const noexcept { return cols_; }
    int rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return blocks_.size(); }
    const MotionParams& params() const noexcept { return params_; }
    int mb_size() const noexcept { return params_.mb_size; }

    const BlockMatch& at(int col, int row) const { return blocks_[index(col, row)]; }
    BlockMatch& at(int col, int row) { return blocks_[index(col, row)]; }
    std::span<const BlockMatch> blocks() const noexcept { return blocks_; }
    std::span<BlockMatch> blocks() noexcept { return blocks_; }

    double confidence_at(int col, int row) const { return confidence(at(col, row).sad, params_.mb_size); }

    friend bool operator==(const MotionField&, const MotionField&) = default;

private:
    std::size_t index(int col, int row) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(col);
    }

    int frame_width_ = 0;
    int frame_height_ = 0;
    MotionParams params_{};
    int cols_ = 0;
    int rows_ = 0;
    std::vector<BlockMatch> blocks_;
};

namespace detail {

// Frame extended to the L-grid by edge replication.
class PaddedFrame {
public:
    PaddedFrame(const Frame& f, int mb_size)
        : width_((f.width() + mb_size - 1) / mb_size * mb_size),
          height_((f.height() + mb_size - 1) / mb_size * mb_size),
          data_(static_cast<std::size_t>(width_) * height_) {
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x) data_[static_cast<std::size_t>(y) * width_ + x] = f.clamped(x, y);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    const std::uint8_t* row(int y) const noexcept { return data_.data() + static_cast<std::size_t>(y) * width_; }

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> data_;
};

inline std::uint32_t block_sad(const PaddedFrame& cur, int cx, int cy, const PaddedFrame& prev, int px, int py,
                               int mb_size) {
    std::uint32_t total = 0;
    for (int j = 0; j < mb_size; ++j) {
        const std::uint8_t* a = cur.row(cy + j) + cx;
        const std::uint8_t* b = prev.row(py + j) + px;
        for (int i = 0; i < mb_size; ++i) total += static_cast<std::uint32_t>(std::abs(int(a[i]) - int(b[i])));
    }
    return total;
}

// Lexicographic preference: lower sad, then smaller |u|+|v|, then smaller v, then smaller u.
inline bool better_match(const BlockMatch& a, const BlockMatch& b) {
    if (a.sad != b.sad) return a.sad < b.sad;
    const int la = std::abs(a.mv.u) + std::abs(a.mv.v);
    const int lb = std::abs(b.mv.u) + std::abs(b.mv.v);
    if (la != lb) return la < lb;
    if (a.mv.v != b.mv.v) return a.mv.v < b.mv.v;
    return a.mv.u < b.mv.u;
}

struct SearchContext {
    const PaddedFrame& prev;
    const PaddedFrame& cur;
    int bx;
    int by;
    const MotionParams& params;

    // Returns false when the candidate block leaves the padded previous frame.
    bool evaluate(MotionVector mv, BlockMatch& out) const {
        const int px = bx - mv.u;
        const int py = by - mv.v;
        const int L = params.mb_size;
        if (px < 0 || py < 0 || px + L > prev.width() || py + L > prev.height()) return false;
        out = BlockMatch{mv, block_sad(cur, bx, by, prev, px, py, L)};
        return true;
    }
};

inline BlockMatch exhaustive(const SearchContext& ctx) {
    const int d = ctx.params.search_range;
    BlockMatch best{{0, 0}, 0};
    ctx.evaluate({0, 0}, best);
    for (int v = -d; v <= d; ++v)
        for (int u = -d; u <= d; ++u) {
            BlockMatch cand;
            if (ctx.evaluate({u, v}, cand) && better_match(cand, best)) best = cand;
        }
    return best;
}

inline int initial_tss_step(int search_range) {
    // 2^(ceil(log2(d+1)) - 1): {4, 2, 1} at d = 7.
    const unsigned span = std::bit_ceil(static_cast<unsigned>(search_range + 1));
    return static_cast<int>(span / 2);
}

inline BlockMatch three_step(const SearchContext& ctx) {
    const int d = ctx.params.search_range;
    BlockMatch best{{0, 0}, 0};
    ctx.evaluate({0, 0}, best);
    for (int step = initial_tss_step(d); step >= 1; step /= 2) {
        const MotionVector center = best.mv;
        for (int j = -1; j <= 1; ++j)
            for (int i = -1; i <= 1; ++i) {
                if (i == 0 && j == 0) continue;
                const MotionVector mv{center.u + i * step, center.v + j * step};
                if (std::abs(mv.u) > d || std::abs(mv.v) > d) continue;
                BlockMatch cand;
                if (ctx.evaluate(mv, cand) && better_match(cand, best)) best = cand;
            }
    }
    return best;
}

inline void check_search_inputs(const Frame& prev, const Frame& cur, int x, int y, const MotionParams& params) {
    params.validate();
    if (!prev.same_dims(cur)) fail(ErrorKind::Dimension, "prev and cur frames differ in size");
    if (x < 0 || y < 0 || x % params.mb_size || y % params.mb_size || x >= cur.width() || y >= cur.height())
        fail(ErrorKind::Range, "macroblock origin (" + std::to_string(x) + "," + std::to_string(y) +
                                   ") is not on the L-grid of the frame");
}

}  // namespace detail

struct PixelCoord {
    int x = 0;
    int y = 0;
};

/// Best match over every offset in [-d, d]^2.
inline BlockMatch exhaustive_search(const Frame& prev, const Frame& cur, PixelCoord mb_origin,
                                    const MotionParams& params) {
    detail::check_search_inputs(prev, cur, mb_origin.x, mb_origin.y, params);
    const detail::PaddedFrame p(prev, params.mb_size), c(cur, params.mb_size);
    return detail::exhaustive({p, c, mb_origin.x, mb_origin.y, params});
}

/// Logarithmic search: nine probes per round around the running best, step halving to 1.
inline BlockMatch three_step_search(const Frame& prev, const Frame& cur, PixelCoord mb_origin,
                                    const MotionParams& params) {
    detail::check_search_inputs(prev, cur, mb_origin.x, mb_origin.y, params);
    const detail::PaddedFrame p(prev, params.mb_size), c(cur, params.mb_size);
    return detail::three_step({p, c, mb_origin.x, mb_origin.y, params});
}

/// Motion field of `cur` relative to `prev`. Rows are distributed across
/// `threads` workers; the result is independent of the worker count.
inline MotionField estimate_motion_field(const Frame& prev, const Frame& cur, const MotionParams& params,
                                         unsigned threads = 1) {
    params.validate();
    if (!prev.same_dims(cur))
        fail(ErrorKind::Dimension, "frame dims differ: " + std::to_string(prev.width()) + "x" +
                                       std::to_string(prev.height()) + " vs " + std::to_string(cur.width()) +
                                       "x" + std::to_string(cur.height()));
    MotionField field(cur.width(), cur.height(), params);
    const detail::PaddedFrame p(prev, params.mb_size), c(cur, params.mb_size);
    const int L = params.mb_size;
    parallel_for(static_cast<std::size_t>(field.rows()), threads, [&](std::size_t r) {
        const int row = static_cast<int>(r);
        for (int col = 0; col < field.cols(); ++col) {
            const detail::SearchContext ctx{p, c, col * L, row * L, params};
            field.at(col, row) = params.algorithm == SearchAlgorithm::Exhaustive ? detail::exhaustive(ctx)
                                                                                 : detail::three_step(ctx);
        }
    });
    return field;
}

}  // namespace euphrates
