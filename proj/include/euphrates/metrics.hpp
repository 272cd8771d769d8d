#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "euphrates/error.hpp"
#include "euphrates/motion.hpp"
#include "euphrates/roi.hpp"

namespace euphrates {

struct MatchedPair {
    std::size_t first = 0;   // index into the left list
    std::size_t second = 0;  // index into the right list
    double iou = 0;
};

struct Matching {
    std::vector<MatchedPair> pairs;
    std::vector<std::size_t> unmatched_first;
    std::vector<std::size_t> unmatched_second;
};

/// One-to-one greedy matching by descending IoU; only pairs with IoU > 0.
/// Equal IoUs are resolved by (left index, right index) so the result is
/// independent of sort stability.
inline Matching greedy_match(std::span<const Roi> left, std::span<const Roi> right) {
    std::vector<MatchedPair> candidates;
    for (std::size_t i = 0; i < left.size(); ++i)
        for (std::size_t j = 0; j < right.size(); ++j)
            if (const double v = iou(left[i], right[j]); v > 0) candidates.push_back({i, j, v});
    std::sort(candidates.begin(), candidates.end(), [](const MatchedPair& a, const MatchedPair& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    std::vector<bool> used_left(left.size()), used_right(right.size());
    Matching m;
    for (const auto& c : candidates) {
        if (used_left[c.first] || used_right[c.second]) continue;
        used_left[c.first] = used_right[c.second] = true;
        m.pairs.push_back(c);
    }
    for (std::size_t i = 0; i < left.size(); ++i)
        if (!used_left[i]) m.unmatched_first.push_back(i);
    for (std::size_t j = 0; j < right.size(); ++j)
        if (!used_right[j]) m.unmatched_second.push_back(j);
    return m;
}

/// Default evaluation grid: 0.00, 0.05, ..., 1.00.
inline std::vector<double> default_thresholds() {
    std::vector<double> t;
    for (int i = 0; i <= 20; ++i) t.push_back(i / 20.0);
    return t;
}

inline void validate_thresholds(std::span<const double> thresholds) {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0))
            fail(ErrorKind::Config, "IoU thresholds must lie in [0, 1]");
        if (i > 0 && thresholds[i] < thresholds[i - 1]) fail(ErrorKind::Config, "IoU thresholds must be sorted");
    }
}

struct PrecisionCounts {
    std::uint64_t true_positives = 0;
    std::uint64_t false_positives = 0;
};

using FrameBoxes = std::vector<Roi>;

inline PrecisionCounts precision_counts(std::span<const FrameBoxes> detections, std::span<const FrameBoxes> truth,
                                        double threshold) {
    if (detections.size() != truth.size())
        fail(ErrorKind::Dimension, "detections and ground truth cover different frame counts");
    PrecisionCounts c;
    for (std::size_t f = 0; f < detections.size(); ++f) {
        const Matching m = greedy_match(detections[f], truth[f]);
        for (const auto& p : m.pairs) (p.iou > threshold ? c.true_positives : c.false_positives)++;
        c.false_positives += m.unmatched_first.size();
    }
    return c;
}

/// TP / (TP + FP) over every detection of every frame; a detection is a
/// true positive when its greedy match has IoU strictly above `threshold`.
inline double average_precision(std::span<const FrameBoxes> detections, std::span<const FrameBoxes> truth,
                                double threshold) {
    const PrecisionCounts c = precision_counts(detections, truth, threshold);
    const auto total = c.true_positives + c.false_positives;
    return total == 0 ? 0.0 : static_cast<double>(c.true_positives) / static_cast<double>(total);
}

struct CurvePoint {
    double threshold = 0;
    double value = 0;
};

inline std::vector<CurvePoint> precision_curve(std::span<const FrameBoxes> detections,
                                               std::span<const FrameBoxes> truth,
                                               std::span<const double> thresholds) {
    validate_thresholds(thresholds);
    std::vector<CurvePoint> curve;
    for (double t : thresholds) curve.push_back({t, average_precision(detections, truth, t)});
    return curve;
}

/// Fraction of frames whose single predicted box has IoU above each threshold.
/// Frames without a prediction count as IoU 0.
inline std::vector<CurvePoint> success_curve(std::span<const std::optional<Roi>> predicted,
                                             std::span<const Roi> truth, std::span<const double> thresholds) {
    if (predicted.size() != truth.size())
        fail(ErrorKind::Dimension, "tracking results and ground truth cover different frame counts");
    validate_thresholds(thresholds);
    std::vector<double> ious(predicted.size(), 0.0);
    for (std::size_t f = 0; f < predicted.size(); ++f)
        if (predicted[f]) ious[f] = iou(*predicted[f], truth[f]);
    std::vector<CurvePoint> curve;
    for (double t : thresholds) {
        const auto hits = std::count_if(ious.begin(), ious.end(), [t](double v) { return v > t; });
        curve.push_back({t, ious.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(ious.size())});
    }
    return curve;
}

/// Closed-form arithmetic operations per macroblock for a search strategy:
/// ES = L^2 (2d+1)^2, TSS = L^2 (1 + 8 ceil(log2(d+1))).
inline std::uint64_t ops_count(SearchAlgorithm algorithm, int mb_size, int search_range) {
    if (mb_size < 1 || search_range < 0) fail(ErrorKind::Range, "ops_count needs L >= 1 and d >= 0");
    const std::uint64_t block = static_cast<std::uint64_t>(mb_size) * static_cast<std::uint64_t>(mb_size);
    if (algorithm == SearchAlgorithm::Exhaustive) {
        const std::uint64_t window = 2 * static_cast<std::uint64_t>(search_range) + 1;
        return block * window * window;
    }
    const auto rounds = static_cast<std::uint64_t>(std::bit_width(static_cast<unsigned>(search_range)));
    return block * (1 + 8 * rounds);
}

}  // namespace euphrates
