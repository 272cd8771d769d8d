#pragma once

#include <algorithm>
#include <optional>

namespace euphrates {

/// Axis-aligned box in pixel coordinates; real-valued so repeated
/// extrapolation does not accumulate rounding.
struct Roi {
    double x = 0;
    double y = 0;
    double w = 0;
    double h = 0;
    std::optional<int> label;
    std::optional<double> score;

    double right() const noexcept { return x + w; }
    double bottom() const noexcept { return y + h; }
    double area() const noexcept { return std::max(0.0, w) * std::max(0.0, h); }
    bool valid() const noexcept { return w > 0 && h > 0; }

    Roi translated(double dx, double dy) const {
        Roi r = *this;
        r.x += dx;
        r.y += dy;
        return r;
    }

    friend bool operator==(const Roi&, const Roi&) = default;
};

/// Geometric intersection; w/h are zero when the boxes do not overlap.
inline Roi intersection(const Roi& a, const Roi& b) {
    const double x0 = std::max(a.x, b.x);
    const double y0 = std::max(a.y, b.y);
    const double x1 = std::min(a.right(), b.right());
    const double y1 = std::min(a.bottom(), b.bottom());
    return Roi{x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

inline double intersection_area(const Roi& a, const Roi& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    return (iw > 0 && ih > 0) ? iw * ih : 0.0;
}

/// Minimal box containing both a and b (label/score taken from a).
inline Roi bounding_union(const Roi& a, const Roi& b) {
    Roi r = a;
    r.x = std::min(a.x, b.x);
    r.y = std::min(a.y, b.y);
    r.w = std::max(a.right(), b.right()) - r.x;
    r.h = std::max(a.bottom(), b.bottom()) - r.y;
    return r;
}

inline Roi frame_rect(int width, int height) {
    return Roi{0.0, 0.0, static_cast<double>(width), static_cast<double>(height)};
}

/// Intersection-over-union; 0 for disjoint or degenerate boxes.
inline double iou(const Roi& a, const Roi& b) {
    const double inter = intersection_area(a, b);
    if (inter <= 0) return 0.0;
    // Areas from edges so that iou(a, a) is exactly 1 in floating point.
    const double area_a = (a.right() - a.x) * (a.bottom() - a.y);
    const double area_b = (b.right() - b.x) * (b.bottom() - b.y);
    const double uni = area_a + area_b - inter;
    return uni > 0 ? std::min(1.0, inter / uni) : 0.0;
}

}  // namespace euphrates
