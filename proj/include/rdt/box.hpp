#pragma once

#include <algorithm>

namespace rdt {

// Axis-aligned box in [x, y, w, h] ground-truth convention: (x, y) is the
// top-left corner. x and y may be negative (object partially out of frame);
// a valid box has w > 0 and h > 0.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double cx() const { return x + 0.5 * w; }
    double cy() const { return y + 0.5 * h; }
    double x2() const { return x + w; }
    double y2() const { return y + h; }
    double area() const { return w * h; }
    bool valid() const { return w > 0.0 && h > 0.0; }
};

inline double intersection_area(const BoundingBox& a, const BoundingBox& b) {
    double iw = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
    double ih = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    return iw * ih;
}

}  // namespace rdt
