#include "led/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "led/errors.hpp"

namespace led {

BBox::BBox(double x, double y, double w, double h) : x_(x), y_(y), w_(w), h_(h) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(w) || !std::isfinite(h)) {
        throw ValidationError("bbox has a non-finite field");
    }
    if (!(w > 0.0) || !(h > 0.0)) {
        std::ostringstream os;
        os << "bbox has non-positive extent (w=" << w << ", h=" << h << ")";
        throw ValidationError(os.str());
    }
}

BBox BBox::from_corners(double x0, double y0, double x1, double y1) {
    return BBox(x0, y0, x1 - x0, y1 - y0);
}

double area(const BBox& b) { return b.w() * b.h(); }

double intersection_area(const BBox& a, const BBox& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.x(), b.x());
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y());
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    return iw * ih;
}

double iou(const BBox& a, const BBox& b) {
    if (a == b) return 1.0;
    const double inter = intersection_area(a, b);
    if (inter == 0.0) return 0.0;
    const double uni = area(a) + area(b) - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

Point center(const BBox& b) { return {b.x() + b.w() / 2.0, b.y() + b.h() / 2.0}; }

double center_distance(const BBox& a, const BBox& b) {
    const Point ca = center(a);
    const Point cb = center(b);
    return std::hypot(ca.x - cb.x, ca.y - cb.y);
}

double diagonal(const BBox& b) { return std::hypot(b.w(), b.h()); }

BBox union_rect(std::span<const BBox> boxes) {
    if (boxes.empty()) throw ValidationError("union_rect of an empty box list");
    double x0 = boxes.front().x(), y0 = boxes.front().y();
    double x1 = boxes.front().right(), y1 = boxes.front().bottom();
    for (const BBox& b : boxes.subspan(1)) {
        x0 = std::min(x0, b.x());
        y0 = std::min(y0, b.y());
        x1 = std::max(x1, b.right());
        y1 = std::max(y1, b.bottom());
    }
    // x0 + (x1 - x0) can round below x1; widen by ulps until it covers.
    double w = x1 - x0, h = y1 - y0;
    while (x0 + w < x1) w = std::nextafter(w, std::numeric_limits<double>::infinity());
    while (y0 + h < y1) h = std::nextafter(h, std::numeric_limits<double>::infinity());
    return BBox(x0, y0, w, h);
}

bool contains(const BBox& outer, const BBox& inner) {
    return outer.x() <= inner.x() && outer.y() <= inner.y() && inner.right() <= outer.right() &&
           inner.bottom() <= outer.bottom();
}

BBox translated(const BBox& b, double dx, double dy) { return BBox(b.x() + dx, b.y() + dy, b.w(), b.h()); }

BBox scaled_about_center(const BBox& b, double sx, double sy) {
    const Point c = center(b);
    const double w = b.w() * sx;
    const double h = b.h() * sy;
    return BBox(c.x - w / 2.0, c.y - h / 2.0, w, h);
}

std::optional<BBox> clamp_to_page(const BBox& b, double page_w, double page_h) {
    const double x0 = std::max(0.0, b.x());
    const double y0 = std::max(0.0, b.y());
    const double x1 = std::min(page_w, b.right());
    const double y1 = std::min(page_h, b.bottom());
    if (!(x1 > x0) || !(y1 > y0)) return std::nullopt;
    if (x0 == b.x() && y0 == b.y() && x1 == b.right() && y1 == b.bottom()) return b;
    return BBox::from_corners(x0, y0, x1, y1);
}

}  // namespace led
