#pragma once

#include <optional>
#include <span>
#include <utility>

namespace led {

/// Axis-aligned box in page pixels, COCO order (left, top, width, height).
/// Construction rejects non-finite fields and non-positive extents.
class BBox {
public:
    BBox(double x, double y, double w, double h);

    double x() const { return x_; }
    double y() const { return y_; }
    double w() const { return w_; }
    double h() const { return h_; }
    double right() const { return x_ + w_; }
    double bottom() const { return y_ + h_; }

    /// Builds a box from corner coordinates (x0 < x1, y0 < y1).
    static BBox from_corners(double x0, double y0, double x1, double y1);

    friend bool operator==(const BBox&, const BBox&) = default;

private:
    double x_, y_, w_, h_;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double area(const BBox& b);

/// Intersection area; 0 for disjoint or edge-touching boxes.
double intersection_area(const BBox& a, const BBox& b);

/// Intersection over union in [0, 1].
double iou(const BBox& a, const BBox& b);

Point center(const BBox& b);
double center_distance(const BBox& a, const BBox& b);
double diagonal(const BBox& b);

/// Smallest box enclosing every input. Throws ValidationError on an empty list.
BBox union_rect(std::span<const BBox> boxes);

bool contains(const BBox& outer, const BBox& inner);

BBox translated(const BBox& b, double dx, double dy);

/// Scales width and height about the box center.
BBox scaled_about_center(const BBox& b, double sx, double sy);

/// Intersects `b` with the page rectangle [0,width]x[0,height]. Returns
/// nothing when the clipped box would be empty.
std::optional<BBox> clamp_to_page(const BBox& b, double page_w, double page_h);

}  // namespace led
