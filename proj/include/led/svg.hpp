#pragma once

#include <span>
#include <string>

#include "led/layout.hpp"

namespace led {

/// SVG overlay of a layout: page frame, the page image when `image_path` is
/// set, one rect and one "id:category" label per element. Elements labeled
/// in `annotation` are drawn dashed and their label carries the error tags.
std::string render_svg(const DocumentLayout& doc, std::span<const Category> categories,
                       const ErrorAnnotation* annotation = nullptr);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

}  // namespace led
