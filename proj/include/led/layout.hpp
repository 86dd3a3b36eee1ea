#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "led/error_type.hpp"
#include "led/geometry.hpp"

namespace led {

using ElementId = std::int64_t;
using CategoryId = std::int64_t;

struct Category {
    CategoryId id = 0;
    std::string name;

    friend bool operator==(const Category&, const Category&) = default;
};

enum class Source { GroundTruth, Prediction };

struct LayoutElement {
    ElementId element_id = 0;
    BBox bbox;
    CategoryId category_id = 0;
    Source source = Source::GroundTruth;

    friend bool operator==(const LayoutElement&, const LayoutElement&) = default;
};

struct DocumentLayout {
    std::string doc_id;
    std::int64_t image_id = 0;  // COCO image id the document was read from
    double page_width = 0.0;
    double page_height = 0.0;
    std::optional<std::string> image_path;
    std::vector<LayoutElement> elements;

    const LayoutElement* find(ElementId id) const;
    /// One past the largest element id, or 1 for an empty document.
    ElementId next_element_id() const;
    std::vector<BBox> boxes() const;

    friend bool operator==(const DocumentLayout&, const DocumentLayout&) = default;
};

/// A set of documents sharing one category table.
struct Dataset {
    std::vector<DocumentLayout> documents;
    std::vector<Category> categories;

    const Category* category(CategoryId id) const;
    std::string category_name(CategoryId id) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Per-document error labels: the document-level flag and type set plus the
/// element-level labels keyed by predicted element id.
struct ErrorAnnotation {
    std::string doc_id;
    bool has_error = false;
    ErrorSet error_types;
    std::map<ElementId, ErrorSet> element_errors;
    std::vector<ElementId> missing_gt_ids;

    /// Recomputes has_error and error_types from the element-level data.
    void finalize();

    friend bool operator==(const ErrorAnnotation&, const ErrorAnnotation&) = default;
};

/// Throws ValidationError when an annotation breaks its consistency rules.
void validate(const ErrorAnnotation& ann);

/// Throws ValidationError on duplicate category ids, duplicate element ids
/// within a document, or elements referencing unknown categories.
void validate(const Dataset& ds);

}  // namespace led
