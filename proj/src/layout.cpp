#include "led/layout.hpp"

#include <algorithm>
#include <set>

#include "led/errors.hpp"

namespace led {

const LayoutElement* DocumentLayout::find(ElementId id) const {
    auto it = std::find_if(elements.begin(), elements.end(),
                           [id](const LayoutElement& e) { return e.element_id == id; });
    return it == elements.end() ? nullptr : &*it;
}

ElementId DocumentLayout::next_element_id() const {
    ElementId next = 1;
    for (const auto& e : elements) next = std::max(next, e.element_id + 1);
    return next;
}

std::vector<BBox> DocumentLayout::boxes() const {
    std::vector<BBox> out;
    out.reserve(elements.size());
    for (const auto& e : elements) out.push_back(e.bbox);
    return out;
}

const Category* Dataset::category(CategoryId id) const {
    auto it = std::find_if(categories.begin(), categories.end(), [id](const Category& c) { return c.id == id; });
    return it == categories.end() ? nullptr : &*it;
}

std::string Dataset::category_name(CategoryId id) const {
    const Category* c = category(id);
    return c ? c->name : std::to_string(id);
}

void ErrorAnnotation::finalize() {
    ErrorSet all;
    for (const auto& [id, types] : element_errors) all |= types;
    std::sort(missing_gt_ids.begin(), missing_gt_ids.end());
    missing_gt_ids.erase(std::unique(missing_gt_ids.begin(), missing_gt_ids.end()), missing_gt_ids.end());
    if (!missing_gt_ids.empty()) all.insert(ErrorType::Missing);
    error_types = all;
    has_error = !error_types.empty();
}

void validate(const ErrorAnnotation& ann) {
    const std::string where = "error annotation '" + ann.doc_id + "': ";
    if (ann.has_error != !ann.error_types.empty()) {
        throw ValidationError(where + "has_error disagrees with error_types");
    }
    ErrorSet derived;
    for (const auto& [id, types] : ann.element_errors) {
        if (types.empty()) throw ValidationError(where + "element " + std::to_string(id) + " has no error label");
        derived |= types;
    }
    if (!ann.missing_gt_ids.empty()) derived.insert(ErrorType::Missing);
    if (derived != ann.error_types) {
        throw ValidationError(where + "error_types " + describe(ann.error_types) +
                              " does not match element-level labels " + describe(derived));
    }
}

void validate(const Dataset& ds) {
    std::set<CategoryId> cats;
    for (const auto& c : ds.categories) {
        if (!cats.insert(c.id).second) throw ValidationError("duplicate category id " + std::to_string(c.id));
    }
    std::set<std::string> doc_ids;
    for (const auto& doc : ds.documents) {
        if (!doc_ids.insert(doc.doc_id).second) throw ValidationError("duplicate doc_id '" + doc.doc_id + "'");
        std::set<ElementId> ids;
        for (const auto& e : doc.elements) {
            if (!ids.insert(e.element_id).second) {
                throw ValidationError("document '" + doc.doc_id + "': duplicate element id " +
                                      std::to_string(e.element_id));
            }
            if (!cats.count(e.category_id)) {
                throw ValidationError("document '" + doc.doc_id + "': element " + std::to_string(e.element_id) +
                                      " references unknown category_id " + std::to_string(e.category_id));
            }
        }
    }
}

}  // namespace led
