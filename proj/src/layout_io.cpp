#include "led/layout_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "led/errors.hpp"

namespace led {

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(where + ": missing field '" + key + "'");
    return *it;
}

std::int64_t require_int(const json& obj, const char* key, const std::string& where) {
    const json& v = require(obj, key, where);
    if (!v.is_number_integer()) throw ValidationError(where + ": field '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::string sanitize_doc_id(std::string_view file_name) {
    std::string stem(file_name);
    if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) stem = stem.substr(slash + 1);
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
    for (char& c : stem) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        if (!ok) c = '_';
    }
    return stem;
}

}  // namespace

json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        std::ostringstream os;
        os << what << ": malformed JSON at byte " << e.byte << ": " << e.what();
        throw ValidationError(os.str());
    }
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Dataset parse_coco(std::string_view text, Source source) {
    const json root = parse_json(text, "coco");
    if (!root.is_object()) throw ValidationError("coco: top level must be an object");
    for (const char* key : {"images", "annotations", "categories"}) {
        if (!require(root, key, "coco").is_array()) {
            throw ValidationError(std::string("coco: '") + key + "' must be an array");
        }
    }

    Dataset ds;
    for (const json& c : root["categories"]) {
        const std::string where = "coco category";
        Category cat;
        cat.id = require_int(c, "id", where);
        const json& name = require(c, "name", where);
        if (!name.is_string()) throw ValidationError(where + " " + std::to_string(cat.id) + ": name must be a string");
        cat.name = name.get<std::string>();
        ds.categories.push_back(std::move(cat));
    }
    std::set<CategoryId> category_ids;
    for (const auto& c : ds.categories) {
        if (!category_ids.insert(c.id).second) {
            throw ValidationError("coco: duplicate category id " + std::to_string(c.id));
        }
    }

    struct ImageInfo {
        std::optional<double> width, height;
    };
    std::map<std::int64_t, std::size_t> doc_index;
    std::vector<ImageInfo> infos;
    std::set<std::string> used_ids;
    for (const json& img : root["images"]) {
        DocumentLayout doc;
        doc.image_id = require_int(img, "id", "coco image");
        const std::string where = "coco image " + std::to_string(doc.image_id);
        if (doc_index.count(doc.image_id)) throw ValidationError("coco: duplicate image id " + std::to_string(doc.image_id));
        if (auto it = img.find("file_name"); it != img.end() && it->is_string()) {
            doc.image_path = it->get<std::string>();
        }
        if (auto it = img.find("doc_id"); it != img.end() && it->is_string()) {
            doc.doc_id = it->get<std::string>();
        } else if (doc.image_path) {
            doc.doc_id = sanitize_doc_id(*doc.image_path);
        }
        if (doc.doc_id.empty() || used_ids.count(doc.doc_id)) {
            doc.doc_id = (doc.doc_id.empty() ? "img" : doc.doc_id + "_") + std::to_string(doc.image_id);
        }
        if (!used_ids.insert(doc.doc_id).second) throw ValidationError(where + ": duplicate doc_id '" + doc.doc_id + "'");
        ImageInfo info;
        auto dim = [&](const char* key) -> std::optional<double> {
            auto it = img.find(key);
            if (it == img.end() || it->is_null()) return std::nullopt;
            if (!it->is_number() || !(it->get<double>() > 0.0)) {
                throw ValidationError(where + ": '" + key + "' must be a positive number");
            }
            return it->get<double>();
        };
        info.width = dim("width");
        info.height = dim("height");
        doc_index[doc.image_id] = ds.documents.size();
        ds.documents.push_back(std::move(doc));
        infos.push_back(info);
    }

    for (const json& ann : root["annotations"]) {
        const std::int64_t ann_id = require_int(ann, "id", "coco annotation");
        const std::string where = "coco annotation " + std::to_string(ann_id);
        const std::int64_t image_id = require_int(ann, "image_id", where);
        const CategoryId category_id = require_int(ann, "category_id", where);
        auto doc_it = doc_index.find(image_id);
        if (doc_it == doc_index.end()) throw ValidationError(where + ": unknown image_id " + std::to_string(image_id));
        if (!category_ids.count(category_id)) {
            throw ValidationError(where + ": unknown category_id " + std::to_string(category_id));
        }
        const json& bbox = require(ann, "bbox", where);
        if (!bbox.is_array() || bbox.size() != 4 ||
            !std::all_of(bbox.begin(), bbox.end(), [](const json& v) { return v.is_number(); })) {
            throw ValidationError(where + ": bbox must be an array of four numbers");
        }
        const double w = bbox[2].get<double>();
        const double h = bbox[3].get<double>();
        if (!(w > 0.0) || !(h > 0.0)) throw ValidationError(where + ": bbox has non-positive width or height");
        DocumentLayout& doc = ds.documents[doc_it->second];
        if (doc.find(ann_id)) throw ValidationError(where + ": duplicate annotation id within image");
        try {
            doc.elements.push_back(LayoutElement{ann_id, BBox(bbox[0].get<double>(), bbox[1].get<double>(), w, h),
                                                 category_id, source});
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
    }

    for (std::size_t i = 0; i < ds.documents.size(); ++i) {
        DocumentLayout& doc = ds.documents[i];
        if (infos[i].width && infos[i].height) {
            doc.page_width = *infos[i].width;
            doc.page_height = *infos[i].height;
            continue;
        }
        if (doc.elements.empty()) {
            throw ValidationError("coco image " + std::to_string(doc.image_id) +
                                  ": no width/height and no annotations to infer a page size from");
        }
        const std::vector<BBox> boxes = doc.boxes();
        const BBox u = union_rect(boxes);
        doc.page_width = u.right() + 0.05 * u.w();
        doc.page_height = u.bottom() + 0.05 * u.h();
    }
    return ds;
}

Dataset load_coco(const std::filesystem::path& path, Source source) {
    return parse_coco(read_text_file(path), source);
}

namespace {

json annotation_json(const LayoutElement& e, std::int64_t image_id) {
    const BBox& b = e.bbox;
    return json{{"id", e.element_id},
                {"image_id", image_id},
                {"category_id", e.category_id},
                {"bbox", json::array({b.x(), b.y(), b.w(), b.h()})},
                {"area", area(b)},
                {"iscrowd", 0}};
}

json image_json(const DocumentLayout& doc) {
    json img{{"id", doc.image_id}, {"doc_id", doc.doc_id}, {"width", doc.page_width}, {"height", doc.page_height}};
    if (doc.image_path) img["file_name"] = *doc.image_path;
    return img;
}

json categories_json(std::span<const Category> categories) {
    json cats = json::array();
    for (const auto& c : categories) cats.push_back(json{{"id", c.id}, {"name", c.name}});
    return cats;
}

}  // namespace

json to_coco_json(const Dataset& ds) {
    json images = json::array();
    json annotations = json::array();
    for (const auto& doc : ds.documents) {
        images.push_back(image_json(doc));
        for (const auto& e : doc.elements) annotations.push_back(annotation_json(e, doc.image_id));
    }
    return json{{"images", images}, {"annotations", annotations}, {"categories", categories_json(ds.categories)}};
}

json to_coco_json(const DocumentLayout& doc, std::span<const Category> categories) {
    json annotations = json::array();
    for (const auto& e : doc.elements) annotations.push_back(annotation_json(e, doc.image_id));
    return json{{"images", json::array({image_json(doc)})},
                {"annotations", annotations},
                {"categories", categories_json(categories)}};
}

void save_coco(const Dataset& ds, const std::filesystem::path& path) {
    write_text_file(path, dump_json(to_coco_json(ds)));
}

json to_json(const ErrorAnnotation& ann) {
    json element_errors = json::object();
    for (const auto& [id, types] : ann.element_errors) {
        const auto names = types.names();
        if (names.size() == 1) {
            element_errors[std::to_string(id)] = names.front();
        } else {
            element_errors[std::to_string(id)] = names;
        }
    }
    return json{{"doc_id", ann.doc_id},
                {"has_error", ann.has_error},
                {"error_types", ann.error_types.names()},
                {"element_errors", element_errors},
                {"missing_gt_ids", ann.missing_gt_ids}};
}

namespace {

ErrorType require_type(const json& v, const std::string& where) {
    if (!v.is_string()) throw ValidationError(where + ": error type must be a string");
    auto t = parse_error_type(v.get<std::string>());
    if (!t) throw ValidationError(where + ": unknown error type '" + v.get<std::string>() + "'");
    return *t;
}

}  // namespace

ErrorAnnotation error_annotation_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("error annotation: top level must be an object");
    ErrorAnnotation ann;
    const json& doc_id = require(j, "doc_id", "error annotation");
    if (!doc_id.is_string()) throw ValidationError("error annotation: doc_id must be a string");
    ann.doc_id = doc_id.get<std::string>();
    const std::string where = "error annotation '" + ann.doc_id + "'";

    const json& has_error = require(j, "has_error", where);
    if (!has_error.is_boolean()) throw ValidationError(where + ": has_error must be a boolean");
    ann.has_error = has_error.get<bool>();

    const json& types = require(j, "error_types", where);
    if (!types.is_array()) throw ValidationError(where + ": error_types must be an array");
    for (const json& t : types) ann.error_types.insert(require_type(t, where));

    if (auto it = j.find("element_errors"); it != j.end()) {
        if (!it->is_object()) throw ValidationError(where + ": element_errors must be an object");
        for (const auto& [key, value] : it->items()) {
            ElementId id = 0;
            try {
                std::size_t used = 0;
                id = std::stoll(key, &used);
                if (used != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                throw ValidationError(where + ": element id '" + key + "' is not an integer");
            }
            ErrorSet set;
            if (value.is_array()) {
                for (const json& t : value) set.insert(require_type(t, where));
            } else {
                set.insert(require_type(value, where));
            }
            ann.element_errors[id] = set;
        }
    }
    if (auto it = j.find("missing_gt_ids"); it != j.end()) {
        if (!it->is_array()) throw ValidationError(where + ": missing_gt_ids must be an array");
        for (const json& v : *it) {
            if (!v.is_number_integer()) throw ValidationError(where + ": missing_gt_ids must hold integers");
            ann.missing_gt_ids.push_back(v.get<ElementId>());
        }
    }
    validate(ann);
    return ann;
}

ErrorAnnotation load_error_annotation(const std::filesystem::path& path) {
    return error_annotation_from_json(parse_json(read_text_file(path), path.string()));
}

void save_error_annotation(const ErrorAnnotation& ann, const std::filesystem::path& path) {
    validate(ann);
    write_text_file(path, dump_json(to_json(ann)));
}

}  // namespace led
