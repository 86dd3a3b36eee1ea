#include "led/config.hpp"

#include "led/errors.hpp"
#include "led/layout_io.hpp"

namespace led {

namespace {

double number(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) throw ValidationError("config: '" + key + "' must be a number");
    return v.get<double>();
}

std::pair<double, double> number_pair(const nlohmann::json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ValidationError("config: '" + key + "' must be a two-element numeric array");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

ResolvedConfig apply_config(const nlohmann::json& j, ResolvedConfig base) {
    if (!j.is_object()) throw ValidationError("config: top level must be an object");
    DetectorConfig& d = base.detector;
    InjectionConfig& c = base.injection;
    for (const auto& [key, v] : j.items()) {
        if (key == "existence_iou") d.existence_iou = number(v, key);
        else if (key == "split_fragment_max_iou") d.split_fragment_max_iou = number(v, key);
        else if (key == "split_coverage_min") d.split_coverage_min = number(v, key);
        else if (key == "duplicate_iou") d.duplicate_iou = number(v, key);
        else if (key == "misclassification_iou") d.misclassification_iou = number(v, key);
        else if (key == "overlap_iou") d.overlap_iou = number(v, key);
        else if (key == "size_ratio_min") d.size_ratio_min = number(v, key);
        else if (key == "size_ratio_max") d.size_ratio_max = number(v, key);
        else if (key == "size_center_tolerance") d.size_center_tolerance = number(v, key);
        else if (key == "seed") {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
                throw ValidationError("config: 'seed' must be a non-negative integer");
            }
            c.seed = v.get<std::uint64_t>();
            base.seed_from_file = true;
        } else if (key == "error_distribution") {
            if (!v.is_object()) throw ValidationError("config: 'error_distribution' must be an object");
            std::array<double, kErrorTypeCount> dist{};
            for (const auto& [name, w] : v.items()) {
                auto t = parse_error_type(name);
                if (!t) throw ValidationError("config: unknown error type '" + name + "' in error_distribution");
                dist[index_of(*t)] = number(w, "error_distribution." + name);
            }
            c.error_distribution = dist;
        } else if (key == "missing_rate") c.missing_rate = number(v, key);
        else if (key == "size_perturb_range") c.size_perturb_range = number_pair(v, key);
        else if (key == "hallucination_max_iou") c.hallucination_max_iou = number(v, key);
        else if (key == "split_n_range") {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
                throw ValidationError("config: 'split_n_range' must be a two-element integer array");
            }
            c.split_n_range = {v[0].get<int>(), v[1].get<int>()};
        } else if (key == "merge_proximity_factor") c.merge_proximity_factor = number(v, key);
        else if (key == "duplicate_size_jitter") c.duplicate_size_jitter = number(v, key);
        else if (key == "duplicate_center_jitter") c.duplicate_center_jitter = number(v, key);
        else if (key == "misclassification_co_rate") c.misclassification_co_rate = number(v, key);
        else if (key == "errors_per_doc") {
            if (!v.is_number_integer()) throw ValidationError("config: 'errors_per_doc' must be an integer");
            c.errors_per_doc = v.get<int>();
        } else {
            throw ValidationError("config: unknown key '" + key + "'");
        }
    }
    c.validate();
    return base;
}

ResolvedConfig load_config(const std::filesystem::path& path, ResolvedConfig base) {
    return apply_config(parse_json(read_text_file(path), path.string()), std::move(base));
}

nlohmann::json to_json(const DetectorConfig& d) {
    return {{"existence_iou", d.existence_iou},
            {"split_fragment_max_iou", d.split_fragment_max_iou},
            {"split_coverage_min", d.split_coverage_min},
            {"duplicate_iou", d.duplicate_iou},
            {"misclassification_iou", d.misclassification_iou},
            {"overlap_iou", d.overlap_iou},
            {"size_ratio_min", d.size_ratio_min},
            {"size_ratio_max", d.size_ratio_max},
            {"size_center_tolerance", d.size_center_tolerance}};
}

nlohmann::json to_json(const InjectionConfig& c) {
    nlohmann::json dist = nlohmann::json::object();
    for (ErrorType t : kAllErrorTypes) dist[std::string(to_string(t))] = c.error_distribution[index_of(t)];
    return {{"seed", c.seed},
            {"error_distribution", dist},
            {"missing_rate", c.missing_rate},
            {"size_perturb_range", {c.size_perturb_range.first, c.size_perturb_range.second}},
            {"hallucination_max_iou", c.hallucination_max_iou},
            {"split_n_range", {c.split_n_range.first, c.split_n_range.second}},
            {"merge_proximity_factor", c.merge_proximity_factor},
            {"duplicate_size_jitter", c.duplicate_size_jitter},
            {"duplicate_center_jitter", c.duplicate_center_jitter},
            {"misclassification_co_rate", c.misclassification_co_rate},
            {"errors_per_doc", c.errors_per_doc}};
}

nlohmann::json to_json(const ResolvedConfig& cfg) {
    nlohmann::json j = to_json(cfg.detector);
    j.update(to_json(cfg.injection));
    return j;
}

}  // namespace led
