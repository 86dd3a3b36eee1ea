#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "led/detector.hpp"
#include "led/layout.hpp"
#include "led/rng.hpp"

namespace led {

/// Weights for Missing, Hallucination, Size, Split, Merge, Overlap,
/// Duplicate, Misclassification (enumeration order), as observed for a
/// production detector: 63/14/11/1/1/1/1/8 percent.
std::array<double, kErrorTypeCount> default_error_distribution();

struct InjectionConfig {
    std::uint64_t seed = 0;
    std::array<double, kErrorTypeCount> error_distribution = default_error_distribution();
    double missing_rate = 0.10;
    std::pair<double, double> size_perturb_range{0.10, 0.30};
    double hallucination_max_iou = 0.01;
    std::pair<int, int> split_n_range{2, 4};
    double merge_proximity_factor = 1.5;
    double duplicate_size_jitter = 0.10;
    double duplicate_center_jitter = 0.10;
    double misclassification_co_rate = 0.0;
    int errors_per_doc = 1;

    /// Throws ValidationError on negative weights, a zero-sum distribution,
    /// rates outside [0,1] or inverted ranges.
    void validate() const;

    friend bool operator==(const InjectionConfig&, const InjectionConfig&) = default;
};

/// Area-ratio bands sampled for Size errors: the squared linear perturbation
/// range, restricted to ratios the size rule actually flags.
struct SizeBands {
    double enlarge_lo = 0.0, enlarge_hi = 0.0;
    double shrink_lo = 0.0, shrink_hi = 0.0;
};
SizeBands size_error_bands(const InjectionConfig& cfg, const DetectorConfig& rules = {});

/// Box scaled about its center so its area changes by `area_ratio`.
BBox size_error_box(const BBox& b, double area_ratio);

/// Cuts `b` into side-by-side segments. `gap_total` is spread evenly between
/// the segments, widths follow `width_weights`, and each segment height is
/// the original times `height_scales[i]`, centered vertically.
std::vector<BBox> split_segments(const BBox& b, double gap_total, std::span<const double> width_weights,
                                 std::span<const double> height_scales);

struct InjectionAction {
    ErrorType type = ErrorType::Missing;
    std::vector<ElementId> targets;
    /// Elements the action relies on staying untouched (Overlap neighbors).
    std::vector<ElementId> protects;
    std::uint64_t seed = 0;
    bool co_injected = false;
    std::optional<std::string> skip_reason;

    friend bool operator==(const InjectionAction&, const InjectionAction&) = default;
};

struct InjectionPlan {
    std::string doc_id;
    std::uint64_t rng_seed = 0;
    std::vector<InjectionAction> actions;

    friend bool operator==(const InjectionPlan&, const InjectionPlan&) = default;
};

/// Draws `errors_per_doc` types from the configured distribution and picks
/// targets without replacement; optionally adds a co-injected
/// Misclassification. Infeasible actions are kept with a skip reason.
InjectionPlan sample_plan(const DocumentLayout& doc, std::span<const Category> categories,
                          const InjectionConfig& cfg, std::uint64_t seed, const DetectorConfig& rules = {});

/// Plan with exactly one drawn action of type `type` (plus a possible
/// co-injected Misclassification).
InjectionPlan plan_single(const DocumentLayout& doc, std::span<const Category> categories,
                          const InjectionConfig& cfg, ErrorType type, std::uint64_t seed,
                          const DetectorConfig& rules = {});

/// Outcome of one injection step.
struct InjectionOutcome {
    ErrorType type = ErrorType::Missing;
    bool applied = false;
    bool co_injected = false;
    std::vector<ElementId> targets;
    std::vector<ElementId> produced;
    std::string skip_reason;
    nlohmann::json params = nlohmann::json::object();
};

/// Mutable prediction under construction from one GT layout. Each inject_*
/// call applies one procedure, verifies the geometric conditions that make
/// the result recognizable by the detection rules, and either commits or
/// leaves the prediction unchanged and reports a skip reason.
class Injector {
public:
    Injector(const DocumentLayout& gt, std::span<const Category> categories, const InjectionConfig& cfg,
             const DetectorConfig& rules = {});

    InjectionOutcome inject_missing(std::span<const ElementId> ids);
    InjectionOutcome inject_hallucination(Rng& rng);
    InjectionOutcome inject_size_error(ElementId id, Rng& rng);
    InjectionOutcome inject_split(ElementId id, Rng& rng);
    /// Merges the given same-category elements into their bounding rectangle.
    InjectionOutcome inject_merge(std::span<const ElementId> members);
    /// Picks a random feasible merge group first.
    InjectionOutcome inject_merge(Rng& rng);
    InjectionOutcome inject_overlap(ElementId id, Rng& rng);
    InjectionOutcome inject_duplicate(ElementId id, Rng& rng, int copies = 1);
    InjectionOutcome inject_misclassification(ElementId id, Rng& rng);

    const DocumentLayout& prediction() const { return pred_; }
    /// Annotation of everything applied so far.
    ErrorAnnotation annotation() const;

    /// Same-category groups of untouched elements that would merge into a
    /// box recognizable as a Merge.
    std::vector<std::vector<ElementId>> merge_groups() const;
    /// Untouched neighbors that some growth of `id` about its center overlaps
    /// enough to be recognized as Overlap without becoming a Size error.
    /// When growing `id` alone cannot get there, growths that also enlarge
    /// one neighbor (less than the target) are considered. Empty when no
    /// growth exists.
    std::vector<ElementId> overlap_neighbors(ElementId id) const;

private:
    struct Growth {
        BBox box;
        double sx, sy;
        std::vector<ElementId> neighbors;
        // Set when a neighbor is grown too, by a smaller factor.
        std::optional<ElementId> partner;
        std::optional<BBox> partner_box;
    };

    bool untouched(ElementId id) const;
    std::size_t pred_pos(ElementId id) const;
    /// Largest IoU of `b` against GT and prediction elements outside `skip`.
    double max_iou_excluding(const BBox& b, const std::set<ElementId>& skip) const;
    std::optional<BBox> clamp(const BBox& b) const;
    bool merge_group_valid(const std::vector<ElementId>& members, BBox* merged) const;
    std::vector<Growth> overlap_growths(ElementId id) const;
    std::vector<Growth> overlap_pair_growths(ElementId id) const;
    ElementId fresh_id() { return next_id_++; }

    const DocumentLayout& gt_;
    std::vector<Category> categories_;
    InjectionConfig cfg_;
    DetectorConfig rules_;
    DocumentLayout pred_;
    std::set<ElementId> touched_;
    ErrorAnnotation ann_;
    ElementId next_id_;
};

struct InjectionResult {
    DocumentLayout prediction;
    ErrorAnnotation annotation;
    std::vector<InjectionOutcome> log;
};

/// Executes a plan in the fixed order Missing, Merge, Split, Size, Overlap,
/// Duplicate, Hallucination, Misclassification. The annotation lists exactly
/// the applied actions.
InjectionResult inject(const DocumentLayout& gt, std::span<const Category> categories, const InjectionPlan& plan,
                       const InjectionConfig& cfg, const DetectorConfig& rules = {});

nlohmann::json to_json(const InjectionPlan& plan);
nlohmann::json to_json(const InjectionOutcome& outcome);

}  // namespace led
