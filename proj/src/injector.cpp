#include "led/injector.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "led/errors.hpp"

namespace led {

namespace {

constexpr double kHallucinationMinSide = 0.05;  // of page width / height
constexpr double kHallucinationMaxSide = 0.30;
constexpr int kHallucinationAttempts = 1000;
constexpr int kSizeAttempts = 200;
constexpr int kSplitAttempts = 200;
constexpr int kDuplicateAttempts = 200;
constexpr double kSplitMaxGapFraction = 0.10;
constexpr double kSplitWidthJitter = 0.20;
constexpr double kSplitHeightJitter = 0.10;
// Sampled size ratios stay this far outside the accepted band.
constexpr double kSizeBandMargin = 0.05;
// Overlap growth stays this far inside the accepted band.
constexpr double kOverlapBandMargin = 0.02;
constexpr int kOverlapGridSteps = 32;
constexpr double kOverlapPartnerShares[] = {0.5, 0.8, 0.95};  // neighbor growth relative to the target's
constexpr int kMaxMergeNeighbors = 3;

const std::array<ErrorType, kErrorTypeCount> kExecutionOrder = {
    ErrorType::Missing, ErrorType::Merge,     ErrorType::Split,         ErrorType::SizeError,
    ErrorType::Overlap, ErrorType::Duplicate, ErrorType::Hallucination, ErrorType::Misclassification,
};

std::size_t execution_rank(ErrorType t) {
    return static_cast<std::size_t>(std::find(kExecutionOrder.begin(), kExecutionOrder.end(), t) -
                                    kExecutionOrder.begin());
}

InjectionOutcome skipped(ErrorType type, std::vector<ElementId> targets, std::string reason) {
    InjectionOutcome o;
    o.type = type;
    o.targets = std::move(targets);
    o.skip_reason = std::move(reason);
    return o;
}

bool in_band(double ratio, const DetectorConfig& rules) {
    return ratio >= rules.size_ratio_min && ratio <= rules.size_ratio_max;
}

}  // namespace

std::array<double, kErrorTypeCount> default_error_distribution() {
    std::array<double, kErrorTypeCount> d{};
    d[index_of(ErrorType::Missing)] = 0.63;
    d[index_of(ErrorType::Hallucination)] = 0.14;
    d[index_of(ErrorType::SizeError)] = 0.11;
    d[index_of(ErrorType::Misclassification)] = 0.08;
    d[index_of(ErrorType::Split)] = 0.01;
    d[index_of(ErrorType::Merge)] = 0.01;
    d[index_of(ErrorType::Overlap)] = 0.01;
    d[index_of(ErrorType::Duplicate)] = 0.01;
    return d;
}

void InjectionConfig::validate() const {
    double total = 0.0;
    for (ErrorType t : kAllErrorTypes) {
        const double w = error_distribution[index_of(t)];
        if (!std::isfinite(w) || w < 0.0) {
            throw ValidationError("error_distribution weight for '" + std::string(to_string(t)) + "' is negative");
        }
        total += w;
    }
    if (!(total > 0.0)) throw ValidationError("error_distribution is empty (weights sum to zero)");
    auto rate = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0,1]");
    };
    rate(missing_rate, "missing_rate");
    rate(hallucination_max_iou, "hallucination_max_iou");
    rate(duplicate_size_jitter, "duplicate_size_jitter");
    rate(duplicate_center_jitter, "duplicate_center_jitter");
    rate(misclassification_co_rate, "misclassification_co_rate");
    rate(size_perturb_range.first, "size_perturb_range");
    rate(size_perturb_range.second, "size_perturb_range");
    if (size_perturb_range.first > size_perturb_range.second) throw ValidationError("size_perturb_range is inverted");
    if (split_n_range.first < 2) throw ValidationError("split_n_range must start at 2 or more");
    if (split_n_range.first > split_n_range.second) throw ValidationError("split_n_range is inverted");
    if (!(merge_proximity_factor > 0.0)) throw ValidationError("merge_proximity_factor must be positive");
    if (errors_per_doc < 1) throw ValidationError("errors_per_doc must be at least 1");
}

SizeBands size_error_bands(const InjectionConfig& cfg, const DetectorConfig& rules) {
    const auto [lo, hi] = cfg.size_perturb_range;
    SizeBands b;
    b.enlarge_lo = std::max((1.0 + lo) * (1.0 + lo), rules.size_ratio_max + kSizeBandMargin);
    b.enlarge_hi = (1.0 + hi) * (1.0 + hi);
    b.shrink_lo = (1.0 - hi) * (1.0 - hi);
    b.shrink_hi = std::min((1.0 - lo) * (1.0 - lo), rules.size_ratio_min - kSizeBandMargin);
    return b;
}

BBox size_error_box(const BBox& b, double area_ratio) {
    const double s = std::sqrt(area_ratio);
    return scaled_about_center(b, s, s);
}

std::vector<BBox> split_segments(const BBox& b, double gap_total, std::span<const double> width_weights,
                                 std::span<const double> height_scales) {
    const std::size_t n = width_weights.size();
    if (n < 2 || height_scales.size() != n) throw InternalError("split_segments needs n >= 2 matching weights");
    double weight_sum = 0.0;
    for (double w : width_weights) weight_sum += w;
    const double usable = b.w() - gap_total;
    const double gap = gap_total / static_cast<double>(n - 1);
    const double cy = b.y() + b.h() / 2.0;
    std::vector<BBox> out;
    out.reserve(n);
    double x = b.x();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = usable * width_weights[i] / weight_sum;
        const double h = b.h() * height_scales[i];
        out.emplace_back(x, cy - h / 2.0, w, h);
        x += w + gap;
    }
    return out;
}

Injector::Injector(const DocumentLayout& gt, std::span<const Category> categories, const InjectionConfig& cfg,
                   const DetectorConfig& rules)
    : gt_(gt), categories_(categories.begin(), categories.end()), cfg_(cfg), rules_(rules), pred_(gt) {
    for (auto& e : pred_.elements) e.source = Source::Prediction;
    ann_.doc_id = gt.doc_id;
    next_id_ = gt.next_element_id();
}

bool Injector::untouched(ElementId id) const {
    return !touched_.count(id) && pred_.find(id) != nullptr && gt_.find(id) != nullptr;
}

std::size_t Injector::pred_pos(ElementId id) const {
    for (std::size_t i = 0; i < pred_.elements.size(); ++i) {
        if (pred_.elements[i].element_id == id) return i;
    }
    throw InternalError("element " + std::to_string(id) + " not in prediction");
}

double Injector::max_iou_excluding(const BBox& b, const std::set<ElementId>& skip) const {
    double m = 0.0;
    for (const auto& e : gt_.elements) {
        if (!skip.count(e.element_id)) m = std::max(m, iou(b, e.bbox));
    }
    for (const auto& e : pred_.elements) {
        if (!skip.count(e.element_id)) m = std::max(m, iou(b, e.bbox));
    }
    return m;
}

std::optional<BBox> Injector::clamp(const BBox& b) const {
    return clamp_to_page(b, pred_.page_width, pred_.page_height);
}

ErrorAnnotation Injector::annotation() const {
    ErrorAnnotation a = ann_;
    a.finalize();
    return a;
}

InjectionOutcome Injector::inject_missing(std::span<const ElementId> ids) {
    std::vector<ElementId> targets(ids.begin(), ids.end());
    if (targets.empty()) return skipped(ErrorType::Missing, targets, "no elements to remove");
    for (ElementId id : targets) {
        if (!untouched(id)) {
            return skipped(ErrorType::Missing, targets, "element " + std::to_string(id) + " is not an untouched element");
        }
    }
    for (ElementId id : targets) {
        pred_.elements.erase(pred_.elements.begin() + static_cast<std::ptrdiff_t>(pred_pos(id)));
        touched_.insert(id);
        ann_.missing_gt_ids.push_back(id);
    }
    InjectionOutcome o;
    o.type = ErrorType::Missing;
    o.applied = true;
    o.targets = targets;
    return o;
}

InjectionOutcome Injector::inject_hallucination(Rng& rng) {
    if (categories_.empty()) return skipped(ErrorType::Hallucination, {}, "dataset has no categories");
    const double pw = pred_.page_width, ph = pred_.page_height;
    if (!(pw > 0.0) || !(ph > 0.0)) return skipped(ErrorType::Hallucination, {}, "page size unknown");
    for (int attempt = 0; attempt < kHallucinationAttempts; ++attempt) {
        const double w = rng.uniform(kHallucinationMinSide, kHallucinationMaxSide) * pw;
        const double h = rng.uniform(kHallucinationMinSide, kHallucinationMaxSide) * ph;
        const BBox b(rng.uniform(0.0, pw - w), rng.uniform(0.0, ph - h), w, h);
        if (max_iou_excluding(b, {}) > cfg_.hallucination_max_iou) continue;
        const Category& cat = categories_[static_cast<std::size_t>(rng.below(categories_.size()))];
        const ElementId id = fresh_id();
        pred_.elements.push_back(LayoutElement{id, b, cat.id, Source::Prediction});
        touched_.insert(id);
        ann_.element_errors[id].insert(ErrorType::Hallucination);
        InjectionOutcome o;
        o.type = ErrorType::Hallucination;
        o.applied = true;
        o.produced = {id};
        o.params = {{"attempts", attempt + 1}};
        return o;
    }
    return skipped(ErrorType::Hallucination, {},
                   "no free region with IoU <= " + std::to_string(cfg_.hallucination_max_iou) + " after " +
                       std::to_string(kHallucinationAttempts) + " attempts");
}

InjectionOutcome Injector::inject_size_error(ElementId id, Rng& rng) {
    if (!untouched(id)) return skipped(ErrorType::SizeError, {id}, "target is not an untouched element");
    const BBox orig = pred_.elements[pred_pos(id)].bbox;
    const SizeBands bands = size_error_bands(cfg_, rules_);
    const double enlarge = std::max(0.0, bands.enlarge_hi - bands.enlarge_lo);
    const double shrink = std::max(0.0, bands.shrink_hi - bands.shrink_lo);
    if (!(enlarge + shrink > 0.0)) return skipped(ErrorType::SizeError, {id}, "empty size perturbation band");
    for (int attempt = 0; attempt < kSizeAttempts; ++attempt) {
        const double u = rng.uniform() * (enlarge + shrink);
        const double r = u < enlarge ? bands.enlarge_lo + u : bands.shrink_lo + (u - enlarge);
        const auto box = clamp(size_error_box(orig, r));
        if (!box) continue;
        const double ratio = area(*box) / area(orig);
        if (in_band(ratio, rules_)) continue;
        if (center_distance(*box, orig) > rules_.size_center_tolerance * diagonal(orig)) continue;
        if (max_iou_excluding(*box, {id}) > cfg_.hallucination_max_iou) continue;
        pred_.elements[pred_pos(id)].bbox = *box;
        touched_.insert(id);
        ann_.element_errors[id].insert(ErrorType::SizeError);
        InjectionOutcome o;
        o.type = ErrorType::SizeError;
        o.applied = true;
        o.targets = {id};
        o.produced = {id};
        o.params = {{"area_ratio", r}, {"linear_scale", std::sqrt(r)}, {"attempts", attempt + 1}};
        return o;
    }
    return skipped(ErrorType::SizeError, {id}, "no isolated resize found");
}

InjectionOutcome Injector::inject_split(ElementId id, Rng& rng) {
    if (!untouched(id)) return skipped(ErrorType::Split, {id}, "target is not an untouched element");
    const LayoutElement orig = pred_.elements[pred_pos(id)];
    for (int attempt = 0; attempt < kSplitAttempts; ++attempt) {
        const auto n = static_cast<std::size_t>(rng.between(cfg_.split_n_range.first, cfg_.split_n_range.second));
        const double gap_total = rng.uniform(0.0, kSplitMaxGapFraction) * orig.bbox.w();
        std::vector<double> weights(n), heights(n);
        for (auto& w : weights) w = rng.uniform(1.0 - kSplitWidthJitter, 1.0 + kSplitWidthJitter);
        for (auto& h : heights) h = rng.uniform(1.0 - kSplitHeightJitter, 1.0 + kSplitHeightJitter);
        std::vector<BBox> parts;
        bool ok = true;
        double coverage = 0.0;
        for (const BBox& seg : split_segments(orig.bbox, gap_total, weights, heights)) {
            const auto c = clamp(seg);
            if (!c) {
                ok = false;
                break;
            }
            const double v = iou(*c, orig.bbox);
            if (v < rules_.existence_iou || v >= rules_.split_fragment_max_iou ||
                max_iou_excluding(*c, {id}) > cfg_.hallucination_max_iou) {
                ok = false;
                break;
            }
            coverage += v;
            parts.push_back(*c);
        }
        if (!ok || coverage < rules_.split_coverage_min) continue;

        std::vector<LayoutElement> fragments;
        InjectionOutcome o;
        for (const BBox& b : parts) {
            const ElementId fid = fresh_id();
            fragments.push_back(LayoutElement{fid, b, orig.category_id, Source::Prediction});
            o.produced.push_back(fid);
            touched_.insert(fid);
            ann_.element_errors[fid].insert(ErrorType::Split);
        }
        const std::size_t pos = pred_pos(id);
        pred_.elements.erase(pred_.elements.begin() + static_cast<std::ptrdiff_t>(pos));
        pred_.elements.insert(pred_.elements.begin() + static_cast<std::ptrdiff_t>(pos), fragments.begin(),
                              fragments.end());
        touched_.insert(id);
        o.type = ErrorType::Split;
        o.applied = true;
        o.targets = {id};
        o.params = {{"segments", n}, {"gap_total", gap_total}, {"coverage", coverage}, {"attempts", attempt + 1}};
        return o;
    }
    return skipped(ErrorType::Split, {id}, "no fragmentation satisfied the split conditions");
}

bool Injector::merge_group_valid(const std::vector<ElementId>& members, BBox* merged) const {
    if (members.size() < 2) return false;
    std::vector<BBox> boxes;
    CategoryId cat = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (!untouched(members[i])) return false;
        const LayoutElement& e = pred_.elements[pred_pos(members[i])];
        if (i == 0) cat = e.category_id;
        if (e.category_id != cat) return false;
        boxes.push_back(e.bbox);
    }
    const auto u = clamp(union_rect(boxes));
    if (!u) return false;
    for (const BBox& b : boxes) {
        if (iou(*u, b) < rules_.existence_iou) return false;
    }
    // Untouched non-members keep their own match, so they only need to stay
    // below the thresholds at which they would join the merge or overlap it.
    const std::set<ElementId> skip(members.begin(), members.end());
    const double limit = std::min(rules_.existence_iou, rules_.overlap_iou);
    for (const auto* list : {&gt_.elements, &pred_.elements}) {
        for (const auto& e : *list) {
            if (skip.count(e.element_id)) continue;
            const double v = iou(*u, e.bbox);
            if (v >= limit || (!untouched(e.element_id) && v > cfg_.hallucination_max_iou)) return false;
        }
    }
    if (merged) *merged = *u;
    return true;
}

std::vector<std::vector<ElementId>> Injector::merge_groups() const {
    std::vector<const LayoutElement*> eligible;
    double mean_width = 0.0;
    for (const auto& e : pred_.elements) {
        mean_width += e.bbox.w();
        if (untouched(e.element_id)) eligible.push_back(&e);
    }
    if (pred_.elements.empty()) return {};
    mean_width /= static_cast<double>(pred_.elements.size());
    const double radius = cfg_.merge_proximity_factor * mean_width;

    std::set<std::vector<ElementId>> groups;
    for (const LayoutElement* seed : eligible) {
        std::vector<std::pair<double, const LayoutElement*>> near;
        for (const LayoutElement* e : eligible) {
            if (e == seed || e->category_id != seed->category_id) continue;
            const double d = center_distance(seed->bbox, e->bbox);
            if (d <= radius) near.emplace_back(d, e);
        }
        std::sort(near.begin(), near.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first < b.first : a.second->element_id < b.second->element_id;
        });
        std::vector<ElementId> group{seed->element_id};
        for (std::size_t k = 0; k < near.size() && k < static_cast<std::size_t>(kMaxMergeNeighbors); ++k) {
            group.push_back(near[k].second->element_id);
            std::vector<ElementId> sorted = group;
            std::sort(sorted.begin(), sorted.end());
            if (merge_group_valid(sorted, nullptr)) groups.insert(sorted);
        }
    }
    return {groups.begin(), groups.end()};
}

InjectionOutcome Injector::inject_merge(std::span<const ElementId> members_in) {
    std::vector<ElementId> members(members_in.begin(), members_in.end());
    std::sort(members.begin(), members.end());
    BBox merged(0, 0, 1, 1);
    if (!merge_group_valid(members, &merged)) {
        return skipped(ErrorType::Merge, members, "members do not form a recognizable merge");
    }
    const CategoryId cat = pred_.elements[pred_pos(members.front())].category_id;
    const std::size_t pos = pred_pos(members.front());
    const ElementId id = fresh_id();
    pred_.elements[pos] = LayoutElement{id, merged, cat, Source::Prediction};
    for (std::size_t i = 1; i < members.size(); ++i) {
        pred_.elements.erase(pred_.elements.begin() + static_cast<std::ptrdiff_t>(pred_pos(members[i])));
    }
    touched_.insert(members.begin(), members.end());
    touched_.insert(id);
    ann_.element_errors[id].insert(ErrorType::Merge);
    InjectionOutcome o;
    o.type = ErrorType::Merge;
    o.applied = true;
    o.targets = members;
    o.produced = {id};
    o.params = {{"members", members.size()}};
    return o;
}

InjectionOutcome Injector::inject_merge(Rng& rng) {
    const auto groups = merge_groups();
    if (groups.empty()) return skipped(ErrorType::Merge, {}, "needs >= 2 nearby same-category elements");
    return inject_merge(groups[static_cast<std::size_t>(rng.below(groups.size()))]);
}

std::vector<Injector::Growth> Injector::overlap_growths(ElementId id) const {
    std::vector<Growth> out;
    if (!untouched(id)) return out;
    const BBox orig = pred_.elements[pred_pos(id)].bbox;
    const double max_ratio = rules_.size_ratio_max - kOverlapBandMargin;
    if (!(max_ratio > 1.0)) return out;
    for (int mode = 0; mode < 3; ++mode) {
        for (int i = 1; i <= kOverlapGridSteps; ++i) {
            const double k = 1.0 + (max_ratio - 1.0) * i / kOverlapGridSteps;
            const double sx = mode == 0 ? 1.0 : (mode == 1 ? k : std::sqrt(k));
            const double sy = mode == 0 ? k : (mode == 1 ? 1.0 : std::sqrt(k));
            const auto box = clamp(scaled_about_center(orig, sx, sy));
            if (!box || !in_band(area(*box) / area(orig), rules_)) continue;
            bool ok = true;
            std::vector<ElementId> neighbors;
            auto check = [&](const LayoutElement& e) {
                if (e.element_id == id) return;
                const double v = iou(*box, e.bbox);
                if (v <= cfg_.hallucination_max_iou) return;
                if (!untouched(e.element_id)) {
                    ok = false;
                    return;
                }
                if (v >= rules_.overlap_iou) neighbors.push_back(e.element_id);
            };
            for (const auto& e : gt_.elements) check(e);
            for (const auto& e : pred_.elements) check(e);
            if (!ok || neighbors.empty()) continue;
            std::sort(neighbors.begin(), neighbors.end());
            neighbors.erase(std::unique(neighbors.begin(), neighbors.end()), neighbors.end());
            out.push_back(Growth{*box, sx, sy, std::move(neighbors), std::nullopt, std::nullopt});
        }
    }
    if (out.empty()) out = overlap_pair_growths(id);
    return out;
}

std::vector<Injector::Growth> Injector::overlap_pair_growths(ElementId id) const {
    std::vector<Growth> out;
    const BBox orig = pred_.elements[pred_pos(id)].bbox;
    const LayoutElement* gt_target = gt_.find(id);
    const double max_ratio = rules_.size_ratio_max - kOverlapBandMargin;
    if (!gt_target || !(max_ratio > 1.0)) return out;
    for (const auto& cand : pred_.elements) {
        const ElementId pid = cand.element_id;
        const LayoutElement* gt_partner = gt_.find(pid);
        if (pid == id || !untouched(pid) || !gt_partner) continue;
        const BBox pbox = cand.bbox;
        for (int mode = 0; mode < 3; ++mode) {
            for (int i = 1; i <= kOverlapGridSteps; ++i) {
              for (double share : kOverlapPartnerShares) {
                const double k = 1.0 + (max_ratio - 1.0) * i / kOverlapGridSteps;
                const double kp = 1.0 + (k - 1.0) * share;
                auto grow = [&](const BBox& b, double f) {
                    const double sx = mode == 0 ? 1.0 : (mode == 1 ? f : std::sqrt(f));
                    const double sy = mode == 0 ? f : (mode == 1 ? 1.0 : std::sqrt(f));
                    return clamp(scaled_about_center(b, sx, sy));
                };
                const auto box = grow(orig, k);
                const auto partner = grow(pbox, kp);
                if (!box || !partner) continue;
                if (!in_band(area(*box) / area(orig), rules_) || !in_band(area(*partner) / area(pbox), rules_)) {
                    continue;
                }
                if (iou(*box, *partner) < rules_.overlap_iou) continue;
                // The target must stay the worse-matched member of the pair so
                // the overlap is attributed to it alone, and each grown box
                // must still match its own GT best.
                const double own_t = iou(*box, gt_target->bbox), own_p = iou(*partner, gt_partner->bbox);
                if (!(own_t < own_p)) continue;
                if (iou(*box, gt_partner->bbox) >= own_t || iou(*partner, gt_target->bbox) >= own_p) continue;
                if (iou(*box, gt_partner->bbox) >= own_p || iou(*partner, gt_target->bbox) >= own_t) continue;
                // Other elements may touch the target only if untouched; the
                // partner must not overlap anything else enough to be flagged.
                bool ok = true;
                for (const auto* list : {&gt_.elements, &pred_.elements}) {
                    for (const auto& e : *list) {
                        if (e.element_id == id || e.element_id == pid) continue;
                        const double vt = iou(*box, e.bbox), vp = iou(*partner, e.bbox);
                        if (!untouched(e.element_id) && std::max(vt, vp) > cfg_.hallucination_max_iou) ok = false;
                        if (vp >= rules_.overlap_iou) ok = false;
                    }
                }
                if (!ok) continue;
                const double sx = mode == 0 ? 1.0 : (mode == 1 ? k : std::sqrt(k));
                const double sy = mode == 0 ? k : (mode == 1 ? 1.0 : std::sqrt(k));
                out.push_back(Growth{*box, sx, sy, {pid}, pid, *partner});
              }
            }
        }
    }
    return out;
}

std::vector<ElementId> Injector::overlap_neighbors(ElementId id) const {
    std::set<ElementId> all;
    for (const auto& g : overlap_growths(id)) all.insert(g.neighbors.begin(), g.neighbors.end());
    return {all.begin(), all.end()};
}

InjectionOutcome Injector::inject_overlap(ElementId id, Rng& rng) {
    if (!untouched(id)) return skipped(ErrorType::Overlap, {id}, "target is not an untouched element");
    const auto growths = overlap_growths(id);
    if (growths.empty()) {
        return skipped(ErrorType::Overlap, {id}, "no neighbor reachable within the accepted size band");
    }
    const Growth& g = growths[static_cast<std::size_t>(rng.below(growths.size()))];
    pred_.elements[pred_pos(id)].bbox = g.box;
    touched_.insert(id);
    ann_.element_errors[id].insert(ErrorType::Overlap);
    InjectionOutcome o;
    o.type = ErrorType::Overlap;
    o.applied = true;
    o.targets = {id};
    o.produced = {id};
    o.params = {{"scale_x", g.sx}, {"scale_y", g.sy}, {"neighbors", g.neighbors}};
    if (g.partner) {
        pred_.elements[pred_pos(*g.partner)].bbox = *g.partner_box;
        touched_.insert(*g.partner);
        o.produced.push_back(*g.partner);
        o.params["grown_neighbor"] = *g.partner;
    }
    return o;
}

InjectionOutcome Injector::inject_duplicate(ElementId id, Rng& rng, int copies) {
    if (!untouched(id)) return skipped(ErrorType::Duplicate, {id}, "target is not an untouched element");
    if (copies < 1) return skipped(ErrorType::Duplicate, {id}, "copy count must be positive");
    const LayoutElement orig = pred_.elements[pred_pos(id)];
    std::set<ElementId> skip{id};
    std::vector<LayoutElement> made;
    int total_attempts = 0;
    for (int c = 0; c < copies; ++c) {
        std::optional<BBox> chosen;
        for (int attempt = 0; attempt < kDuplicateAttempts && !chosen; ++attempt) {
            ++total_attempts;
            const double sj = cfg_.duplicate_size_jitter, cj = cfg_.duplicate_center_jitter;
            const double sx = 1.0 + rng.uniform(-sj, sj);
            const double sy = 1.0 + rng.uniform(-sj, sj);
            const double dx = rng.uniform(-cj, cj) * orig.bbox.w();
            const double dy = rng.uniform(-cj, cj) * orig.bbox.h();
            const auto box = clamp(translated(scaled_about_center(orig.bbox, sx, sy), dx, dy));
            if (!box || *box == orig.bbox) continue;
            if (iou(*box, orig.bbox) < rules_.duplicate_iou) continue;
            if (max_iou_excluding(*box, skip) > cfg_.hallucination_max_iou) continue;
            chosen = box;
        }
        // an exact copy always qualifies
        if (!chosen) chosen = orig.bbox;
        const ElementId nid = fresh_id();
        made.push_back(LayoutElement{nid, *chosen, orig.category_id, Source::Prediction});
        skip.insert(nid);
        pred_.elements.push_back(made.back());
    }
    InjectionOutcome o;
    for (const auto& e : made) {
        touched_.insert(e.element_id);
        ann_.element_errors[e.element_id].insert(ErrorType::Duplicate);
        o.produced.push_back(e.element_id);
    }
    touched_.insert(id);
    o.type = ErrorType::Duplicate;
    o.applied = true;
    o.targets = {id};
    o.params = {{"copies", copies}, {"attempts", total_attempts}};
    return o;
}

InjectionOutcome Injector::inject_misclassification(ElementId id, Rng& rng) {
    if (!pred_.find(id) || touched_.count(id)) {
        return skipped(ErrorType::Misclassification, {id}, "target is not an untouched element");
    }
    LayoutElement& e = pred_.elements[pred_pos(id)];
    std::vector<CategoryId> others;
    for (const auto& c : categories_) {
        if (c.id != e.category_id) others.push_back(c.id);
    }
    if (others.empty()) return skipped(ErrorType::Misclassification, {id}, "no other valid category label");
    const CategoryId from = e.category_id;
    e.category_id = others[static_cast<std::size_t>(rng.below(others.size()))];
    ann_.element_errors[id].insert(ErrorType::Misclassification);
    InjectionOutcome o;
    o.type = ErrorType::Misclassification;
    o.applied = true;
    o.targets = {id};
    o.produced = {id};
    o.params = {{"from_category", from}, {"to_category", e.category_id}};
    return o;
}

namespace {

class Planner {
public:
    Planner(const DocumentLayout& doc, std::span<const Category> categories, const InjectionConfig& cfg,
            std::uint64_t seed, const DetectorConfig& rules)
        : doc_(doc), categories_(categories), cfg_(cfg), rules_(rules), rng_(seed), probe_(doc, categories, cfg, rules) {
        cfg_.validate();
        plan_.doc_id = doc.doc_id;
        plan_.rng_seed = seed;
    }

    void add(ErrorType type, bool co_injected = false) {
        InjectionAction a;
        a.type = type;
        a.co_injected = co_injected;
        a.seed = derive_seed(plan_.rng_seed, static_cast<std::uint64_t>(plan_.actions.size()));
        choose_targets(a);
        for (ElementId id : a.targets) reserved_.insert(id);
        for (ElementId id : a.protects) reserved_.insert(id);
        plan_.actions.push_back(std::move(a));
    }

    void maybe_co_inject() {
        if (cfg_.misclassification_co_rate <= 0.0) return;
        const bool has_structural = std::any_of(plan_.actions.begin(), plan_.actions.end(), [](const auto& a) {
            return is_structural(a.type) && !a.skip_reason;
        });
        if (!has_structural) return;
        if (rng_.bernoulli(cfg_.misclassification_co_rate)) add(ErrorType::Misclassification, true);
    }

    ErrorType draw() {
        return kAllErrorTypes[rng_.categorical(cfg_.error_distribution)];
    }

    InjectionPlan take() { return std::move(plan_); }

private:
    std::vector<ElementId> eligible() const {
        std::vector<ElementId> out;
        for (const auto& e : doc_.elements) {
            if (!reserved_.count(e.element_id)) out.push_back(e.element_id);
        }
        return out;
    }

    void choose_targets(InjectionAction& a) {
        auto pool = eligible();
        switch (a.type) {
            case ErrorType::Missing: {
                if (pool.empty()) {
                    a.skip_reason = "no element available to remove";
                    return;
                }
                const auto n = static_cast<double>(doc_.elements.size());
                auto k = static_cast<std::size_t>(std::max<long long>(1, std::llround(cfg_.missing_rate * n)));
                k = std::min(k, pool.size());
                rng_.shuffle(pool);
                a.targets.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
                std::sort(a.targets.begin(), a.targets.end());
                return;
            }
            case ErrorType::Hallucination:
                return;
            case ErrorType::Merge: {
                std::vector<std::vector<ElementId>> groups;
                for (auto& g : probe_.merge_groups()) {
                    if (std::none_of(g.begin(), g.end(), [&](ElementId id) { return reserved_.count(id) > 0; })) {
                        groups.push_back(std::move(g));
                    }
                }
                if (groups.empty()) {
                    a.skip_reason = "needs >= 2 nearby same-category elements";
                    return;
                }
                a.targets = groups[static_cast<std::size_t>(rng_.below(groups.size()))];
                return;
            }
            case ErrorType::Overlap: {
                rng_.shuffle(pool);
                for (ElementId id : pool) {
                    const auto neighbors = probe_.overlap_neighbors(id);
                    if (neighbors.empty()) continue;
                    if (std::any_of(neighbors.begin(), neighbors.end(),
                                    [&](ElementId n) { return reserved_.count(n) > 0; })) {
                        continue;
                    }
                    a.targets = {id};
                    a.protects = neighbors;
                    return;
                }
                a.skip_reason = "no element can reach a neighbor within the accepted size band";
                return;
            }
            case ErrorType::Misclassification:
                if (categories_.size() < 2) {
                    a.skip_reason = "needs at least two categories";
                    return;
                }
                [[fallthrough]];
            case ErrorType::SizeError:
            case ErrorType::Split:
            case ErrorType::Duplicate: {
                if (pool.empty()) {
                    a.skip_reason = "no element available";
                    return;
                }
                rng_.shuffle(pool);
                if (a.type == ErrorType::SizeError) {
                    // prefer a target whose resize can stay isolated
                    for (ElementId id : pool) {
                        Injector trial(doc_, categories_, cfg_, rules_);
                        Rng probe_rng(a.seed);
                        if (trial.inject_size_error(id, probe_rng).applied) {
                            a.targets = {id};
                            return;
                        }
                    }
                    a.skip_reason = "no element can be resized in isolation";
                    return;
                }
                a.targets = {pool.front()};
                return;
            }
        }
    }

    const DocumentLayout& doc_;
    std::span<const Category> categories_;
    InjectionConfig cfg_;
    DetectorConfig rules_;
    Rng rng_;
    Injector probe_;
    InjectionPlan plan_;
    std::set<ElementId> reserved_;
};

}  // namespace

InjectionPlan sample_plan(const DocumentLayout& doc, std::span<const Category> categories,
                          const InjectionConfig& cfg, std::uint64_t seed, const DetectorConfig& rules) {
    Planner p(doc, categories, cfg, seed, rules);
    for (int i = 0; i < cfg.errors_per_doc; ++i) p.add(p.draw());
    p.maybe_co_inject();
    return p.take();
}

InjectionPlan plan_single(const DocumentLayout& doc, std::span<const Category> categories,
                          const InjectionConfig& cfg, ErrorType type, std::uint64_t seed,
                          const DetectorConfig& rules) {
    Planner p(doc, categories, cfg, seed, rules);
    p.add(type);
    if (type != ErrorType::Misclassification) p.maybe_co_inject();
    return p.take();
}

InjectionResult inject(const DocumentLayout& gt, std::span<const Category> categories, const InjectionPlan& plan,
                       const InjectionConfig& cfg, const DetectorConfig& rules) {
    if (plan.doc_id != gt.doc_id) throw ValidationError("plan is for '" + plan.doc_id + "', not '" + gt.doc_id + "'");
    std::vector<const InjectionAction*> ordered;
    for (const auto& a : plan.actions) ordered.push_back(&a);
    std::stable_sort(ordered.begin(), ordered.end(), [](const InjectionAction* a, const InjectionAction* b) {
        return execution_rank(a->type) < execution_rank(b->type);
    });

    Injector inj(gt, categories, cfg, rules);
    InjectionResult result;
    for (const InjectionAction* a : ordered) {
        InjectionOutcome o;
        if (a->skip_reason) {
            o = skipped(a->type, a->targets, *a->skip_reason);
        } else {
            Rng rng(a->seed);
            const ElementId first = a->targets.empty() ? 0 : a->targets.front();
            switch (a->type) {
                case ErrorType::Missing: o = inj.inject_missing(a->targets); break;
                case ErrorType::Hallucination: o = inj.inject_hallucination(rng); break;
                case ErrorType::SizeError: o = inj.inject_size_error(first, rng); break;
                case ErrorType::Split: o = inj.inject_split(first, rng); break;
                case ErrorType::Merge: o = inj.inject_merge(a->targets); break;
                case ErrorType::Overlap: o = inj.inject_overlap(first, rng); break;
                case ErrorType::Duplicate: o = inj.inject_duplicate(first, rng); break;
                case ErrorType::Misclassification: o = inj.inject_misclassification(first, rng); break;
            }
        }
        o.co_injected = a->co_injected;
        result.log.push_back(std::move(o));
    }
    result.prediction = inj.prediction();
    result.annotation = inj.annotation();
    return result;
}

nlohmann::json to_json(const InjectionPlan& plan) {
    nlohmann::json actions = nlohmann::json::array();
    for (const auto& a : plan.actions) {
        nlohmann::json j{{"type", to_string(a.type)},
                         {"targets", a.targets},
                         {"seed", a.seed},
                         {"co_injected", a.co_injected}};
        if (!a.protects.empty()) j["protects"] = a.protects;
        if (a.skip_reason) j["skip_reason"] = *a.skip_reason;
        actions.push_back(std::move(j));
    }
    return {{"doc_id", plan.doc_id}, {"rng_seed", plan.rng_seed}, {"actions", actions}};
}

nlohmann::json to_json(const InjectionOutcome& o) {
    nlohmann::json j{{"type", to_string(o.type)},
                     {"applied", o.applied},
                     {"co_injected", o.co_injected},
                     {"targets", o.targets},
                     {"produced", o.produced},
                     {"params", o.params}};
    if (!o.applied) j["skip_reason"] = o.skip_reason;
    return j;
}

}  // namespace led
