#include "led/detector.hpp"

#include <algorithm>
#include <numeric>

#include <omp.h>

#include "led/errors.hpp"
#include "led/parallel.hpp"

namespace led {

std::vector<double> iou_matrix_serial(std::span<const BBox> rows, std::span<const BBox> cols) {
    std::vector<double> out(rows.size() * cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) out[r * cols.size() + c] = iou(rows[r], cols[c]);
    }
    return out;
}

std::vector<double> iou_matrix_parallel(std::span<const BBox> rows, std::span<const BBox> cols, int jobs) {
    std::vector<double> out(rows.size() * cols.size());
    const long long n_rows = static_cast<long long>(rows.size());
    const std::size_t n_cols = cols.size();
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for num_threads(threads) schedule(static)
    for (long long r = 0; r < n_rows; ++r) {
        const BBox& a = rows[static_cast<std::size_t>(r)];
        double* row = out.data() + static_cast<std::size_t>(r) * n_cols;
        for (std::size_t c = 0; c < n_cols; ++c) row[c] = iou(a, cols[c]);
    }
    return out;
}

namespace {

constexpr std::size_t kParallelCells = std::size_t{1} << 14;

std::vector<LayoutElement> sorted_by_id(std::vector<LayoutElement> v) {
    std::stable_sort(v.begin(), v.end(),
                     [](const LayoutElement& a, const LayoutElement& b) { return a.element_id < b.element_id; });
    return v;
}

std::vector<BBox> boxes_of(const std::vector<LayoutElement>& v) {
    std::vector<BBox> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(e.bbox);
    return out;
}

bool is_excluded(const PredMask& mask, std::size_t p) { return p < mask.size() && mask[p]; }

}  // namespace

MatchTable::MatchTable(std::vector<LayoutElement> gt, std::vector<LayoutElement> pred, Kernel kernel)
    : gt_(sorted_by_id(std::move(gt))), pred_(sorted_by_id(std::move(pred))) {
    const auto gb = boxes_of(gt_);
    const auto pb = boxes_of(pred_);
    const bool parallel =
        kernel == Kernel::Parallel || (kernel == Kernel::Auto && gb.size() * pb.size() >= kParallelCells);
    iou_ = parallel ? iou_matrix_parallel(gb, pb) : iou_matrix_serial(gb, pb);

    candidates_.resize(gt_.size());
    for (std::size_t g = 0; g < gt_.size(); ++g) {
        auto& c = candidates_[g];
        for (std::size_t p = 0; p < pred_.size(); ++p) {
            if (at(g, p) > 0.0) c.push_back(p);
        }
        std::stable_sort(c.begin(), c.end(), [&](std::size_t a, std::size_t b) { return at(g, a) > at(g, b); });
    }
}

std::optional<std::size_t> MatchTable::best_gt(std::size_t p) const {
    std::optional<std::size_t> best;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gt_.size(); ++g) {
        if (at(g, p) > best_iou) {
            best_iou = at(g, p);
            best = g;
        }
    }
    return best;
}

std::optional<std::size_t> MatchTable::best_pred(std::size_t g) const {
    if (candidates_[g].empty()) return std::nullopt;
    return candidates_[g].front();
}

double MatchTable::best_gt_iou(std::size_t p) const {
    double best = 0.0;
    for (std::size_t g = 0; g < gt_.size(); ++g) best = std::max(best, at(g, p));
    return best;
}

std::size_t MatchTable::pred_index(ElementId id) const {
    auto it = std::lower_bound(pred_.begin(), pred_.end(), id,
                               [](const LayoutElement& e, ElementId v) { return e.element_id < v; });
    if (it == pred_.end() || it->element_id != id) {
        throw InternalError("prediction id " + std::to_string(id) + " not in match table");
    }
    return static_cast<std::size_t>(it - pred_.begin());
}

MatchTable build_match_table(std::span<const LayoutElement> gt, std::span<const LayoutElement> pred, Kernel kernel) {
    return MatchTable({gt.begin(), gt.end()}, {pred.begin(), pred.end()}, kernel);
}

std::vector<ElementId> detect_missing(const MatchTable& t, const DetectorConfig& cfg) {
    std::vector<ElementId> out;
    for (std::size_t g = 0; g < t.n_gt(); ++g) {
        const auto& c = t.candidates(g);
        if (c.empty() || t.at(g, c.front()) < cfg.existence_iou) out.push_back(t.gt()[g].element_id);
    }
    return out;
}

std::vector<ElementId> detect_hallucination(const MatchTable& t, const DetectorConfig& cfg) {
    std::vector<ElementId> out;
    for (std::size_t p = 0; p < t.n_pred(); ++p) {
        if (t.best_gt_iou(p) < cfg.existence_iou) out.push_back(t.pred()[p].element_id);
    }
    return out;
}

std::vector<GroupMatch> detect_duplicate(const MatchTable& t, const DetectorConfig& cfg, const PredMask& excluded) {
    std::vector<GroupMatch> out;
    std::vector<bool> used(t.n_pred(), false);
    for (std::size_t g = 0; g < t.n_gt(); ++g) {
        std::vector<std::size_t> strong;
        // candidates are already IoU-descending with id tie-break
        for (std::size_t p : t.candidates(g)) {
            if (t.at(g, p) < cfg.duplicate_iou) break;
            if (!is_excluded(excluded, p) && !used[p]) strong.push_back(p);
        }
        if (strong.size() < 2) continue;
        GroupMatch m{t.gt()[g].element_id, {}};
        used[strong.front()] = true;
        for (std::size_t i = 1; i < strong.size(); ++i) {
            used[strong[i]] = true;
            m.members.push_back(t.pred()[strong[i]].element_id);
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<GroupMatch> detect_split(const MatchTable& t, const DetectorConfig& cfg, const PredMask& excluded) {
    std::vector<GroupMatch> out;
    for (std::size_t g = 0; g < t.n_gt(); ++g) {
        std::vector<std::size_t> fragments;
        double coverage = 0.0;
        for (std::size_t p : t.candidates(g)) {
            const double v = t.at(g, p);
            if (is_excluded(excluded, p) || v < cfg.existence_iou || v >= cfg.split_fragment_max_iou) continue;
            if (t.best_gt(p) != g) continue;
            fragments.push_back(p);
            coverage += v;
        }
        if (fragments.size() < 2 || coverage < cfg.split_coverage_min) continue;
        std::sort(fragments.begin(), fragments.end());
        GroupMatch m{t.gt()[g].element_id, {}};
        for (std::size_t p : fragments) m.members.push_back(t.pred()[p].element_id);
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<GroupMatch> detect_merge(const MatchTable& t, const DetectorConfig& cfg, const PredMask& excluded) {
    std::vector<std::vector<ElementId>> absorbed(t.n_pred());
    for (std::size_t g = 0; g < t.n_gt(); ++g) {
        const auto best = t.best_pred(g);
        if (!best || is_excluded(excluded, *best) || t.at(g, *best) < cfg.existence_iou) continue;
        absorbed[*best].push_back(t.gt()[g].element_id);
    }
    std::vector<GroupMatch> out;
    for (std::size_t p = 0; p < t.n_pred(); ++p) {
        if (absorbed[p].size() >= 2) out.push_back(GroupMatch{t.pred()[p].element_id, absorbed[p]});
    }
    return out;
}

std::vector<ElementId> detect_size_error(const MatchTable& t, const DetectorConfig& cfg, const PredMask& excluded) {
    std::vector<ElementId> out;
    for (std::size_t p = 0; p < t.n_pred(); ++p) {
        if (is_excluded(excluded, p)) continue;
        const auto g = t.best_gt(p);
        if (!g || t.at(*g, p) < cfg.existence_iou) continue;
        const BBox& gb = t.gt()[*g].bbox;
        const BBox& pb = t.pred()[p].bbox;
        if (center_distance(gb, pb) > cfg.size_center_tolerance * diagonal(gb)) continue;
        const double ratio = area(pb) / area(gb);
        if (ratio < cfg.size_ratio_min || ratio > cfg.size_ratio_max) out.push_back(t.pred()[p].element_id);
    }
    return out;
}

std::vector<std::pair<ElementId, ElementId>> detect_overlap(const MatchTable& t, const DetectorConfig& cfg,
                                                            const PredMask& excluded) {
    std::vector<std::pair<ElementId, ElementId>> out;
    const auto& pred = t.pred();
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (is_excluded(excluded, i)) continue;
        for (std::size_t j = i + 1; j < pred.size(); ++j) {
            if (is_excluded(excluded, j)) continue;
            if (iou(pred[i].bbox, pred[j].bbox) >= cfg.overlap_iou) {
                out.emplace_back(pred[i].element_id, pred[j].element_id);
            }
        }
    }
    return out;
}

std::vector<std::pair<ElementId, ElementId>> detect_overlap(std::span<const LayoutElement> pred,
                                                            const DetectorConfig& cfg) {
    return detect_overlap(build_match_table({}, pred), cfg);
}

std::vector<ElementId> detect_misclassification(const MatchTable& t, const DetectorConfig& cfg) {
    std::vector<ElementId> out;
    for (std::size_t p = 0; p < t.n_pred(); ++p) {
        for (std::size_t g = 0; g < t.n_gt(); ++g) {
            if (t.at(g, p) >= cfg.misclassification_iou && t.gt()[g].category_id != t.pred()[p].category_id) {
                out.push_back(t.pred()[p].element_id);
                break;
            }
        }
    }
    return out;
}

ErrorAnnotation DiagnosisReport::to_annotation() const {
    ErrorAnnotation ann;
    ann.doc_id = doc_id;
    for (const auto& [id, types] : per_pred) {
        if (!types.empty()) ann.element_errors[id] = types;
    }
    ann.missing_gt_ids = per_gt_missing;
    ann.finalize();
    return ann;
}

DiagnosisReport diagnose(const DocumentLayout& gt, const DocumentLayout& pred, const DetectorConfig& cfg,
                         Kernel kernel) {
    if (gt.doc_id != pred.doc_id) {
        throw ValidationError("diagnose: doc_id mismatch ('" + gt.doc_id + "' vs '" + pred.doc_id + "')");
    }
    const MatchTable t(gt.elements, pred.elements, kernel);
    DiagnosisReport r;
    r.doc_id = gt.doc_id;
    PredMask labeled(t.n_pred(), false);

    auto label = [&](ElementId id, ErrorType type) {
        const std::size_t p = t.pred_index(id);
        if (is_structural(type)) {
            if (labeled[p]) throw InternalError("prediction " + std::to_string(id) + " labeled twice");
            labeled[p] = true;
        }
        r.per_pred[id].insert(type);
    };

    r.per_gt_missing = detect_missing(t, cfg);
    for (ElementId id : detect_hallucination(t, cfg)) label(id, ErrorType::Hallucination);
    for (const auto& m : detect_duplicate(t, cfg, labeled)) {
        for (ElementId id : m.members) label(id, ErrorType::Duplicate);
    }
    for (const auto& m : detect_split(t, cfg, labeled)) {
        for (ElementId id : m.members) label(id, ErrorType::Split);
    }
    for (const auto& m : detect_merge(t, cfg, labeled)) label(m.anchor, ErrorType::Merge);
    for (ElementId id : detect_size_error(t, cfg, labeled)) label(id, ErrorType::SizeError);

    // An overlapping pair is attributed to the member that fits its own GT
    // worse; both members when they fit equally well.
    PredMask overlapped(t.n_pred(), false);
    for (const auto& [a, b] : detect_overlap(t, cfg, labeled)) {
        const std::size_t pa = t.pred_index(a);
        const std::size_t pb = t.pred_index(b);
        const double fa = t.best_gt_iou(pa);
        const double fb = t.best_gt_iou(pb);
        if (fa <= fb) overlapped[pa] = true;
        if (fb <= fa) overlapped[pb] = true;
    }
    for (std::size_t p = 0; p < t.n_pred(); ++p) {
        if (overlapped[p]) label(t.pred()[p].element_id, ErrorType::Overlap);
    }

    for (ElementId id : detect_misclassification(t, cfg)) label(id, ErrorType::Misclassification);

    for (const auto& [id, types] : r.per_pred) r.doc_error_types |= types;
    if (!r.per_gt_missing.empty()) r.doc_error_types.insert(ErrorType::Missing);
    r.has_error = !r.doc_error_types.empty();
    return r;
}

std::vector<DiagnosisReport> diagnose_batch_serial(std::span<const DocumentPair> docs, const DetectorConfig& cfg) {
    std::vector<DiagnosisReport> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(diagnose(*d.gt, *d.pred, cfg, Kernel::Serial));
    return out;
}

std::vector<DiagnosisReport> diagnose_batch(std::span<const DocumentPair> docs, const DetectorConfig& cfg, int jobs) {
    std::vector<DiagnosisReport> out(docs.size());
    parallel_for(docs.size(), jobs,
                 [&](std::size_t i) { out[i] = diagnose(*docs[i].gt, *docs[i].pred, cfg, Kernel::Serial); });
    return out;
}

}  // namespace led
