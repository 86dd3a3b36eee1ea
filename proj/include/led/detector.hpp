#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "led/layout.hpp"

namespace led {

/// Rule thresholds. Defaults are the published values; comparisons use them
/// exactly as written (>=, <, outside the closed band) with no slack.
struct DetectorConfig {
    double existence_iou = 0.1;           // Missing / Hallucination / Merge membership
    double split_fragment_max_iou = 0.5;  // every fragment strictly below
    double split_coverage_min = 0.5;      // summed fragment IoU at least
    double duplicate_iou = 0.9;
    double misclassification_iou = 0.9;
    double overlap_iou = 0.1;
    double size_ratio_min = 0.6;
    double size_ratio_max = 1.4;
    double size_center_tolerance = 0.25;  // fraction of the GT diagonal

    friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

/// Dense row-major IoU matrix, reference implementation.
std::vector<double> iou_matrix_serial(std::span<const BBox> rows, std::span<const BBox> cols);
/// OpenMP version of iou_matrix_serial; bit-identical output.
std::vector<double> iou_matrix_parallel(std::span<const BBox> rows, std::span<const BBox> cols, int jobs = 0);

enum class Kernel { Auto, Serial, Parallel };

/// Pairwise GT x prediction IoU with elements ordered by element id.
class MatchTable {
public:
    MatchTable(std::vector<LayoutElement> gt, std::vector<LayoutElement> pred, Kernel kernel = Kernel::Auto);

    std::size_t n_gt() const { return gt_.size(); }
    std::size_t n_pred() const { return pred_.size(); }
    const std::vector<LayoutElement>& gt() const { return gt_; }
    const std::vector<LayoutElement>& pred() const { return pred_; }

    double at(std::size_t g, std::size_t p) const { return iou_[g * pred_.size() + p]; }
    const std::vector<double>& matrix() const { return iou_; }

    /// Prediction indices with non-zero IoU against GT `g`, IoU descending,
    /// ties by lower element id.
    const std::vector<std::size_t>& candidates(std::size_t g) const { return candidates_[g]; }

    /// Highest-IoU GT for prediction `p` (ties: lower element id); nothing if
    /// the prediction touches no GT.
    std::optional<std::size_t> best_gt(std::size_t p) const;
    std::optional<std::size_t> best_pred(std::size_t g) const;
    double best_gt_iou(std::size_t p) const;

    std::size_t pred_index(ElementId id) const;

private:
    std::vector<LayoutElement> gt_;
    std::vector<LayoutElement> pred_;
    std::vector<double> iou_;
    std::vector<std::vector<std::size_t>> candidates_;
};

MatchTable build_match_table(std::span<const LayoutElement> gt, std::span<const LayoutElement> pred,
                             Kernel kernel = Kernel::Auto);

/// Predictions already carrying a structural label, by prediction index.
/// Detectors skip these; an empty mask means nothing is excluded.
using PredMask = std::vector<bool>;

/// A relation between one anchor element and a group of others, e.g. a GT
/// and its duplicate predictions or a prediction and the GTs it merged.
struct GroupMatch {
    ElementId anchor = 0;
    std::vector<ElementId> members;

    friend bool operator==(const GroupMatch&, const GroupMatch&) = default;
};

std::vector<ElementId> detect_missing(const MatchTable& t, const DetectorConfig& cfg = {});
std::vector<ElementId> detect_hallucination(const MatchTable& t, const DetectorConfig& cfg = {});
/// (gt, extra predictions); the best match of each GT is kept as legitimate.
std::vector<GroupMatch> detect_duplicate(const MatchTable& t, const DetectorConfig& cfg = {},
                                         const PredMask& excluded = {});
/// (gt, fragments)
std::vector<GroupMatch> detect_split(const MatchTable& t, const DetectorConfig& cfg = {},
                                     const PredMask& excluded = {});
/// (prediction, merged GTs)
std::vector<GroupMatch> detect_merge(const MatchTable& t, const DetectorConfig& cfg = {},
                                     const PredMask& excluded = {});
std::vector<ElementId> detect_size_error(const MatchTable& t, const DetectorConfig& cfg = {},
                                         const PredMask& excluded = {});
/// Unordered prediction pairs (lower id first) with IoU at or above the
/// overlap threshold, among predictions not excluded.
std::vector<std::pair<ElementId, ElementId>> detect_overlap(const MatchTable& t, const DetectorConfig& cfg = {},
                                                            const PredMask& excluded = {});
std::vector<std::pair<ElementId, ElementId>> detect_overlap(std::span<const LayoutElement> pred,
                                                            const DetectorConfig& cfg = {});
std::vector<ElementId> detect_misclassification(const MatchTable& t, const DetectorConfig& cfg = {});

struct DiagnosisReport {
    std::string doc_id;
    std::map<ElementId, ErrorSet> per_pred;
    std::vector<ElementId> per_gt_missing;
    ErrorSet doc_error_types;
    bool has_error = false;

    ErrorAnnotation to_annotation() const;

    friend bool operator==(const DiagnosisReport&, const DiagnosisReport&) = default;
};

/// Runs every rule in precedence order: existence (Missing/Hallucination),
/// Duplicate, Split, Merge, Size, Overlap; Misclassification independently.
/// A prediction receives at most one structural label.
DiagnosisReport diagnose(const DocumentLayout& gt, const DocumentLayout& pred, const DetectorConfig& cfg = {},
                         Kernel kernel = Kernel::Auto);

struct DocumentPair {
    const DocumentLayout* gt = nullptr;
    const DocumentLayout* pred = nullptr;
};

std::vector<DiagnosisReport> diagnose_batch_serial(std::span<const DocumentPair> docs, const DetectorConfig& cfg = {});
std::vector<DiagnosisReport> diagnose_batch(std::span<const DocumentPair> docs, const DetectorConfig& cfg = {},
                                            int jobs = 0);

}  // namespace led
