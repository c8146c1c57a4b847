#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pidtwin/symbols.hpp"
#include "pidtwin/topology.hpp"

namespace pidtwin {

struct ConfusionCounts {
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t fn = 0;
    uint64_t tn = 0;

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
};

/// Derived binary-classification metrics; a metric whose denominator is zero
/// stays unset instead of propagating NaN.
struct MetricReport {
    std::optional<double> recall;
    std::optional<double> precision;
    std::optional<double> f1;
    std::optional<double> accuracy;
    std::optional<double> specificity;
    std::optional<double> npv;
};

MetricReport metrics(const ConfusionCounts& c);

/// Per-prediction outcome of detection matching, ranked by descending score.
struct DetectionMatch {
    size_t pred_index = 0; // index into the input prediction list
    double score = 0.0;
    bool true_positive = false;
};

struct MatchOutcome {
    ConfusionCounts counts; // tn is always 0 for detection matching
    std::vector<DetectionMatch> ranked;
};

/// Greedy matching by descending score: a prediction matches the
/// highest-IoU unmatched ground truth of the same class with
/// IoU >= iou_threshold. Unmatched predictions are FPs, unmatched truths FNs.
MatchOutcome match_detections(const std::vector<SymbolDetection>& pred,
                              const std::vector<SymbolDetection>& truth,
                              double iou_threshold);

struct PRPoint {
    double threshold = 0.0; // prediction score at this rank
    double recall = 0.0;
    double precision = 0.0;
};

/// Precision-recall curve (one point per prediction rank, recall
/// non-decreasing) and its all-point interpolated area.
struct PRCurve {
    std::vector<PRPoint> points;
    double ap = 0.0;
};

PRCurve average_precision(const std::vector<SymbolDetection>& pred,
                          const std::vector<SymbolDetection>& truth, double iou_threshold);

/// Curve from pre-matched detections, e.g. pooled over several plans.
/// Matches are re-ranked by descending score; truth_count is the total number
/// of ground-truth boxes. Zero truths yield an empty curve.
PRCurve curve_from_matches(std::vector<DetectionMatch> matches, uint64_t truth_count);

/// Scores a predicted connection matrix against ground truth over the universe
/// of all unordered symbol pairs. Requires identical symbol id sets (row order
/// may differ); throws SymbolSetMismatch otherwise.
ConfusionCounts score_connections(const ConnectionMatrix& pred, const ConnectionMatrix& truth);

} // namespace pidtwin
