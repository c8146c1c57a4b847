#include "pidtwin/eval.hpp"

#include <algorithm>

#include "pidtwin/errors.hpp"

namespace pidtwin {

MetricReport metrics(const ConfusionCounts& c) {
    MetricReport r;
    const auto ratio = [](uint64_t num, uint64_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return double(num) / double(den);
    };
    r.recall = ratio(c.tp, c.tp + c.fn);
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
    r.accuracy = ratio(c.tp + c.tn, c.tp + c.fp + c.fn + c.tn);
    r.specificity = ratio(c.tn, c.tn + c.fp);
    r.npv = ratio(c.tn, c.tn + c.fn);
    return r;
}

namespace {

bool rank_less(const SymbolDetection& a, const SymbolDetection& b) {
    if (a.score != b.score) return a.score > b.score;
    if (!(a.bbox == b.bbox)) return bbox_less(a.bbox, b.bbox);
    if (a.cls != b.cls) return a.cls < b.cls;
    return a.id < b.id;
}

} // namespace

MatchOutcome match_detections(const std::vector<SymbolDetection>& pred,
                              const std::vector<SymbolDetection>& truth,
                              double iou_threshold) {
    std::vector<size_t> order(pred.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return rank_less(pred[a], pred[b]); });

    MatchOutcome out;
    std::vector<bool> truth_taken(truth.size(), false);
    for (size_t pi : order) {
        const auto& p = pred[pi];
        size_t best_t = truth.size();
        double best_iou = 0.0;
        for (size_t ti = 0; ti < truth.size(); ++ti) {
            if (truth_taken[ti] || truth[ti].cls != p.cls) continue;
            const double v = iou(p.bbox, truth[ti].bbox);
            if (v >= iou_threshold && v > best_iou) {
                best_iou = v;
                best_t = ti;
            }
        }
        DetectionMatch dm;
        dm.pred_index = pi;
        dm.score = p.score;
        if (best_t < truth.size()) {
            truth_taken[best_t] = true;
            dm.true_positive = true;
            ++out.counts.tp;
        } else {
            ++out.counts.fp;
        }
        out.ranked.push_back(dm);
    }
    out.counts.fn = truth.size() - size_t(out.counts.tp);
    return out;
}

PRCurve average_precision(const std::vector<SymbolDetection>& pred,
                          const std::vector<SymbolDetection>& truth, double iou_threshold) {
    if (truth.empty()) return {}; // no positives to recall
    return curve_from_matches(match_detections(pred, truth, iou_threshold).ranked,
                              truth.size());
}

PRCurve curve_from_matches(std::vector<DetectionMatch> matches, uint64_t truth_count) {
    PRCurve curve;
    if (truth_count == 0) return curve;
    std::stable_sort(matches.begin(), matches.end(),
                     [](const DetectionMatch& a, const DetectionMatch& b) {
                         return a.score > b.score;
                     });

    uint64_t tp = 0;
    for (size_t k = 0; k < matches.size(); ++k) {
        if (matches[k].true_positive) ++tp;
        PRPoint pt;
        pt.threshold = matches[k].score;
        pt.recall = double(tp) / double(truth_count);
        pt.precision = double(tp) / double(k + 1);
        curve.points.push_back(pt);
    }

    // All-point interpolation: at each rank use the best precision achieved
    // at that recall or any higher one.
    std::vector<double> interp(curve.points.size());
    double run = 0.0;
    for (size_t k = curve.points.size(); k-- > 0;) {
        run = std::max(run, curve.points[k].precision);
        interp[k] = run;
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (size_t k = 0; k < curve.points.size(); ++k) {
        ap += (curve.points[k].recall - prev_recall) * interp[k];
        prev_recall = curve.points[k].recall;
    }
    curve.ap = ap;
    return curve;
}

ConfusionCounts score_connections(const ConnectionMatrix& pred, const ConnectionMatrix& truth) {
    auto sorted_ids = [](const ConnectionMatrix& m) {
        auto ids = m.ids();
        std::sort(ids.begin(), ids.end());
        return ids;
    };
    if (sorted_ids(pred) != sorted_ids(truth))
        throw SymbolSetMismatch("score_connections: matrices cover different symbol sets");

    ConfusionCounts c;
    const auto& ids = truth.ids();
    for (size_t i = 0; i < ids.size(); ++i) {
        for (size_t j = i + 1; j < ids.size(); ++j) {
            const bool t = truth.at(i, j);
            const bool p = pred.at(*pred.index_of(ids[i]), *pred.index_of(ids[j]));
            if (t && p) ++c.tp;
            else if (t && !p) ++c.fn;
            else if (!t && p) ++c.fp;
            else ++c.tn;
        }
    }
    return c;
}

} // namespace pidtwin
