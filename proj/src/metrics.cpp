#include "lstmae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace lstmae {

namespace {

void check_binary(std::span<const int> v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] != 0 && v[i] != 1) {
            fail(ErrorKind::validation, std::string(what) + "[" + std::to_string(i) + "] = " + std::to_string(v[i]) +
                                            " is not 0 or 1");
        }
    }
}

Metric ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

ConfusionCounts confusion(std::span<const int> labels, std::span<const int> verdicts) {
    if (labels.size() != verdicts.size()) {
        fail(ErrorKind::validation, std::to_string(labels.size()) + " labels but " + std::to_string(verdicts.size()) +
                                        " verdicts");
    }
    check_binary(labels, "labels");
    check_binary(verdicts, "verdicts");
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            verdicts[i] == 1 ? ++c.tp : ++c.fn;
        } else {
            verdicts[i] == 1 ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

ClassificationMetrics prf1_accuracy(const ConfusionCounts& c) {
    ClassificationMetrics m;
    m.precision = ratio(c.tp, c.tp + c.fp);
    m.recall = ratio(c.tp, c.tp + c.fn);
    m.fpr = ratio(c.fp, c.fp + c.tn);
    m.accuracy = ratio(c.tp + c.tn, c.total());
    if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
        m.f1 = 2.0 * (*m.precision * *m.recall) / (*m.precision + *m.recall);
    }
    return m;
}

std::string format_percent(const Metric& m) {
    if (!m) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *m * 100.0);
    return buf;
}

RocCurve roc_auc(std::span<const int> labels, std::span<const double> scores) {
    if (labels.size() != scores.size()) {
        fail(ErrorKind::validation, std::to_string(labels.size()) + " labels but " + std::to_string(scores.size()) +
                                        " scores");
    }
    check_binary(labels, "labels");
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) {
        fail(ErrorKind::degenerate_labels, "ROC needs both classes, got " + std::to_string(positives) +
                                               " positives and " + std::to_string(negatives) + " negatives");
    }
    for (double s : scores) {
        if (std::isnan(s)) fail(ErrorKind::validation, "ROC scores must not be NaN");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0;
    std::size_t fp = 0;
    double area = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == threshold; ++i) labels[order[i]] == 1 ? ++tp : ++fp;
        const RocPoint& prev = curve.points.back();
        const double fpr = static_cast<double>(fp) / static_cast<double>(negatives);
        const double tpr = static_cast<double>(tp) / static_cast<double>(positives);
        area += (fpr - prev.fpr) * (tpr + prev.tpr) / 2.0;
        curve.points.push_back({threshold, fpr, tpr});
    }
    curve.auc = area;
    return curve;
}

} // namespace lstmae
