#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lstmae/error.hpp"

namespace lstmae {

// Anomaly is the positive class.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion(std::span<const int> labels, std::span<const int> verdicts);

// nullopt marks a metric whose denominator is zero.
using Metric = std::optional<double>;

struct ClassificationMetrics {
    Metric precision;
    Metric recall;
    Metric fpr;
    Metric f1;
    Metric accuracy;
};

ClassificationMetrics prf1_accuracy(const ConfusionCounts& c);

// Fraction to percent with two decimals ("99.50"); "undefined" for nullopt.
std::string format_percent(const Metric& m);

struct RocPoint {
    double threshold;  // scores >= threshold are predicted positive
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;  // starts at (0,0) with threshold +inf, ends at (1,1)
    double auc = 0.0;
};

// Sweeps every distinct score from high to low; tied scores move together,
// so a tie contributes one diagonal segment. Area by the trapezoid rule.
RocCurve roc_auc(std::span<const int> labels, std::span<const double> scores);

} // namespace lstmae
