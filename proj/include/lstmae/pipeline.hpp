#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lstmae/error.hpp"

namespace lstmae {

// Seconds since 1970-01-01T00:00:00 UTC.
using Timestamp = std::int64_t;

// Accepts "YYYY-MM-DDTHH:MM[:SS][Z]" (a space may replace the T).
std::optional<Timestamp> parse_timestamp(std::string_view text);
// "YYYY-MM-DDTHH:MM:SS"
std::string format_timestamp(Timestamp ts);

struct TimeSeries {
    std::vector<Timestamp> timestamps;
    std::vector<double> values;
    std::optional<std::vector<int>> labels;  // 0 = normal, 1 = anomaly

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }

    // Equal lengths and strictly increasing timestamps.
    void validate() const;

    bool operator==(const TimeSeries&) const = default;
};

// One input row before cleaning. A missing timestamp or value is represented
// by nullopt / NaN respectively.
struct RawRecord {
    std::optional<Timestamp> timestamp;
    double value = 0.0;
    std::optional<int> label;
};

std::vector<RawRecord> to_records(const TimeSeries& series);

struct CleanReport {
    std::size_t input_rows = 0;
    std::size_t duplicates_removed = 0;
    std::size_t invalid_timestamp_removed = 0;
    std::size_t missing_values_zeroed = 0;
    std::size_t missing_values_dropped = 0;  // strict mode only
    std::size_t output_rows = 0;
};

struct CleanResult {
    TimeSeries series;
    CleanReport report;
};

// Drops duplicate timestamps (first occurrence wins) and rows without a
// usable timestamp, then replaces missing values with 0, or drops those rows
// when strict_nan is set. Output is sorted by time.
CleanResult clean(std::span<const RawRecord> raw, bool strict_nan = false);

struct ScalerParams {
    double mean = 0.0;
    double stddev = 1.0;  // population standard deviation
};

ScalerParams fit_scaler(std::span<const double> values);
std::vector<double> apply_scaler(const ScalerParams& scaler, std::span<const double> values);
std::vector<double> invert_scaler(const ScalerParams& scaler, std::span<const double> values);

// Normal band [mean - k*sigma, mean + k*sigma], inclusive at both ends.
struct SigmaRule {
    double mean = 0.0;
    double sigma = 1.0;
    double k = 2.0;

    static SigmaRule fit(std::span<const double> values, double k = 2.0);
    void validate() const;
    double lower() const noexcept { return mean - k * sigma; }
    double upper() const noexcept { return mean + k * sigma; }
    bool is_normal(double v) const noexcept { return v >= lower() && v <= upper(); }
};

TimeSeries label_by_sigma(const TimeSeries& series, const SigmaRule& rule);

struct TrainTestSplit {
    TimeSeries train;  // before the split, band-filtered, unlabeled
    TimeSeries test;   // from the split on, every point, labeled
    SigmaRule rule;    // fitted on the whole training period
    std::size_t train_period_rows = 0;
    std::size_t train_dropped = 0;
};

// Points with timestamp < split go to training. The split must leave at least
// one point on each side.
TrainTestSplit build_train_test(const TimeSeries& series, Timestamp split, double sigma_k = 2.0);

struct SyntheticProfile {
    std::size_t length = 10000;
    Timestamp start = 1514764800;  // 2018-01-01T00:00:00
    std::int64_t interval_seconds = 60;
    double baseline = 488.0;
    double daily_amplitude = 320.0;
    std::size_t daily_period = 1440;  // samples per cycle
    double noise_sigma = 70.0;
    double spike_rate = 0.01;
    // In multiples of the population std of the spike-free signal.
    double spike_magnitude = 6.0;
    // Flat stretches without the daily cycle, evenly spread over the series.
    std::size_t gap_count = 0;
    std::size_t gap_length = 1440;

    void validate() const;
};

struct SyntheticSeries {
    TimeSeries series;
    std::vector<std::size_t> anomaly_indices;  // ascending
    double clean_mean = 0.0;
    double clean_stddev = 0.0;
};

SyntheticSeries generate_synthetic(const SyntheticProfile& profile, std::uint64_t seed);

} // namespace lstmae
