#include "lstmae/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "lstmae/core_math.hpp"

namespace lstmae {

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    std::from_chars(s.data() + pos, s.data() + pos + len, out);
    return true;
}

double population_mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_stddev(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

} // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
    if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
    int y, mo, d, h, mi, sec = 0;
    if (s.size() != 16 && s.size() != 19) return std::nullopt;
    if (!read_int(s, 0, 4, y) || s[4] != '-' || !read_int(s, 5, 2, mo) || s[7] != '-' || !read_int(s, 8, 2, d) ||
        (s[10] != 'T' && s[10] != ' ') || !read_int(s, 11, 2, h) || s[13] != ':' || !read_int(s, 14, 2, mi)) {
        return std::nullopt;
    }
    if (s.size() == 19 && (s[16] != ':' || !read_int(s, 17, 2, sec))) return std::nullopt;

    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<Timestamp>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    Timestamp days = ts / 86400;
    Timestamp rem = ts % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60));
    return buf;
}

void TimeSeries::validate() const {
    if (timestamps.size() != values.size() || (labels && labels->size() != values.size())) {
        fail(ErrorKind::shape, "time series fields have different lengths");
    }
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (timestamps[i] <= timestamps[i - 1]) {
            fail(ErrorKind::validation, "timestamps not strictly increasing at index " + std::to_string(i));
        }
    }
}

std::vector<RawRecord> to_records(const TimeSeries& series) {
    std::vector<RawRecord> out(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        out[i].timestamp = series.timestamps[i];
        out[i].value = series.values[i];
        if (series.labels) out[i].label = (*series.labels)[i];
    }
    return out;
}

CleanResult clean(std::span<const RawRecord> raw, bool strict_nan) {
    CleanResult result;
    CleanReport& rep = result.report;
    rep.input_rows = raw.size();

    std::vector<const RawRecord*> rows;
    rows.reserve(raw.size());
    for (const RawRecord& r : raw) {
        if (r.timestamp) {
            rows.push_back(&r);
        } else {
            ++rep.invalid_timestamp_removed;
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const RawRecord* a, const RawRecord* b) { return *a->timestamp < *b->timestamp; });

    const bool labeled = !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const RawRecord* r) {
        return r->label.has_value();
    });
    TimeSeries& out = result.series;
    if (labeled) out.labels.emplace();

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const RawRecord& r = *rows[i];
        if (i > 0 && *r.timestamp == *rows[i - 1]->timestamp) {
            ++rep.duplicates_removed;
            continue;
        }
        double v = r.value;
        if (!std::isfinite(v)) {
            if (strict_nan) {
                ++rep.missing_values_dropped;
                continue;
            }
            ++rep.missing_values_zeroed;
            v = 0.0;
        }
        out.timestamps.push_back(*r.timestamp);
        out.values.push_back(v);
        if (labeled) out.labels->push_back(*r.label);
    }
    rep.output_rows = out.size();
    if (out.empty()) fail(ErrorKind::empty_series, "no records survive cleaning");
    return result;
}

ScalerParams fit_scaler(std::span<const double> values) {
    if (values.size() < 2) {
        fail(ErrorKind::insufficient_data, "scaler needs at least 2 values, got " + std::to_string(values.size()));
    }
    ScalerParams p;
    p.mean = population_mean(values);
    p.stddev = population_stddev(values, p.mean);
    if (!(p.stddev > 0.0)) fail(ErrorKind::degenerate_scale, "cannot fit a scaler to a constant series");
    return p;
}

std::vector<double> apply_scaler(const ScalerParams& scaler, std::span<const double> values) {
    if (!(scaler.stddev > 0.0)) fail(ErrorKind::degenerate_scale, "scaler standard deviation must be positive");
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - scaler.mean) / scaler.stddev;
    return out;
}

std::vector<double> invert_scaler(const ScalerParams& scaler, std::span<const double> values) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i] * scaler.stddev + scaler.mean;
    return out;
}

SigmaRule SigmaRule::fit(std::span<const double> values, double k) {
    if (values.empty()) fail(ErrorKind::empty_input, "sigma rule needs at least one value");
    SigmaRule rule;
    rule.mean = population_mean(values);
    rule.sigma = population_stddev(values, rule.mean);
    rule.k = k;
    if (!(rule.sigma > 0.0)) fail(ErrorKind::degenerate_scale, "sigma rule fitted to a constant series");
    rule.validate();
    return rule;
}

void SigmaRule::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorKind::config, "sigma must be positive");
    if (!(k >= 0.0) || !std::isfinite(k)) fail(ErrorKind::config, "sigma multiplier must be non-negative");
}

TimeSeries label_by_sigma(const TimeSeries& series, const SigmaRule& rule) {
    rule.validate();
    TimeSeries out = series;
    out.labels.emplace(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) (*out.labels)[i] = rule.is_normal(series.values[i]) ? 0 : 1;
    return out;
}

TrainTestSplit build_train_test(const TimeSeries& series, Timestamp split, double sigma_k) {
    series.validate();
    if (series.empty() || split <= series.timestamps.front() || split > series.timestamps.back()) {
        fail(ErrorKind::empty_split, "split instant " + format_timestamp(split) +
                                         " is not strictly inside the series time range");
    }
    const auto cut = static_cast<std::size_t>(
        std::lower_bound(series.timestamps.begin(), series.timestamps.end(), split) - series.timestamps.begin());

    TrainTestSplit out;
    out.train_period_rows = cut;
    const std::span<const double> period(series.values.data(), cut);
    out.rule = SigmaRule::fit(period, sigma_k);

    for (std::size_t i = 0; i < cut; ++i) {
        if (out.rule.is_normal(series.values[i])) {
            out.train.timestamps.push_back(series.timestamps[i]);
            out.train.values.push_back(series.values[i]);
        } else {
            ++out.train_dropped;
        }
    }
    if (out.train.empty()) fail(ErrorKind::empty_split, "no training point lies inside the normal band");

    TimeSeries test;
    test.timestamps.assign(series.timestamps.begin() + static_cast<std::ptrdiff_t>(cut), series.timestamps.end());
    test.values.assign(series.values.begin() + static_cast<std::ptrdiff_t>(cut), series.values.end());
    out.test = label_by_sigma(test, out.rule);
    return out;
}

void SyntheticProfile::validate() const {
    auto bad = [](const std::string& why) { fail(ErrorKind::config, "invalid synthetic profile: " + why); };
    if (length < 2) bad("length must be at least 2");
    if (interval_seconds <= 0) bad("interval must be positive");
    if (daily_period == 0) bad("daily period must be positive");
    if (!(noise_sigma >= 0.0) || !(daily_amplitude >= 0.0)) bad("amplitude and noise must be non-negative");
    if (!(spike_rate >= 0.0 && spike_rate <= 1.0)) bad("spike rate must be in [0, 1]");
    if (!(spike_magnitude >= 0.0)) bad("spike magnitude must be non-negative");
    if (gap_count > 0 && gap_count * gap_length >= length) bad("gaps cover the whole series");
}

SyntheticSeries generate_synthetic(const SyntheticProfile& profile, std::uint64_t seed) {
    profile.validate();
    Rng rng(Rng::sub_seed(seed, "synth"));
    const std::size_t n = profile.length;

    std::vector<bool> in_gap(n, false);
    for (std::size_t g = 0; g < profile.gap_count; ++g) {
        const std::size_t centre = (g + 1) * n / (profile.gap_count + 1);
        const std::size_t begin = centre > profile.gap_length / 2 ? centre - profile.gap_length / 2 : 0;
        for (std::size_t i = begin; i < std::min(n, begin + profile.gap_length); ++i) in_gap[i] = true;
    }

    SyntheticSeries out;
    TimeSeries& s = out.series;
    s.timestamps.resize(n);
    s.values.resize(n);
    const double omega = 2.0 * M_PI / static_cast<double>(profile.daily_period);
    for (std::size_t i = 0; i < n; ++i) {
        s.timestamps[i] = profile.start + static_cast<Timestamp>(i) * profile.interval_seconds;
        const double cycle = in_gap[i] ? 0.0 : profile.daily_amplitude * std::sin(omega * static_cast<double>(i));
        s.values[i] = profile.baseline + cycle + profile.noise_sigma * rng.normal();
    }

    out.clean_mean = population_mean(s.values);
    out.clean_stddev = population_stddev(s.values, out.clean_mean);

    const auto spikes = static_cast<std::size_t>(std::llround(profile.spike_rate * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < spikes; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
    out.anomaly_indices.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(spikes));
    std::sort(out.anomaly_indices.begin(), out.anomaly_indices.end());

    for (std::size_t i : out.anomaly_indices) s.values[i] += profile.spike_magnitude * out.clean_stddev;
    return out;
}

} // namespace lstmae
