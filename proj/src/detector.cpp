#include "lstmae/detector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "lstmae/timeseries_csv.hpp"

namespace lstmae {

Reconstructor model_reconstructor(const SeqAutoencoderModel& model) {
    return [&model](const Matrix& window) { return reconstruct(model, window); };
}

std::vector<Matrix> reconstruct_windows(const Reconstructor& reconstructor, const WindowSet& windows,
                                        std::size_t threads) {
    std::vector<Matrix> out(windows.count());
    auto run = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = reconstructor(windows.window(i));
    };
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, out.size()));
    if (threads == 1) {
        run(0, out.size());
        return out;
    }
    std::vector<std::jthread> workers;
    const std::size_t chunk = (out.size() + threads - 1) / threads;
    for (std::size_t begin = 0; begin < out.size(); begin += chunk) {
        workers.emplace_back(run, begin, std::min(out.size(), begin + chunk));
    }
    return out;
}

PointLossVector score_windows(const Reconstructor& reconstructor, const WindowSet& windows, std::size_t threads) {
    const auto recs = reconstruct_windows(reconstructor, windows, threads);
    return per_point_loss(windows, recs);
}

std::string model_fingerprint(const SeqAutoencoderModel& model) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_model(model)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Threshold fit_threshold(const Reconstructor& reconstructor, const WindowSet& train_windows, std::size_t threads) {
    if (train_windows.empty()) fail(ErrorKind::empty_input, "threshold fitting needs at least one window");
    const auto loss = score_windows(reconstructor, train_windows, threads);
    Threshold t;
    t.eta = *std::max_element(loss.begin(), loss.end());
    t.training_points = train_windows.source_len();
    t.window_len = train_windows.window_len();
    if (!std::isfinite(t.eta)) fail(ErrorKind::invariant, "training reconstruction loss is not finite");
    return t;
}

Threshold fit_threshold(const SeqAutoencoderModel& model, const WindowSet& train_windows, std::size_t threads) {
    Threshold t = fit_threshold(model_reconstructor(model), train_windows, threads);
    t.model_fingerprint = model_fingerprint(model);
    return t;
}

std::vector<int> classify(std::span<const double> losses, double eta) {
    std::vector<int> out(losses.size());
    for (std::size_t i = 0; i < losses.size(); ++i) out[i] = losses[i] > eta ? 1 : 0;
    return out;
}

std::size_t DetectionReport::flagged() const {
    return static_cast<std::size_t>(std::count(verdicts.begin(), verdicts.end(), 1));
}

DetectionReport detect(const Reconstructor& reconstructor, const Threshold& threshold, const TimeSeries& series,
                       const ScalerParams& scaler, std::size_t window_len, std::size_t threads) {
    series.validate();
    if (series.size() < window_len) {
        fail(ErrorKind::insufficient_data, "test series of length " + std::to_string(series.size()) +
                                               " is shorter than window length " + std::to_string(window_len));
    }
    const auto scaled = apply_scaler(scaler, series.values);
    const WindowSet windows = make_windows(scaled, window_len);

    DetectionReport report;
    report.timestamps = series.timestamps;
    report.values = series.values;
    report.loss = score_windows(reconstructor, windows, threads);
    report.eta = threshold.eta;
    report.verdicts = classify(report.loss, report.eta);
    report.labels = series.labels;
    if (report.labels) report.confusion = confusion(*report.labels, report.verdicts);
    return report;
}

DetectionReport detect(const SeqAutoencoderModel& model, const Threshold& threshold, const TimeSeries& series,
                       const ScalerParams& scaler, std::size_t threads) {
    if (model.features != 1) fail(ErrorKind::shape, "series detection needs a single-feature model");
    return detect(model_reconstructor(model), threshold, series, scaler, model.timesteps, threads);
}

void write_report_csv(const DetectionReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    out << (report.labels ? "timestamp,value,loss,verdict,label\n" : "timestamp,value,loss,verdict\n");
    for (std::size_t i = 0; i < report.loss.size(); ++i) {
        out << format_timestamp(report.timestamps[i]) << ',' << format_double(report.values[i]) << ','
            << format_double(report.loss[i]) << ',' << report.verdicts[i];
        if (report.labels) out << ',' << (*report.labels)[i];
        out << '\n';
    }
    if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

DetectionReport read_report_csv(const std::filesystem::path& path, double eta) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 1;
    auto error = [&](const std::string& what) {
        fail(ErrorKind::parse, path.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    if (!std::getline(in, line)) error("empty report");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool labeled = false;
    if (line == "timestamp,value,loss,verdict,label") {
        labeled = true;
    } else if (line != "timestamp,value,loss,verdict") {
        error("expected header timestamp,value,loss,verdict[,label]");
    }

    DetectionReport r;
    r.eta = eta;
    if (labeled) r.labels.emplace();
    auto parse_number = [&](std::string_view s) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) error("bad number '" + std::string(s) + "'");
        return v;
    };
    auto parse_flag = [&](std::string_view s) {
        if (s == "0") return 0;
        if (s == "1") return 1;
        error("expected 0 or 1, found '" + std::string(s) + "'");
        return 0;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::string_view rest = line;
        for (auto comma = rest.find(','); comma != std::string_view::npos; comma = rest.find(',')) {
            f.push_back(rest.substr(0, comma));
            rest = rest.substr(comma + 1);
        }
        f.push_back(rest);
        if (f.size() != (labeled ? 5u : 4u)) error("wrong number of fields");
        const auto ts = parse_timestamp(f[0]);
        if (!ts) error("bad timestamp '" + std::string(f[0]) + "'");
        r.timestamps.push_back(*ts);
        r.values.push_back(parse_number(f[1]));
        r.loss.push_back(parse_number(f[2]));
        r.verdicts.push_back(parse_flag(f[3]));
        if (labeled) r.labels->push_back(parse_flag(f[4]));
    }
    if (r.labels) r.confusion = confusion(*r.labels, r.verdicts);
    return r;
}

} // namespace lstmae
