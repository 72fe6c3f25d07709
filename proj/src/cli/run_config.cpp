#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include "lstmae/cli.hpp"

namespace lstmae {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    fail(ErrorKind::config, "config key '" + std::string(key) + "': '" + std::string(value) + "' is not " +
                                std::string(expected));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size()) {
        bad_value(key, value, std::is_floating_point_v<T> ? "a number" : "a non-negative integer");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    bad_value(key, value, "a boolean");
}

template <typename F>
void for_each_item(std::string_view list, F&& f) {
    while (true) {
        const auto comma = list.find(',');
        const auto item = trim(list.substr(0, comma));
        if (!item.empty()) f(item);
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
    }
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"input", [](RunConfig& c, auto, auto v) { c.input = std::string(v); }},
        {"model", [](RunConfig& c, auto, auto v) { c.model = std::string(v); }},
        {"out", [](RunConfig& c, auto, auto v) { c.out = std::string(v); }},
        {"truth", [](RunConfig& c, auto, auto v) { c.truth = std::string(v); }},
        {"window", [](RunConfig& c, auto k, auto v) {
             c.window = parse_number<std::size_t>(k, v);
             if (c.window == 0) bad_value(k, v, "a positive window length");
         }},
        {"epochs", [](RunConfig& c, auto k, auto v) { c.train.epochs = parse_number<std::size_t>(k, v); }},
        {"seed", [](RunConfig& c, auto k, auto v) { c.train.seed = parse_number<std::uint64_t>(k, v); }},
        {"sigma_k", [](RunConfig& c, auto k, auto v) { c.sigma_k = parse_number<double>(k, v); }},
        {"arch", [](RunConfig& c, auto, auto v) { c.arch = Architecture::parse(v); }},
        {"strict_nan", [](RunConfig& c, auto k, auto v) { c.strict_nan = parse_bool(k, v); }},
        {"learning_rate", [](RunConfig& c, auto k, auto v) { c.train.learning_rate = parse_number<double>(k, v); }},
        {"dropout", [](RunConfig& c, auto k, auto v) { c.train.dropout = parse_number<double>(k, v); }},
        {"batch_size", [](RunConfig& c, auto k, auto v) { c.train.batch_size = parse_number<std::size_t>(k, v); }},
        {"validation_fraction",
         [](RunConfig& c, auto k, auto v) { c.train.validation_fraction = parse_number<double>(k, v); }},
        {"split", [](RunConfig& c, auto k, auto v) {
             c.split = parse_timestamp(v);
             if (!c.split) bad_value(k, v, "an ISO-8601 timestamp");
         }},
        {"split_fraction", [](RunConfig& c, auto k, auto v) {
             c.split_fraction = parse_number<double>(k, v);
             if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0)) bad_value(k, v, "a fraction in (0, 1)");
         }},
        {"sweep_windows", [](RunConfig& c, auto k, auto v) {
             c.sweep_windows.clear();
             for_each_item(v, [&](std::string_view item) {
                 const auto w = parse_number<std::size_t>(k, item);
                 if (w == 0) bad_value(k, item, "a positive window length");
                 c.sweep_windows.push_back(w);
             });
             if (c.sweep_windows.empty()) bad_value(k, v, "a non-empty list");
         }},
        {"sweep_archs", [](RunConfig& c, auto k, auto v) {
             c.sweep_archs.clear();
             for_each_item(v, [&](std::string_view item) { c.sweep_archs.push_back(Architecture::parse(item)); });
             if (c.sweep_archs.empty()) bad_value(k, v, "a non-empty list");
         }},
        {"parallel_windows", [](RunConfig& c, auto k, auto v) {
             c.parallel_windows = parse_number<std::size_t>(k, v);
             if (c.parallel_windows == 0) bad_value(k, v, "a positive thread count");
         }},
        {"synth_length", [](RunConfig& c, auto k, auto v) { c.synth.length = parse_number<std::size_t>(k, v); }},
        {"synth_start", [](RunConfig& c, auto k, auto v) {
             const auto ts = parse_timestamp(v);
             if (!ts) bad_value(k, v, "an ISO-8601 timestamp");
             c.synth.start = *ts;
         }},
        {"synth_interval", [](RunConfig& c, auto k, auto v) { c.synth.interval_seconds = parse_number<std::int64_t>(k, v); }},
        {"synth_baseline", [](RunConfig& c, auto k, auto v) { c.synth.baseline = parse_number<double>(k, v); }},
        {"synth_amplitude", [](RunConfig& c, auto k, auto v) { c.synth.daily_amplitude = parse_number<double>(k, v); }},
        {"synth_period", [](RunConfig& c, auto k, auto v) { c.synth.daily_period = parse_number<std::size_t>(k, v); }},
        {"synth_noise", [](RunConfig& c, auto k, auto v) { c.synth.noise_sigma = parse_number<double>(k, v); }},
        {"synth_spike_rate", [](RunConfig& c, auto k, auto v) { c.synth.spike_rate = parse_number<double>(k, v); }},
        {"synth_spike_magnitude",
         [](RunConfig& c, auto k, auto v) { c.synth.spike_magnitude = parse_number<double>(k, v); }},
        {"synth_gaps", [](RunConfig& c, auto k, auto v) { c.synth.gap_count = parse_number<std::size_t>(k, v); }},
        {"synth_gap_length", [](RunConfig& c, auto k, auto v) { c.synth.gap_length = parse_number<std::size_t>(k, v); }},
    };
    return table;
}

} // namespace

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    const auto it = setters().find(trim(key));
    if (it == setters().end()) fail(ErrorKind::config, "unknown config key '" + std::string(key) + "'");
    it->second(cfg, it->first, trim(value));
}

void load_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::config, "cannot open config file " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            fail(ErrorKind::config, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        try {
            apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
        } catch (const Error& e) {
            fail(ErrorKind::config, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters()) keys.push_back(k);
    return keys;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::config:
        return 2;
    case ErrorKind::invariant:
        return 4;
    default:
        return 3;
    }
}

} // namespace lstmae
