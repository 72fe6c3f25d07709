#include "lstmae/timeseries_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace lstmae {

namespace {

bool is_missing(std::string_view s) {
    return s.empty() || s == "NaN" || s == "nan" || s == "NAN" || s == "NaT" || s == "null";
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t begin = 0;
    while (true) {
        const auto comma = line.find(',', begin);
        out.push_back(line.substr(begin, comma - begin));
        if (comma == std::string_view::npos) break;
        begin = comma + 1;
    }
    return out;
}

[[noreturn]] void parse_error(const std::string& source, std::size_t line, const std::string& what) {
    fail(ErrorKind::parse, source + ":" + std::to_string(line) + ": " + what);
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<RawRecord> read_records_csv(std::istream& in, const std::string& source_name) {
    static constexpr const char* expected = "timestamp,value[,label]";
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) parse_error(source_name, line_no, std::string("empty file, expected header ") + expected);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    bool labeled = false;
    if (line == "timestamp,value,label") {
        labeled = true;
    } else if (line != "timestamp,value") {
        parse_error(source_name, line_no, "missing header, expected " + std::string(expected) + " but found '" + line + "'");
    }
    const std::size_t columns = labeled ? 3 : 2;

    std::vector<RawRecord> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != columns) {
            parse_error(source_name, line_no, "expected " + std::to_string(columns) + " fields, found " +
                                                  std::to_string(fields.size()));
        }
        RawRecord rec;
        if (!is_missing(fields[0])) {
            rec.timestamp = parse_timestamp(fields[0]);
            if (!rec.timestamp) parse_error(source_name, line_no, "bad timestamp '" + std::string(fields[0]) + "'");
        }
        if (is_missing(fields[1])) {
            rec.value = std::numeric_limits<double>::quiet_NaN();
        } else {
            const auto f = fields[1];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), rec.value);
            if (ec != std::errc{} || ptr != f.data() + f.size()) {
                parse_error(source_name, line_no, "bad value '" + std::string(f) + "'");
            }
        }
        if (labeled) {
            if (fields[2] == "0") {
                rec.label = 0;
            } else if (fields[2] == "1") {
                rec.label = 1;
            } else {
                parse_error(source_name, line_no, "label must be 0 or 1, found '" + std::string(fields[2]) + "'");
            }
        }
        out.push_back(rec);
    }
    return out;
}

std::vector<RawRecord> read_records_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    return read_records_csv(in, path.string());
}

TimeSeries read_series_csv(const std::filesystem::path& path) {
    const auto records = read_records_csv(path);
    TimeSeries s;
    bool labeled = !records.empty() && records.front().label.has_value();
    if (labeled) s.labels.emplace();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!r.timestamp || !std::isfinite(r.value)) {
            fail(ErrorKind::parse, path.string() + ": row " + std::to_string(i + 1) + " has a missing field");
        }
        s.timestamps.push_back(*r.timestamp);
        s.values.push_back(r.value);
        if (labeled) s.labels->push_back(*r.label);
    }
    s.validate();
    return s;
}

void write_series_csv(const TimeSeries& series, std::ostream& out) {
    series.validate();
    out << (series.labels ? "timestamp,value,label\n" : "timestamp,value\n");
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_timestamp(series.timestamps[i]) << ',' << format_double(series.values[i]);
        if (series.labels) out << ',' << (*series.labels)[i];
        out << '\n';
    }
}

void write_series_csv(const TimeSeries& series, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
    write_series_csv(series, out);
    if (!out) fail(ErrorKind::io, "failed writing " + path.string());
}

} // namespace lstmae
