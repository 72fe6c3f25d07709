#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lstmae/pipeline.hpp"

namespace lstmae {

// Header `timestamp,value` with an optional third `label` column.
// Empty or NaN fields become a missing value/timestamp; anything else that
// fails to parse is a parse error naming the line.
std::vector<RawRecord> read_records_csv(std::istream& in, const std::string& source_name = "<stream>");
std::vector<RawRecord> read_records_csv(const std::filesystem::path& path);

// Reads and validates an already-clean series (strictly increasing, no gaps).
TimeSeries read_series_csv(const std::filesystem::path& path);

void write_series_csv(const TimeSeries& series, std::ostream& out);
void write_series_csv(const TimeSeries& series, const std::filesystem::path& path);

// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

} // namespace lstmae
