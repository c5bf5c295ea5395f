#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecdf_bands/bands_multi.hpp"
#include "ecdf_bands/bands_single.hpp"

namespace ecdfb::io {

using Columns = std::vector<std::vector<double>>;

/// CSV with an optional header row, one column per chain. Lines starting with '#' are comments.
Columns parse_csv(const std::string& text);

/// Discrete PIT resolution S from a "# resolution=S" comment line, if present.
std::optional<long> parse_resolution(const std::string& text);

/// One {"chain": int, "value": real} record per line; columns ordered by chain id.
Columns parse_ndjson(const std::string& text);

/// Reads a file, choosing NDJSON for .ndjson/.jsonl names or content starting with '{'.
Columns read_columns(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Report JSON (schema report/1).
std::string report_json(const TestReport& report, double alpha);
std::string report_json(const MultiTestReport& report, double alpha);

}  // namespace ecdfb::io
