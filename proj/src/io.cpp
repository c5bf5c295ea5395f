#include "ecdf_bands/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ecdf_bands/error.hpp"

namespace ecdfb::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& field, double& out) {
  if (field.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(field.c_str(), &end);
  return errno == 0 && end == field.c_str() + field.size();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(trim(f));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

nlohmann::ordered_json exceedances_json(const TestReport& r) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : r.exceedances) {
    arr.push_back({{"index", e.index},
                   {"z", r.bands.grid[e.index]},
                   {"observed", e.observed},
                   {"bound", e.bound},
                   {"side", e.side == Exceedance::Side::below_lower ? "below_lower" : "above_upper"}});
  }
  return arr;
}

nlohmann::ordered_json bands_json(const ConfidenceBands& b, double alpha) {
  nlohmann::ordered_json doc;
  doc["schema"] = "report/1";
  doc["n"] = b.n;
  doc["chains"] = b.chains;
  doc["alpha"] = alpha;
  doc["gamma"] = b.gamma.gamma;
  doc["method"] = to_string(b.gamma.method);
  if (std::isfinite(b.gamma.attained_coverage)) {
    doc["attained_coverage"] = b.gamma.attained_coverage;
  } else {
    doc["attained_coverage"] = nullptr;
  }
  doc["grid"] = std::vector<double>(b.grid.points().begin(), b.grid.points().end());
  std::vector<double> lower, upper;
  for (std::size_t i = 0; i < b.grid.size(); ++i) {
    lower.push_back(b.lower(i));
    upper.push_back(b.upper(i));
  }
  doc["lower"] = lower;
  doc["upper"] = upper;
  doc["lower_counts"] = b.lower_counts;
  doc["upper_counts"] = b.upper_counts;
  if (!b.pooled_sizes.empty()) doc["pooled_sizes"] = b.pooled_sizes;
  return doc;
}

}  // namespace

Columns parse_csv(const std::string& text) {
  Columns cols;
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split(line);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_number(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (first) {
      first = false;
      cols.resize(fields.size());
      if (!numeric) continue;
    }
    if (!numeric) throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": non-numeric field");
    if (row.size() != cols.size()) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(cols.size()) + " columns");
    }
    for (std::size_t c = 0; c < row.size(); ++c) cols[c].push_back(row[c]);
  }
  if (cols.empty() || cols.front().empty()) throw Error(ErrorCode::parse_error, "no data rows");
  return cols;
}

std::optional<long> parse_resolution(const std::string& text) {
  static const std::string key = "# resolution=";
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key, 0) != 0) continue;
    double v = 0.0;
    if (parse_number(trim(line.substr(key.size())), v) && v >= 1.0 && v == std::floor(v)) {
      return static_cast<long>(v);
    }
    throw Error(ErrorCode::parse_error, "malformed resolution comment");
  }
  return std::nullopt;
}

Columns parse_ndjson(const std::string& text) {
  std::map<long, std::vector<double>> by_chain;
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      by_chain[rec.at("chain").get<long>()].push_back(rec.at("value").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (by_chain.empty()) throw Error(ErrorCode::parse_error, "no records");
  Columns cols;
  for (auto& [id, values] : by_chain) cols.push_back(std::move(values));
  return cols;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out << content;
}

Columns read_columns(const std::string& path) {
  const std::string text = read_file(path);
  const auto ends_with = [&](const char* suffix) {
    const std::string s(suffix);
    return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
  };
  const auto first = text.find_first_not_of(" \t\r\n");
  if (ends_with(".ndjson") || ends_with(".jsonl") || (first != std::string::npos && text[first] == '{')) {
    return parse_ndjson(text);
  }
  return parse_csv(text);
}

std::string report_json(const TestReport& report, double alpha) {
  auto doc = bands_json(report.bands, alpha);
  doc["inside"] = report.inside;
  doc["results"] = nlohmann::ordered_json::array();
  doc["results"].push_back({{"chain", 0},
                            {"inside", report.inside},
                            {"counts", report.trajectory.counts},
                            {"exceedances", exceedances_json(report)}});
  return doc.dump(2) + "\n";
}

std::string report_json(const MultiTestReport& report, double alpha) {
  auto doc = bands_json(report.bands, alpha);
  doc["inside"] = report.inside;
  doc["results"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < report.chains.size(); ++c) {
    const auto& r = report.chains[c];
    doc["results"].push_back({{"chain", c},
                              {"inside", r.inside},
                              {"counts", r.trajectory.counts},
                              {"exceedances", exceedances_json(r)}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace ecdfb::io
