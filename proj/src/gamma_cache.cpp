#include "ecdf_bands/gamma_cache.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "ecdf_bands/bands_multi.hpp"
#include "ecdf_bands/error.hpp"
#include "ecdf_bands/rng.hpp"

namespace ecdfb {

namespace {

constexpr const char* kSchema = "gamma-grid/1";

bool same_alpha(double a, double b) noexcept { return std::fabs(a - b) <= 1e-12; }

auto sort_key(const GammaEntry& e) { return std::make_tuple(e.l, e.alpha, e.n, e.k); }

GammaMethod method_from_string(const std::string& s) {
  if (s == "simulation") return GammaMethod::simulation;
  if (s == "optimization") return GammaMethod::optimization;
  if (s == "interpolated") return GammaMethod::interpolated;
  throw Error(ErrorCode::parse_error, "unknown gamma method '" + s + "'");
}

}  // namespace

GammaGrid::GammaGrid(std::vector<GammaEntry> entries) {
  for (const auto& e : entries) insert(e);
}

void GammaGrid::insert(const GammaEntry& entry) {
  if (!(entry.gamma > 0.0 && entry.gamma <= entry.alpha)) {
    throw Error(ErrorCode::invalid_gamma, "cached gamma must lie in (0, alpha]");
  }
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const GammaEntry& e) {
    return e.n == entry.n && e.l == entry.l && e.k == entry.k && same_alpha(e.alpha, entry.alpha);
  });
  if (it != entries_.end()) {
    *it = entry;
    return;
  }
  const auto pos = std::upper_bound(entries_.begin(), entries_.end(), entry,
                                    [](const auto& a, const auto& b) { return sort_key(a) < sort_key(b); });
  entries_.insert(pos, entry);
}

const GammaEntry* GammaGrid::find(long n, long l, long k, double alpha) const noexcept {
  for (const auto& e : entries_) {
    if (e.n == n && e.l == l && e.k == k && same_alpha(e.alpha, alpha)) return &e;
  }
  return nullptr;
}

std::vector<GammaEntry> GammaGrid::slice(long l, double alpha, long k_max) const {
  std::vector<GammaEntry> out;
  for (const auto& e : entries_) {
    if (e.l == l && same_alpha(e.alpha, alpha) && e.k == std::min(e.n, k_max)) out.push_back(e);
  }
  return out;
}

std::string GammaGrid::to_json() const {
  nlohmann::ordered_json doc;
  doc["schema"] = kSchema;
  doc["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : entries_) {
    nlohmann::ordered_json rec;
    rec["n"] = e.n;
    rec["l"] = e.l;
    rec["k"] = e.k;
    rec["alpha"] = e.alpha;
    rec["gamma"] = e.gamma;
    rec["coverage"] = e.coverage;
    rec["method"] = to_string(e.method);
    doc["entries"].push_back(std::move(rec));
  }
  return doc.dump(2) + "\n";
}

GammaGrid GammaGrid::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("gamma grid: ") + e.what());
  }
  if (!doc.is_object() || doc.value("schema", "") != kSchema) {
    throw Error(ErrorCode::parse_error, "gamma grid: expected schema gamma-grid/1");
  }
  GammaGrid grid;
  try {
    for (const auto& rec : doc.at("entries")) {
      GammaEntry e;
      e.n = rec.at("n").get<long>();
      e.l = rec.at("l").get<long>();
      e.k = rec.at("k").get<long>();
      e.alpha = rec.at("alpha").get<double>();
      e.gamma = rec.at("gamma").get<double>();
      e.coverage = rec.at("coverage").get<double>();
      e.method = method_from_string(rec.at("method").get<std::string>());
      grid.insert(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, std::string("gamma grid: ") + e.what());
  }
  return grid;
}

void GammaGrid::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out << to_json();
}

GammaGrid GammaGrid::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

GammaGrid build_grid(const std::vector<long>& ns, const std::vector<long>& ls,
                     const std::vector<double>& alphas, const GridBuildOptions& options) {
  if (ns.empty() || ls.empty() || alphas.empty()) {
    throw Error(ErrorCode::invalid_params, "grid lists must be nonempty");
  }
  struct Key {
    long n, l;
    double alpha;
  };
  std::vector<Key> keys;
  for (long l : ls) {
    for (double a : alphas) {
      for (long n : ns) keys.push_back({n, l, a});
    }
  }
  std::vector<GammaEntry> entries(keys.size());
  const long count = static_cast<long>(keys.size());

#pragma omp parallel for schedule(dynamic, 1) if (options.exec == Exec::parallel)
  for (long j = 0; j < count; ++j) {
    const Key& key = keys[static_cast<std::size_t>(j)];
    const long k = std::min(key.n, options.k_max);
    const auto grid = EvaluationGrid::uniform(k);
    const std::uint64_t seed =
        splitmix64(options.seed ^ splitmix64(static_cast<std::uint64_t>(key.n) * 1000003ULL +
                                             static_cast<std::uint64_t>(key.l)));
    GammaResult g;
    if (key.l == 1) {
      g = gamma_optimize(key.n, grid, key.alpha);
    } else if (key.l <= 3) {
      g = gamma_optimize_multi(key.n, key.l, grid, key.alpha);
    } else {
      g = gamma_simulate_multi(key.n, key.l, grid, key.alpha, options.replicates, seed, Exec::serial);
    }
    entries[static_cast<std::size_t>(j)] = {key.n, key.l, k, key.alpha, g.gamma,
                                            g.attained_coverage, g.method};
  }
  return GammaGrid(std::move(entries));
}

GammaResult interpolate(const GammaGrid& grid, long n, long l, double alpha, long k_max) {
  const auto slice = grid.slice(l, alpha, k_max);
  if (slice.empty()) {
    throw Error(ErrorCode::missing_slice, "no cached gamma values for this chain count and alpha");
  }
  if (n < slice.front().n || n > slice.back().n) {
    throw Error(ErrorCode::out_of_range, "N = " + std::to_string(n) + " lies outside the cached range [" +
                                             std::to_string(slice.front().n) + ", " +
                                             std::to_string(slice.back().n) + "]");
  }
  GammaResult out;
  const auto hi = std::lower_bound(slice.begin(), slice.end(), n,
                                   [](const GammaEntry& e, long v) { return e.n < v; });
  if (hi->n == n) {
    out.gamma = hi->gamma;
    out.attained_coverage = hi->coverage;
    out.method = hi->method;
    return out;
  }
  const auto lo = hi - 1;
  const double t = (std::log(static_cast<double>(n)) - std::log(static_cast<double>(lo->n))) /
                   (std::log(static_cast<double>(hi->n)) - std::log(static_cast<double>(lo->n)));
  out.gamma = std::exp((1.0 - t) * std::log(lo->gamma) + t * std::log(hi->gamma));
  out.method = GammaMethod::interpolated;
  return out;
}

std::optional<GammaResult> cached_gamma(const GammaGrid* cache, long n, long l, double alpha,
                                        const EvaluationGrid& grid, long k_max) {
  if (cache == nullptr || cache->empty()) return std::nullopt;
  if (!(grid == EvaluationGrid::uniform(std::min(n, k_max)))) return std::nullopt;
  const auto slice = cache->slice(l, alpha, k_max);
  if (slice.empty() || n < slice.front().n || n > slice.back().n) return std::nullopt;
  return interpolate(*cache, n, l, alpha, k_max);
}

}  // namespace ecdfb
