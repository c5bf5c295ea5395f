#include "ecdf_bands/reference.hpp"

#include <map>
#include <vector>

#include "ecdf_bands/dist.hpp"
#include "ecdf_bands/error.hpp"

namespace ecdfb::reference {

double coverage_single(long n, const EvaluationGrid& grid, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::invalid_gamma, "gamma must lie in [0, 1]");
  std::map<long, double> mass{{0, 1.0}};
  double z_prev = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = grid[i];
    const long lo = binom_quantile(gamma / 2.0, n, z);
    const long hi = binom_quantile(1.0 - gamma / 2.0, n, z);
    const double p = (z - z_prev) / (1.0 - z_prev);
    std::map<long, double> next;
    for (const auto& [r, w] : mass) {
      for (long k = std::max(lo, r); k <= hi; ++k) next[k] += w * binom_pmf(k - r, n - r, p);
    }
    mass.swap(next);
    z_prev = z;
  }
  double total = 0.0;
  for (const auto& [r, w] : mass) total += w;
  return total;
}

namespace {

// Every vector of `chains` counts in [lo, hi] summing to s.
void states(long chains, long s, long lo, long hi, std::vector<long>& cur,
            std::vector<std::vector<long>>& out) {
  if (static_cast<long>(cur.size()) == chains - 1) {
    if (s >= lo && s <= hi) {
      cur.push_back(s);
      out.push_back(cur);
      cur.pop_back();
    }
    return;
  }
  for (long v = lo; v <= hi && v <= s; ++v) {
    cur.push_back(v);
    states(chains, s - v, lo, hi, cur, out);
    cur.pop_back();
  }
}

}  // namespace

double coverage_multi(long n, long chains, const EvaluationGrid& grid, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::invalid_gamma, "gamma must lie in [0, 1]");
  if (chains < 2) throw Error(ErrorCode::invalid_params, "at least two chains are required");
  const auto sizes = pooled_sizes(grid, n, chains);
  const long others = (chains - 1) * n;
  std::map<std::vector<long>, double> mass{{std::vector<long>(static_cast<std::size_t>(chains), 0), 1.0}};
  long s_prev = 0;
  for (long s : sizes) {
    const long lo = hyper_quantile(gamma / 2.0, n, others, s);
    const long hi = hyper_quantile(1.0 - gamma / 2.0, n, others, s);
    std::vector<std::vector<long>> targets;
    std::vector<long> scratch;
    states(chains, s, lo, hi, scratch, targets);
    std::map<std::vector<long>, double> next;
    for (const auto& [from, w] : mass) {
      MHypParams params{{}, s - s_prev};
      for (long c : from) params.populations.push_back(n - c);
      for (const auto& to : targets) {
        std::vector<long> step(to.size());
        bool ok = true;
        for (std::size_t l = 0; l < to.size(); ++l) {
          step[l] = to[l] - from[l];
          ok = ok && step[l] >= 0 && step[l] <= params.populations[l];
        }
        if (ok) next[to] += w * mhyper_pmf(step, params);
      }
    }
    mass.swap(next);
    s_prev = s;
  }
  double total = 0.0;
  for (const auto& [r, w] : mass) total += w;
  return total;
}

}  // namespace ecdfb::reference
