#include "band_model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <string>

#include "ecdf_bands/dist.hpp"
#include "ecdf_bands/error.hpp"
#include "ecdf_bands/optimize.hpp"

namespace ecdfb::detail {

namespace {

// Mass below this is rescaled so long grids cannot underflow the state vector.
constexpr double kRescaleBelow = 1e-250;

double log_hyper(long k, long succ, long fail, long draws) noexcept {
  const long total = succ + fail;
  if (draws == 0 || draws == total) return 0.0;
  const double p = static_cast<double>(draws) / static_cast<double>(total);
  const double q = static_cast<double>(total - draws) / static_cast<double>(total);
  return binom_log_density(k, succ, p, q) + binom_log_density(draws - k, fail, p, q) -
         binom_log_density(draws, total, p, q);
}

// Bin(d | n, p) for d in [dlo, dhi], written to out[0 .. dhi - dlo].
// Starts at the (clamped) mode and recurses outwards, so underflow only hits negligible terms.
void binomial_row(long n, double p, long dlo, long dhi, double* out) {
  const long width = dhi - dlo + 1;
  std::fill(out, out + width, 0.0);
  const long top = std::min(dhi, n);
  if (dlo > top) return;
  if (p >= 1.0) {
    if (n >= dlo && n <= dhi) out[n - dlo] = 1.0;
    return;
  }
  const double q = 1.0 - p;
  long mode = static_cast<long>(std::floor((static_cast<double>(n) + 1.0) * p));
  mode = std::clamp(mode, dlo, top);
  out[mode - dlo] = std::exp(binom_log_density(mode, n, p, q));
  const double up = p / q;
  for (long d = mode; d < top; ++d) {
    out[d + 1 - dlo] = out[d - dlo] * static_cast<double>(n - d) / static_cast<double>(d + 1) * up;
  }
  const double down = q / p;
  for (long d = mode; d > dlo; --d) {
    out[d - 1 - dlo] = out[d - dlo] * static_cast<double>(d) / static_cast<double>(n - d + 1) * down;
  }
}

// Hyp(d | succ, fail, draws) for d in [dlo, dhi].
void hyper_row(long succ, long fail, long draws, long dlo, long dhi, double* out) {
  const long width = dhi - dlo + 1;
  std::fill(out, out + width, 0.0);
  const long lo = std::max(dlo, hyper_support_min(succ, fail, draws));
  const long hi = std::min(dhi, hyper_support_max(succ, fail, draws));
  if (lo > hi) return;
  long mode = static_cast<long>(std::floor(static_cast<double>(draws + 1) *
                                           static_cast<double>(succ + 1) /
                                           static_cast<double>(succ + fail + 2)));
  mode = std::clamp(mode, lo, hi);
  out[mode - dlo] = std::exp(log_hyper(mode, succ, fail, draws));
  const double s = static_cast<double>(succ);
  const double f = static_cast<double>(fail);
  const double n = static_cast<double>(draws);
  for (long d = mode; d < hi; ++d) {
    const double x = static_cast<double>(d);
    out[d + 1 - dlo] = out[d - dlo] * (s - x) * (n - x) / ((x + 1.0) * (f - n + x + 1.0));
  }
  for (long d = mode; d > lo; --d) {
    const double x = static_cast<double>(d);
    out[d - 1 - dlo] = out[d - dlo] * x * (f - n + x) / ((s - x + 1.0) * (n - x + 1.0));
  }
}

// Keeps the state vector representable; returns false once all mass is gone.
bool renormalize(std::vector<double>& mass, double& log_scale) {
  double total = 0.0;
  for (double v : mass) total += v;
  if (total <= 0.0) return false;
  if (total < kRescaleBelow) {
    for (double& v : mass) v /= total;
    log_scale += std::log(total);
  }
  return true;
}

double finish(const std::vector<double>& mass, double log_scale) {
  double total = 0.0;
  for (double v : mass) total += v;
  return total * std::exp(log_scale);
}

}  // namespace

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::invalid_alpha, "alpha must lie in (0, 1)");
  }
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::invalid_gamma, "gamma must lie in [0, 1]");
  }
}

long MarginalTable::quantile(double q) const noexcept {
  if (q <= 0.0) return lo;
  if (q >= 1.0) return hi();
  const auto it = std::lower_bound(cdf.begin(), cdf.end(), q);
  if (it == cdf.end()) return hi();
  return lo + static_cast<long>(it - cdf.begin());
}

std::vector<MarginalTable> binomial_tables(long n, const EvaluationGrid& grid) {
  std::vector<MarginalTable> tables(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto& t = tables[i];
    t.lo = 0;
    t.cdf.resize(static_cast<std::size_t>(n + 1));
    for (long k = 0; k <= n; ++k) t.cdf[static_cast<std::size_t>(k)] = binom_cdf(k, n, grid[i]);
  }
  return tables;
}

std::vector<MarginalTable> hyper_tables(long n, long chains, std::span<const long> sizes) {
  const long others = (chains - 1) * n;
  std::vector<MarginalTable> tables(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    auto& t = tables[i];
    const long s = sizes[i];
    t.lo = hyper_support_min(n, others, s);
    const long hi = hyper_support_max(n, others, s);
    t.cdf.resize(static_cast<std::size_t>(hi - t.lo + 1));
    for (long k = t.lo; k <= hi; ++k) {
      t.cdf[static_cast<std::size_t>(k - t.lo)] = hyper_cdf(k, n, others, s);
    }
  }
  return tables;
}

std::vector<Interval> interiors(const std::vector<MarginalTable>& tables, double gamma) {
  std::vector<Interval> out(tables.size());
  const double lower_q = gamma / 2.0;
  const double upper_q = 1.0 - gamma / 2.0;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    out[i] = {tables[i].quantile(lower_q), tables[i].quantile(upper_q)};
  }
  return out;
}

std::vector<double> breakpoints(const std::vector<MarginalTable>& tables, double alpha) {
  std::vector<double> points;
  for (const auto& t : tables) {
    for (double c : t.cdf) {
      const double a = 2.0 * c;
      const double b = 2.0 * (1.0 - c);
      if (a > 0.0 && a < alpha) points.push_back(a);
      if (b > 0.0 && b < alpha) points.push_back(b);
    }
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

double binomial_recursion(long n, const EvaluationGrid& grid, const std::vector<Interval>& inside,
                          Exec exec) {
  std::vector<double> prev{1.0};
  Interval prev_int{0, 0};
  double log_scale = 0.0;
  double z_prev = 0.0;
  std::vector<double> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Interval cur = inside[i];
    if (cur.empty()) return 0.0;
    const double p = (grid[i] - z_prev) / (1.0 - z_prev);
    const long width = cur.width();
    const long sources = prev_int.width();
    rows.assign(static_cast<std::size_t>(sources * width), 0.0);

    // Row for source m holds Bin(k - m | N - m, p) at target k in cur; entries for k < m stay 0.
#pragma omp parallel for schedule(dynamic, 8) if (exec == Exec::parallel)
    for (long s = 0; s < sources; ++s) {
      const long m = prev_int.lo + s;
      if (prev[static_cast<std::size_t>(s)] == 0.0 || cur.hi < m) continue;
      const long dlo = std::max(0L, cur.lo - m);
      const long dhi = cur.hi - m;
      double* row = rows.data() + s * width + (m + dlo - cur.lo);
      binomial_row(n - m, p, dlo, dhi, row);
    }

    std::vector<double> next(static_cast<std::size_t>(width), 0.0);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (long t = 0; t < width; ++t) {
      double acc = 0.0;
      for (long s = 0; s < sources; ++s) {
        acc += prev[static_cast<std::size_t>(s)] * rows[static_cast<std::size_t>(s * width + t)];
      }
      next[static_cast<std::size_t>(t)] = acc;
    }
    prev.swap(next);
    prev_int = cur;
    z_prev = grid[i];
    if (!renormalize(prev, log_scale)) return 0.0;
  }
  return finish(prev, log_scale);
}

double hyper2_recursion(long n, std::span<const long> sizes, const std::vector<Interval>& inside,
                        Exec exec) {
  // State: chain-1 rank count m at s; chain 2 holds s - m.
  std::vector<double> prev{1.0};
  Interval prev_int{0, 0};
  long s_prev = 0;
  double log_scale = 0.0;
  bool symmetric_start_done = false;
  std::vector<double> rows;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const long s = sizes[i];
    const Interval band = inside[i];
    const Interval cur{std::max(band.lo, s - band.hi), std::min(band.hi, s - band.lo)};
    if (cur.empty()) return 0.0;
    const long width = cur.width();
    std::vector<double> next(static_cast<std::size_t>(width), 0.0);

    if (s == s_prev) {
      for (long k = cur.lo; k <= cur.hi; ++k) {
        if (k >= prev_int.lo && k <= prev_int.hi) {
          next[static_cast<std::size_t>(k - cur.lo)] = prev[static_cast<std::size_t>(k - prev_int.lo)];
        }
      }
    } else if (!symmetric_start_done) {
      // First nonzero pooled size: chains are exchangeable, so only m <= s - m is
      // propagated, weighted by the number of chain orderings it stands for.
      for (long k = cur.lo; k <= cur.hi; ++k) {
        if (k > s - k) continue;
        const double weight = k < s - k ? 2.0 : 1.0;
        next[static_cast<std::size_t>(k - cur.lo)] = weight * std::exp(log_hyper(k, n, n, s));
      }
      symmetric_start_done = true;
    } else {
      const long delta = s - s_prev;
      const long sources = prev_int.width();
      rows.assign(static_cast<std::size_t>(sources * width), 0.0);
#pragma omp parallel for schedule(dynamic, 8) if (exec == Exec::parallel)
      for (long src = 0; src < sources; ++src) {
        const long m = prev_int.lo + src;
        if (prev[static_cast<std::size_t>(src)] == 0.0 || cur.hi < m) continue;
        const long dlo = std::max(0L, cur.lo - m);
        const long dhi = cur.hi - m;
        double* row = rows.data() + src * width + (m + dlo - cur.lo);
        hyper_row(n - m, n - (s_prev - m), delta, dlo, dhi, row);
      }
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
      for (long t = 0; t < width; ++t) {
        double acc = 0.0;
        for (long src = 0; src < sources; ++src) {
          acc += prev[static_cast<std::size_t>(src)] * rows[static_cast<std::size_t>(src * width + t)];
        }
        next[static_cast<std::size_t>(t)] = acc;
      }
    }
    prev.swap(next);
    prev_int = cur;
    s_prev = s;
    if (!renormalize(prev, log_scale)) return 0.0;
  }
  return finish(prev, log_scale);
}

double hyper3_recursion(long n, std::span<const long> sizes, const std::vector<Interval>& inside,
                        Exec exec) {
  // State: (a, b) rank counts of chains 1 and 2; chain 3 holds s - a - b.
  // Dense storage over [lo, hi]^2; cells with the third count outside the band stay 0.
  std::vector<double> prev{1.0};
  Interval prev_int{0, 0};
  long s_prev = 0;
  double log_scale = 0.0;
  bool symmetric_start_done = false;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const long s = sizes[i];
    const Interval cur = inside[i];
    if (cur.empty()) return 0.0;
    const long w = cur.width();
    const long pw = prev_int.width();
    std::vector<double> next(static_cast<std::size_t>(w * w), 0.0);
    auto third_ok = [&](long a, long b) {
      const long c = s - a - b;
      return c >= cur.lo && c <= cur.hi;
    };

    if (s == s_prev) {
      for (long a = cur.lo; a <= cur.hi; ++a) {
        for (long b = cur.lo; b <= cur.hi; ++b) {
          if (!third_ok(a, b) || a < prev_int.lo || a > prev_int.hi || b < prev_int.lo ||
              b > prev_int.hi) {
            continue;
          }
          next[static_cast<std::size_t>((a - cur.lo) * w + (b - cur.lo))] =
              prev[static_cast<std::size_t>((a - prev_int.lo) * pw + (b - prev_int.lo))];
        }
      }
    } else if (!symmetric_start_done) {
      // Canonical a <= b <= c at the first nonzero pooled size, weighted by the number of
      // distinct chain orderings.
      const MHypParams params{{n, n, n}, s};
      for (long a = cur.lo; a <= cur.hi; ++a) {
        for (long b = a; b <= cur.hi; ++b) {
          const long c = s - a - b;
          if (c < b || !third_ok(a, b)) continue;
          double weight = 6.0;
          if (a == b && b == c) {
            weight = 1.0;
          } else if (a == b || b == c) {
            weight = 3.0;
          }
          const long counts[3] = {a, b, c};
          next[static_cast<std::size_t>((a - cur.lo) * w + (b - cur.lo))] =
              weight * mhyper_pmf(counts, params);
        }
      }
      symmetric_start_done = true;
    } else {
      const long delta = s - s_prev;
      // Gather over the first target coordinate; each thread owns whole target rows.
#pragma omp parallel if (exec == Exec::parallel)
      {
        std::vector<double> db_row(static_cast<std::size_t>(w));
#pragma omp for schedule(dynamic, 1)
        for (long ta = cur.lo; ta <= cur.hi; ++ta) {
          double* target_row = next.data() + (ta - cur.lo) * w;
          for (long a = prev_int.lo; a <= std::min(ta, prev_int.hi); ++a) {
            const long da = ta - a;
            for (long b = prev_int.lo; b <= prev_int.hi; ++b) {
              const double mass =
                  prev[static_cast<std::size_t>((a - prev_int.lo) * pw + (b - prev_int.lo))];
              if (mass == 0.0) continue;
              const long c = s_prev - a - b;
              const long rem_a = n - a;
              const long rem_b = n - b;
              const long rem_c = n - c;
              if (da > rem_a || da > delta) continue;
              const double p_da = std::exp(log_hyper(da, rem_a, rem_b + rem_c, delta));
              if (p_da == 0.0) continue;
              // Targets tb must keep tc = s - ta - tb inside the band as well.
              const long tb_lo = std::max({cur.lo, b, s - ta - cur.hi});
              const long tb_hi = std::min(cur.hi, s - ta - cur.lo);
              if (tb_lo > tb_hi) continue;
              hyper_row(rem_b, rem_c, delta - da, tb_lo - b, tb_hi - b, db_row.data());
              for (long tb = tb_lo; tb <= tb_hi; ++tb) {
                target_row[tb - cur.lo] += mass * p_da * db_row[static_cast<std::size_t>(tb - tb_lo)];
              }
            }
          }
        }
      }
    }
    prev.swap(next);
    prev_int = cur;
    s_prev = s;
    if (!renormalize(prev, log_scale)) return 0.0;
  }
  return finish(prev, log_scale);
}

GammaResult optimize_gamma(const std::vector<MarginalTable>& tables, double alpha,
                           const OptimizeOptions& options, const CoverageFn& coverage) {
  check_alpha(alpha);
  const double target = 1.0 - alpha;
  long evaluations = 0;
  auto objective = [&](double gamma) {
    ++evaluations;
    return std::fabs(target - coverage(interiors(tables, gamma)));
  };
  const auto found = brent_minimize(objective, 0.0, alpha, options.tol, options.max_iter);
  if (!found.converged) {
    throw Error(ErrorCode::non_convergence,
                "Brent search did not converge in " + std::to_string(options.max_iter) +
                    " iterations");
  }

  // Coverage is constant between consecutive breakpoints; evaluate each step at its midpoint.
  std::vector<double> edges{0.0};
  const auto bp = breakpoints(tables, alpha);
  edges.insert(edges.end(), bp.begin(), bp.end());
  edges.push_back(alpha);
  const long steps = static_cast<long>(edges.size()) - 1;
  auto step_of = [&](double gamma) {
    const auto it = std::lower_bound(edges.begin() + 1, edges.end(), gamma);
    return std::clamp(static_cast<long>(it - edges.begin()) - 1, 0L, steps - 1);
  };
  auto midpoint = [&](long j) {
    return 0.5 * (edges[static_cast<std::size_t>(j)] + edges[static_cast<std::size_t>(j + 1)]);
  };
  std::map<long, double> cov_cache;
  auto step_coverage = [&](long j) {
    if (auto it = cov_cache.find(j); it != cov_cache.end()) return it->second;
    ++evaluations;
    const double c = coverage(interiors(tables, midpoint(j)));
    cov_cache.emplace(j, c);
    return c;
  };

  long best = step_of(found.x);
  double best_err = std::fabs(target - step_coverage(best));
  for (long dir : {-1L, 1L}) {
    for (long j = best + dir; j >= 0 && j < steps; j += dir) {
      const double err = std::fabs(target - step_coverage(j));
      if (err >= best_err) break;
      best = j;
      best_err = err;
    }
  }
  GammaResult out;
  out.gamma = midpoint(best);
  out.attained_coverage = step_coverage(best);
  out.method = GammaMethod::optimization;
  out.meta = evaluations;
  return out;
}

}  // namespace ecdfb::detail
