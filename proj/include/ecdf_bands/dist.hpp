#pragma once

#include <span>
#include <vector>

namespace ecdfb {

/// Natural-log probability; `value` may be -infinity.
struct LogWeight {
  double value;
  double prob() const noexcept;
};

LogWeight binom_log_pmf(long k, long n, double p);
double binom_pmf(long k, long n, double p);

/// Pr(X <= k) for X ~ Bin(n, p). Returns 0 for k < 0 and 1 for k >= n.
/// The smaller tail is summed so far-tail values keep their relative accuracy.
double binom_cdf(long k, long n, double p);

/// Smallest k in {0..n} with binom_cdf(k) >= q; q = 0 maps to 0, q = 1 to the top of the support.
long binom_quantile(double q, long n, double p);

/// Hypergeometric: `draws` items taken without replacement from `succ` successes and `fail` failures.
LogWeight hyper_log_pmf(long k, long succ, long fail, long draws);
double hyper_pmf(long k, long succ, long fail, long draws);
double hyper_cdf(long k, long succ, long fail, long draws);
long hyper_quantile(double q, long succ, long fail, long draws);

inline long hyper_support_min(long /*succ*/, long fail, long draws) noexcept {
  return draws > fail ? draws - fail : 0;
}
inline long hyper_support_max(long succ, long /*fail*/, long draws) noexcept {
  return succ < draws ? succ : draws;
}

struct MHypParams {
  std::vector<long> populations;
  long draws = 0;
};

LogWeight mhyper_log_pmf(std::span<const long> counts, const MHypParams& params);
double mhyper_pmf(std::span<const long> counts, const MHypParams& params);

namespace detail {
// Loader's saddle-point pieces, exposed for the recursion kernels.
double stirlerr(long n) noexcept;
double bd0(double x, double np) noexcept;
double binom_log_density(long x, long n, double p, double q) noexcept;
}  // namespace detail

}  // namespace ecdfb
