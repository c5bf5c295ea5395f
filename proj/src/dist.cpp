#include "ecdf_bands/dist.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ecdf_bands/error.hpp"

namespace ecdfb {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_probability: return "invalid-probability";
    case ErrorCode::invalid_params: return "invalid-params";
    case ErrorCode::invalid_alpha: return "invalid-alpha";
    case ErrorCode::invalid_gamma: return "invalid-gamma";
    case ErrorCode::too_few_replicates: return "M-too-small";
    case ErrorCode::empty_comparison: return "empty-comparison";
    case ErrorCode::unequal_chain_lengths: return "unequal-chain-lengths";
    case ErrorCode::unsupported_chain_count: return "unsupported-L";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::missing_slice: return "missing-slice";
    case ErrorCode::domain_error: return "domain-error";
    case ErrorCode::chain_too_short: return "chain-too-short";
    case ErrorCode::invalid_bins: return "invalid-bins";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

double LogWeight::prob() const noexcept { return std::exp(value); }

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2Pi = 1.837877066409345483560659472811;  // log(2*pi)

// stirlerr(n/2) for n = 0..30, i.e. log(n!) - log(sqrt(2 pi n) (n/e)^n).
constexpr double kStirlerrHalves[31] = {
    0.0,
    0.15342640972002734529,
    0.08106146679532725822,
    0.054814121051917653896,
    0.041340695955409294094,
    0.033162873519936287485,
    0.027677925684998339149,
    0.023746163656297495971,
    0.020790672103765093112,
    0.018488450532673185231,
    0.016644691189821192163,
    0.015134973221917378874,
    0.013876128823070747999,
    0.012810465242920226924,
    0.011896709945891770095,
    0.011104559758206917327,
    0.010411265261972096497,
    0.0097994161261588032984,
    0.0092554621827127329177,
    0.008768700134139385463,
    0.0083305634333628712565,
    0.0079341145643140205472,
    0.007573675487951840795,
    0.0072445543013203831795,
    0.0069428401072095298657,
    0.0066652470327076824424,
    0.0064089941880042070684,
    0.0061717122630394576475,
    0.0059513701127588477356,
    0.005746216513010115682,
    0.005554733551962801371,
};

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::invalid_probability, std::string(what) + " must lie in [0,1]");
  }
}

void check_hyper(long succ, long fail, long draws) {
  if (succ < 0 || fail < 0 || draws < 0 || draws > succ + fail) {
    throw Error(ErrorCode::invalid_params, "hypergeometric requires 0 <= draws <= succ + fail");
  }
}

// Sum of a unimodal tail starting at `first` and moving away from the mode.
// `ratio(j)` returns pmf(next)/pmf(j) for the step taken from j.
template <class Ratio>
double tail_sum(double first, long from, long to, long step, Ratio ratio) {
  double term = first;
  double sum = first;
  for (long j = from; j != to; j += step) {
    term *= ratio(j);
    sum += term;
    if (term <= sum * 1e-17) break;
  }
  return sum;
}

}  // namespace

namespace detail {

double stirlerr(long n) noexcept {
  constexpr double S0 = 1.0 / 12.0;
  constexpr double S1 = 1.0 / 360.0;
  constexpr double S2 = 1.0 / 1260.0;
  constexpr double S3 = 1.0 / 1680.0;
  constexpr double S4 = 1.0 / 1188.0;
  if (n <= 15) return kStirlerrHalves[2 * n];
  const double x = static_cast<double>(n);
  const double xx = x * x;
  if (n > 500) return (S0 - S1 / xx) / x;
  if (n > 80) return (S0 - (S1 - S2 / xx) / xx) / x;
  if (n > 35) return (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x;
  return (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x;
}

double bd0(double x, double np) noexcept {
  if (std::fabs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

double binom_log_density(long x, long n, double p, double q) noexcept {
  if (x < 0 || x > n) return kNegInf;
  if (p == 0.0) return x == 0 ? 0.0 : kNegInf;
  if (q == 0.0) return x == n ? 0.0 : kNegInf;
  const double nd = static_cast<double>(n);
  if (x == 0) {
    if (n == 0) return 0.0;
    return p < 0.1 ? -bd0(nd, nd * q) - nd * p : nd * std::log(q);
  }
  if (x == n) {
    return q < 0.1 ? -bd0(nd, nd * p) - nd * q : nd * std::log(p);
  }
  const double xd = static_cast<double>(x);
  const double lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(xd, nd * p) -
                    bd0(nd - xd, nd * q);
  const double lf = kLn2Pi + std::log(xd) + std::log1p(-xd / nd);
  return lc - 0.5 * lf;
}

}  // namespace detail

LogWeight binom_log_pmf(long k, long n, double p) {
  check_probability(p, "p");
  if (n < 0) throw Error(ErrorCode::invalid_params, "n must be nonnegative");
  return {detail::binom_log_density(k, n, p, 1.0 - p)};
}

double binom_pmf(long k, long n, double p) { return binom_log_pmf(k, n, p).prob(); }

double binom_cdf(long k, long n, double p) {
  check_probability(p, "p");
  if (n < 0) throw Error(ErrorCode::invalid_params, "n must be nonnegative");
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  if (p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  const double q = 1.0 - p;
  const long mode = static_cast<long>(std::floor((static_cast<double>(n) + 1.0) * p));
  if (k < mode) {
    const double first = std::exp(detail::binom_log_density(k, n, p, q));
    const double down = q / p;
    return tail_sum(first, k, 0, -1, [&](long j) {
      return static_cast<double>(j) / static_cast<double>(n - j + 1) * down;
    });
  }
  const double first = std::exp(detail::binom_log_density(k + 1, n, p, q));
  const double up = p / q;
  const double upper = tail_sum(first, k + 1, n, 1, [&](long j) {
    return static_cast<double>(n - j) / static_cast<double>(j + 1) * up;
  });
  return 1.0 - upper;
}

long binom_quantile(double q, long n, double p) {
  check_probability(q, "q");
  check_probability(p, "p");
  if (n < 0) throw Error(ErrorCode::invalid_params, "n must be nonnegative");
  if (q <= 0.0) return 0;
  if (q >= 1.0) return p == 0.0 ? 0 : n;
  long lo = 0;
  long hi = n;
  while (lo < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (binom_cdf(mid, n, p) >= q) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

LogWeight hyper_log_pmf(long k, long succ, long fail, long draws) {
  check_hyper(succ, fail, draws);
  if (k < hyper_support_min(succ, fail, draws) || k > hyper_support_max(succ, fail, draws)) {
    return {kNegInf};
  }
  const long total = succ + fail;
  if (draws == 0 || draws == total) return {0.0};
  const double p = static_cast<double>(draws) / static_cast<double>(total);
  const double q = static_cast<double>(total - draws) / static_cast<double>(total);
  return {detail::binom_log_density(k, succ, p, q) +
          detail::binom_log_density(draws - k, fail, p, q) -
          detail::binom_log_density(draws, total, p, q)};
}

double hyper_pmf(long k, long succ, long fail, long draws) {
  return hyper_log_pmf(k, succ, fail, draws).prob();
}

double hyper_cdf(long k, long succ, long fail, long draws) {
  check_hyper(succ, fail, draws);
  const long lo = hyper_support_min(succ, fail, draws);
  const long hi = hyper_support_max(succ, fail, draws);
  if (k < lo) return 0.0;
  if (k >= hi) return 1.0;
  const long mode = static_cast<long>(std::floor(static_cast<double>(draws + 1) *
                                                 static_cast<double>(succ + 1) /
                                                 static_cast<double>(succ + fail + 2)));
  const double dfail = static_cast<double>(fail);
  const double dsucc = static_cast<double>(succ);
  const double ddraws = static_cast<double>(draws);
  if (k < mode) {
    const double first = hyper_pmf(k, succ, fail, draws);
    // pmf(j-1)/pmf(j) = j (fail - draws + j) / ((succ - j + 1)(draws - j + 1))
    return tail_sum(first, k, lo, -1, [&](long j) {
      const double jd = static_cast<double>(j);
      return jd * (dfail - ddraws + jd) / ((dsucc - jd + 1.0) * (ddraws - jd + 1.0));
    });
  }
  const double first = hyper_pmf(k + 1, succ, fail, draws);
  // pmf(j+1)/pmf(j) = (succ - j)(draws - j) / ((j + 1)(fail - draws + j + 1))
  const double upper = tail_sum(first, k + 1, hi, 1, [&](long j) {
    const double jd = static_cast<double>(j);
    return (dsucc - jd) * (ddraws - jd) / ((jd + 1.0) * (dfail - ddraws + jd + 1.0));
  });
  return 1.0 - upper;
}

long hyper_quantile(double q, long succ, long fail, long draws) {
  check_probability(q, "q");
  check_hyper(succ, fail, draws);
  long lo = hyper_support_min(succ, fail, draws);
  long hi = hyper_support_max(succ, fail, draws);
  if (q <= 0.0) return lo;
  if (q >= 1.0) return hi;
  while (lo < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (hyper_cdf(mid, succ, fail, draws) >= q) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

LogWeight mhyper_log_pmf(std::span<const long> counts, const MHypParams& params) {
  const auto& pops = params.populations;
  if (counts.size() != pops.size() || pops.empty()) {
    throw Error(ErrorCode::invalid_params, "counts and populations differ in length");
  }
  long total = 0;
  long drawn = 0;
  for (std::size_t l = 0; l < pops.size(); ++l) {
    if (pops[l] < 0) throw Error(ErrorCode::invalid_params, "negative population");
    if (counts[l] < 0 || counts[l] > pops[l]) {
      throw Error(ErrorCode::invalid_params, "count outside [0, population]");
    }
    total += pops[l];
    drawn += counts[l];
  }
  if (params.draws < 0 || params.draws > total) {
    throw Error(ErrorCode::invalid_params, "draws exceed total population");
  }
  if (drawn != params.draws) {
    throw Error(ErrorCode::invalid_params, "counts do not sum to draws");
  }
  if (params.draws == 0 || params.draws == total) return {0.0};
  // prod_l C(N_l, c_l) / C(N, s) == prod_l Bin(c_l | N_l, p) / Bin(s | N, p) for any p.
  const double p = static_cast<double>(params.draws) / static_cast<double>(total);
  const double q = static_cast<double>(total - params.draws) / static_cast<double>(total);
  double value = -detail::binom_log_density(params.draws, total, p, q);
  for (std::size_t l = 0; l < pops.size(); ++l) {
    value += detail::binom_log_density(counts[l], pops[l], p, q);
  }
  return {value};
}

double mhyper_pmf(std::span<const long> counts, const MHypParams& params) {
  return mhyper_log_pmf(counts, params).prob();
}

}  // namespace ecdfb
