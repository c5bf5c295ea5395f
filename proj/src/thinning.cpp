#include "ecdf_bands/thinning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "ecdf_bands/error.hpp"
#include "ecdf_bands/quantile.hpp"
#include "ecdf_bands/rng.hpp"

namespace ecdfb {

namespace {

using Chains = std::vector<std::vector<double>>;

Chains split_chains(const Chains& chains) {
  Chains out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

// Lag-t autocovariances (normalised by n) of each chain, computed on demand.
class Autocovariance {
 public:
  explicit Autocovariance(const Chains& chains) : chains_(chains) {
    for (const auto& c : chains_) {
      means_.push_back(std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size()));
    }
  }

  double mean_at(std::size_t lag) const {
    double total = 0.0;
    for (std::size_t j = 0; j < chains_.size(); ++j) {
      const auto& c = chains_[j];
      double s = 0.0;
      for (std::size_t t = 0; t + lag < c.size(); ++t) s += (c[t] - means_[j]) * (c[t + lag] - means_[j]);
      total += s / static_cast<double>(c.size());
    }
    return total / static_cast<double>(chains_.size());
  }

  const std::vector<double>& means() const noexcept { return means_; }

 private:
  const Chains& chains_;
  std::vector<double> means_;
};

Chains indicator(const Chains& chains, double cut) {
  Chains out;
  for (const auto& c : chains) {
    std::vector<double> v(c.size());
    std::transform(c.begin(), c.end(), v.begin(), [&](double x) { return x <= cut ? 1.0 : 0.0; });
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<double> pooled(const Chains& chains) {
  std::vector<double> all;
  for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
  return all;
}

// Average ranks mapped through the normal quantile function.
Chains rank_normalize(const Chains& chains) {
  const auto all = pooled(chains);
  const std::size_t total = all.size();
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return all[a] < all[b]; });
  std::vector<double> ranks(total);
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j + 1 < total && all[order[j + 1]] == all[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  const boost::math::normal_distribution<double> normal;
  Chains out;
  std::size_t pos = 0;
  for (const auto& c : chains) {
    std::vector<double> z(c.size());
    for (auto& v : z) {
      v = boost::math::quantile(normal, (ranks[pos++] - 0.375) / (static_cast<double>(total) + 0.25));
    }
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace

ChainSet ar1_simulate(double phi, long n, long chains, std::uint64_t seed) {
  if (!(std::fabs(phi) < 1.0)) throw Error(ErrorCode::invalid_params, "phi must lie in (-1, 1)");
  if (n < 1 || chains < 1) throw Error(ErrorCode::invalid_params, "n and chains must be positive");
  const double innovation = std::sqrt(1.0 - phi * phi);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(chains));
  for (long l = 0; l < chains; ++l) {
    auto gen = replicate_stream(seed, static_cast<std::uint64_t>(l));
    auto& x = out[static_cast<std::size_t>(l)];
    x.resize(static_cast<std::size_t>(n));
    x[0] = standard_normal(gen);
    for (long t = 1; t < n; ++t) {
      x[static_cast<std::size_t>(t)] = phi * x[static_cast<std::size_t>(t - 1)] + innovation * standard_normal(gen);
    }
  }
  return ChainSet(std::move(out));
}

double ess_basic(const Chains& input) {
  const Chains chains = split_chains(input);
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  if (n < 4) throw Error(ErrorCode::chain_too_short, "chains are too short for ESS");
  const double total = static_cast<double>(m * n);
  const double nd = static_cast<double>(n);

  Autocovariance acov(chains);
  const double mean_var = acov.mean_at(0) * nd / (nd - 1.0);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (m > 1) {
    const auto& means = acov.means();
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
    double between = 0.0;
    for (double v : means) between += (v - grand) * (v - grand);
    var_plus += between / static_cast<double>(m - 1);
  }
  if (!(var_plus > 0.0)) return total;

  auto rho = [&](std::size_t lag) { return 1.0 - (mean_var - acov.mean_at(lag)) / var_plus; };
  std::vector<double> r(n, 0.0);
  r[0] = 1.0;
  double even = 1.0;
  double odd = rho(1);
  r[1] = odd;
  std::size_t t = 0;
  while (t + 5 < n && std::isfinite(even + odd) && even + odd > 0.0) {
    t += 2;
    even = rho(t);
    odd = rho(t + 1);
    if (even + odd >= 0.0) {
      r[t] = even;
      r[t + 1] = odd;
    }
  }
  const std::size_t max_t = t;
  if (even > 0.0) r[max_t] = even;

  // Initial monotone sequence on the sums of adjacent pairs.
  for (t = 2; t + 2 <= max_t; t += 2) {
    if (r[t] + r[t + 1] > r[t - 2] + r[t - 1]) {
      r[t] = 0.5 * (r[t - 2] + r[t - 1]);
      r[t + 1] = r[t];
    }
  }
  double tau = -1.0 + r[max_t];
  for (std::size_t j = 0; j < max_t; ++j) tau += 2.0 * r[j];
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

EssReport ess_report(const ChainSet& chains) {
  if (chains.length() < 8) throw Error(ErrorCode::chain_too_short, "ESS needs at least 8 draws per chain");
  const Chains& x = chains.chains();
  const auto all = pooled(x);
  EssReport out;
  out.ess_mean = ess_basic(x);
  out.ess_bulk = ess_basic(rank_normalize(x));
  const double q05 = quantile_type7(all, 0.05);
  const double q95 = quantile_type7(all, 0.95);
  out.ess_tail = std::min(ess_basic(indicator(x, q05)), ess_basic(indicator(x, q95)));
  for (std::size_t j = 0; j < out.ess_quantiles.size(); ++j) {
    const double prob = 0.05 * static_cast<double>(j + 1);
    out.ess_quantiles[j] = ess_basic(indicator(x, quantile_type7(all, prob)));
  }
  return out;
}

const char* to_string(ThinningStrategy s) noexcept {
  switch (s) {
    case ThinningStrategy::mean_ess:
      return "MEAN_ESS";
    case ThinningStrategy::quantile_19:
      return "QUANTILE_19";
    case ThinningStrategy::bulk_tail_min:
      return "BULK_TAIL_MIN";
    case ThinningStrategy::tail_ess:
      return "TAIL_ESS";
  }
  return "?";
}

ThinningStrategy strategy_from_string(const std::string& s) {
  if (s == "MEAN_ESS") return ThinningStrategy::mean_ess;
  if (s == "QUANTILE_19") return ThinningStrategy::quantile_19;
  if (s == "BULK_TAIL_MIN") return ThinningStrategy::bulk_tail_min;
  if (s == "TAIL_ESS") return ThinningStrategy::tail_ess;
  throw Error(ErrorCode::invalid_params, "unknown thinning strategy '" + s + "'");
}

ThinningPlan thinning_factor(const EssReport& report, long n_total, long chain_length,
                             ThinningStrategy strategy) {
  double ess = report.ess_mean;
  switch (strategy) {
    case ThinningStrategy::mean_ess:
      break;
    case ThinningStrategy::quantile_19:
      ess = *std::min_element(report.ess_quantiles.begin(), report.ess_quantiles.end());
      break;
    case ThinningStrategy::bulk_tail_min:
      ess = std::min(report.ess_bulk, report.ess_tail);
      break;
    case ThinningStrategy::tail_ess:
      ess = report.ess_tail;
      break;
  }
  const double ratio = static_cast<double>(n_total) / ess;
  const long factor = ratio <= 1.25 ? 1 : static_cast<long>(std::ceil(ratio));
  return {strategy, ess, factor, (chain_length + factor - 1) / factor};
}

ChainSet thin(const ChainSet& chains, long t) {
  if (t < 1) throw Error(ErrorCode::invalid_params, "thinning factor must be at least 1");
  std::vector<std::vector<double>> out;
  for (const auto& c : chains.chains()) {
    std::vector<double> kept;
    for (std::size_t j = 0; j < c.size(); j += static_cast<std::size_t>(t)) kept.push_back(c[j]);
    out.push_back(std::move(kept));
  }
  return ChainSet(std::move(out));
}

double autocorrelation(std::span<const double> x, long lag) {
  const std::size_t n = x.size();
  if (lag < 0 || static_cast<std::size_t>(lag) >= n) throw Error(ErrorCode::invalid_params, "lag out of range");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    den += (x[t] - mean) * (x[t] - mean);
    if (t + static_cast<std::size_t>(lag) < n) num += (x[t] - mean) * (x[t + static_cast<std::size_t>(lag)] - mean);
  }
  return num / den;
}

}  // namespace ecdfb
