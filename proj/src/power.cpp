#include "ecdf_bands/power.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecdf_bands/bands_multi.hpp"
#include "ecdf_bands/error.hpp"
#include "ecdf_bands/quantile.hpp"
#include "ecdf_bands/rng.hpp"

namespace ecdfb {

namespace {

std::vector<double> sorted_copy(std::span<const double> u) {
  if (u.empty()) throw Error(ErrorCode::invalid_params, "statistic needs a nonempty sample");
  std::vector<double> s(u.begin(), u.end());
  std::sort(s.begin(), s.end());
  return s;
}

Statistic statistic_of(PowerTest test) {
  switch (test) {
    case PowerTest::T1:
      return Statistic::T1;
    case PowerTest::W2:
      return Statistic::W2;
    case PowerTest::U2:
      return Statistic::U2;
    default:
      return Statistic::KS;
  }
}

constexpr std::uint64_t kCalibrationStream = 0x5bd1e9955bd1e995ULL;

}  // namespace

double apply_transform(double x, Transformation t) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::domain_error, "transform input must lie in [0, 1]");
  if (!(t.k > 0.0)) throw Error(ErrorCode::invalid_params, "transform power k must be positive");
  if (x == 0.0 || x == 1.0) return x;
  const double scale = std::pow(2.0, t.k - 1.0);
  switch (t.family) {
    case Family::A:
      return 1.0 - std::pow(1.0 - x, t.k);
    case Family::B:
      return x <= 0.5 ? scale * std::pow(x, t.k) : 1.0 - scale * std::pow(1.0 - x, t.k);
    case Family::C:
      return x <= 0.5 ? 0.5 - scale * std::pow(0.5 - x, t.k) : 0.5 + scale * std::pow(x - 0.5, t.k);
  }
  return x;
}

double stat_T1(std::span<const double> u) {
  const auto s = sorted_copy(u);
  const double n = static_cast<double>(s.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) sum += std::fabs(s[i] - static_cast<double>(i + 1) / (n + 1.0));
  return sum / n;
}

double stat_W2(std::span<const double> u) {
  const auto s = sorted_copy(u);
  const double n = static_cast<double>(s.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s[i] - (2.0 * static_cast<double>(i + 1) - 1.0) / (2.0 * n);
    sum += d * d;
  }
  return sum + 1.0 / (12.0 * n);
}

double stat_U2(std::span<const double> u) {
  const double n = static_cast<double>(u.size());
  const double w2 = stat_W2(u);
  const double mean = std::accumulate(u.begin(), u.end(), 0.0) / n;
  return w2 - n * (mean - 0.5) * (mean - 0.5);
}

double stat_KS(std::span<const double> u) {
  const auto s = sorted_copy(u);
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double above = static_cast<double>(i + 1) / n - s[i];
    const double below = s[i] - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  return d;
}

double compute_statistic(Statistic stat, std::span<const double> u) {
  switch (stat) {
    case Statistic::T1:
      return stat_T1(u);
    case Statistic::W2:
      return stat_W2(u);
    case Statistic::U2:
      return stat_U2(u);
    case Statistic::KS:
      return stat_KS(u);
  }
  return 0.0;
}

const char* to_string(Family family) noexcept {
  switch (family) {
    case Family::A:
      return "A";
    case Family::B:
      return "B";
    case Family::C:
      return "C";
  }
  return "?";
}

const char* to_string(PowerTest test) noexcept {
  switch (test) {
    case PowerTest::bands:
      return "bands";
    case PowerTest::T1:
      return "T1";
    case PowerTest::W2:
      return "W2";
    case PowerTest::U2:
      return "U2";
    case PowerTest::KS:
      return "KS";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "A" || s == "a") return Family::A;
  if (s == "B" || s == "b") return Family::B;
  if (s == "C" || s == "c") return Family::C;
  throw Error(ErrorCode::invalid_params, "unknown transformation family '" + s + "'");
}

PowerTest power_test_from_string(const std::string& s) {
  if (s == "bands") return PowerTest::bands;
  if (s == "T1") return PowerTest::T1;
  if (s == "W2") return PowerTest::W2;
  if (s == "U2") return PowerTest::U2;
  if (s == "KS") return PowerTest::KS;
  throw Error(ErrorCode::invalid_params, "unknown test '" + s + "'");
}

double critical_value(Statistic stat, long n, double alpha, long m, std::uint64_t seed, Exec exec) {
  if (m < 1000) throw Error(ErrorCode::too_few_replicates, "critical values need at least 1000 replicates");
  if (n < 1) throw Error(ErrorCode::invalid_params, "sample size must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::invalid_alpha, "alpha must lie in (0, 1)");
  std::vector<double> values(static_cast<std::size_t>(m));
#pragma omp parallel if (exec == Exec::parallel)
  {
    std::vector<double> u(static_cast<std::size_t>(n));
#pragma omp for schedule(static)
    for (long rep = 0; rep < m; ++rep) {
      auto gen = replicate_stream(seed, static_cast<std::uint64_t>(rep));
      for (auto& v : u) v = uniform01(gen);
      values[static_cast<std::size_t>(rep)] = compute_statistic(stat, u);
    }
  }
  return quantile_type7(std::move(values), 1.0 - alpha);
}

PowerCurve power_sweep(const PowerOptions& o) {
  if (o.replicates < 1000) throw Error(ErrorCode::too_few_replicates, "power sweeps need at least 1000 replicates");
  if (o.n < 1 || o.chains < 1) throw Error(ErrorCode::invalid_params, "n and chains must be positive");
  if (o.chains > 1 && o.test != PowerTest::bands) {
    throw Error(ErrorCode::invalid_params, "the multi-chain sweep supports the bands test only");
  }
  const std::uint64_t calibration_seed = o.seed ^ kCalibrationStream;
  const long L = o.chains;
  const auto grid = default_grid(o.n, std::nullopt, o.k_max);

  ConfidenceBands bands{grid, {}, {}, {}, o.n, 1, {}};
  double cv = 0.0;
  if (o.test == PowerTest::bands) {
    bands = L == 1 ? bands_from_gamma(o.n, grid, gamma_optimize(o.n, grid, o.alpha))
                   : multi_bands(o.n, L, grid, o.alpha, BandMethod::automatic,
                                 o.calibration_replicates, calibration_seed);
  } else {
    cv = critical_value(statistic_of(o.test), o.n, o.alpha, o.calibration_replicates,
                        calibration_seed, o.exec);
  }

  PowerCurve curve{o.test, o.family, o.n, L, o.ks, {}, {}, o.replicates, o.seed};
  for (double k : o.ks) {
    const Transformation t{o.family, k};
    long rejected = 0;
#pragma omp parallel if (o.exec == Exec::parallel) reduction(+ : rejected)
    {
      std::vector<double> u(static_cast<std::size_t>(o.n));
      std::vector<std::pair<double, long>> pooled(static_cast<std::size_t>(o.n * L));
      std::vector<long> counts(grid.size());
      std::vector<std::vector<long>> chain_counts(static_cast<std::size_t>(L), std::vector<long>(grid.size()));
#pragma omp for schedule(static)
      for (long rep = 0; rep < o.replicates; ++rep) {
        auto gen = replicate_stream(o.seed, static_cast<std::uint64_t>(rep));
        bool reject = false;
        if (L == 1) {
          for (auto& v : u) v = apply_transform(uniform01(gen), t);
          if (o.test == PowerTest::bands) {
            std::sort(u.begin(), u.end());
            std::size_t j = 0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
              while (j < u.size() && u[j] <= grid[i]) ++j;
              counts[i] = static_cast<long>(j);
            }
            reject = !inside_bands(bands, counts);
          } else {
            reject = compute_statistic(statistic_of(o.test), u) > cv;
          }
        } else {
          for (long l = 0; l < L; ++l) {
            for (long j = 0; j < o.n; ++j) {
              const double x = uniform01(gen);
              pooled[static_cast<std::size_t>(l * o.n + j)] = {l == 0 ? apply_transform(x, t) : x, l};
            }
          }
          std::sort(pooled.begin(), pooled.end());
          std::vector<long> running(static_cast<std::size_t>(L), 0);
          long taken = 0;
          for (std::size_t i = 0; i < grid.size(); ++i) {
            for (; taken < bands.pooled_sizes[i]; ++taken) {
              ++running[static_cast<std::size_t>(pooled[static_cast<std::size_t>(taken)].second)];
            }
            for (long l = 0; l < L; ++l) chain_counts[static_cast<std::size_t>(l)][i] = running[static_cast<std::size_t>(l)];
          }
          reject = !inside_bands_multi(bands, chain_counts);
        }
        rejected += reject ? 1 : 0;
      }
    }
    const double rate = static_cast<double>(rejected) / static_cast<double>(o.replicates);
    curve.rates.push_back(rate);
    curve.std_errors.push_back(std::sqrt(rate * (1.0 - rate) / static_cast<double>(o.replicates)));
  }
  return curve;
}

}  // namespace ecdfb
