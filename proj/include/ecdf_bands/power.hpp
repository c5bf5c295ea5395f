#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecdf_bands/bands_single.hpp"

namespace ecdfb {

enum class Family { A, B, C };

/// Monotone maps of [0, 1] onto itself fixing 0 and 1; k = 1 is the identity.
struct Transformation {
  Family family = Family::A;
  double k = 1.0;
};

double apply_transform(double x, Transformation t);

double stat_T1(std::span<const double> u);
double stat_W2(std::span<const double> u);
double stat_U2(std::span<const double> u);
double stat_KS(std::span<const double> u);

enum class Statistic { T1, W2, U2, KS };
enum class PowerTest { bands, T1, W2, U2, KS };

const char* to_string(Family family) noexcept;
const char* to_string(PowerTest test) noexcept;
Family family_from_string(const std::string& s);
PowerTest power_test_from_string(const std::string& s);

double compute_statistic(Statistic stat, std::span<const double> u);

/// Empirical (1 - alpha) quantile of the statistic over m uniform samples of size n.
double critical_value(Statistic stat, long n, double alpha, long m, std::uint64_t seed,
                      Exec exec = Exec::parallel);

struct PowerOptions {
  PowerTest test = PowerTest::bands;
  Family family = Family::A;
  std::vector<double> ks;
  long n = 100;
  /// Chains for the multi-sample bands test; only the first chain is transformed.
  long chains = 1;
  double alpha = 0.05;
  long replicates = 10000;
  std::uint64_t seed = 0;
  long k_max = 100;
  /// Replicates used to calibrate critical values or simulated bands.
  long calibration_replicates = 10000;
  Exec exec = Exec::parallel;
};

struct PowerCurve {
  PowerTest test = PowerTest::bands;
  Family family = Family::A;
  long n = 0;
  long chains = 1;
  std::vector<double> ks;
  std::vector<double> rates;
  /// Binomial Monte Carlo standard error of each rate.
  std::vector<double> std_errors;
  long replicates = 0;
  std::uint64_t seed = 0;
};

/// Rejection rate per k. Every k reuses the same replicate streams, so curves are smooth in k.
PowerCurve power_sweep(const PowerOptions& options);

}  // namespace ecdfb
