#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ecdf_bands/bands_single.hpp"
#include "ecdf_bands/transform.hpp"

namespace ecdfb::detail {

/// CDF of one marginal over its support [lo, lo + cdf.size() - 1].
struct MarginalTable {
  long lo = 0;
  std::vector<double> cdf;

  long hi() const noexcept { return lo + static_cast<long>(cdf.size()) - 1; }
  /// Smallest k with cdf(k) >= q; q <= 0 gives lo and q >= 1 gives hi.
  long quantile(double q) const noexcept;
};

struct Interval {
  long lo = 0;
  long hi = -1;
  long width() const noexcept { return hi - lo + 1; }
  bool empty() const noexcept { return hi < lo; }
};

std::vector<MarginalTable> binomial_tables(long n, const EvaluationGrid& grid);
std::vector<MarginalTable> hyper_tables(long n, long chains, std::span<const long> sizes);

std::vector<Interval> interiors(const std::vector<MarginalTable>& tables, double gamma);

/// Sorted distinct γ in (0, alpha) at which some interior changes.
std::vector<double> breakpoints(const std::vector<MarginalTable>& tables, double alpha);

double binomial_recursion(long n, const EvaluationGrid& grid, const std::vector<Interval>& inside,
                          Exec exec);
double hyper2_recursion(long n, std::span<const long> sizes, const std::vector<Interval>& inside,
                        Exec exec);
double hyper3_recursion(long n, std::span<const long> sizes, const std::vector<Interval>& inside,
                        Exec exec);

using CoverageFn = std::function<double(const std::vector<Interval>&)>;

/// Brent search for argmin |1 - alpha - coverage(γ)| on [0, alpha], followed by a walk over
/// the neighbouring steps of the piecewise-constant coverage.
GammaResult optimize_gamma(const std::vector<MarginalTable>& tables, double alpha,
                           const OptimizeOptions& options, const CoverageFn& coverage);

void check_alpha(double alpha);
void check_gamma(double gamma);

}  // namespace ecdfb::detail
