#pragma once

#include "ecdf_bands/transform.hpp"

namespace ecdfb::reference {

// Straightforward serial versions of the coverage recursions. They evaluate every transition
// from the distribution functions directly and skip all state-space reductions, which makes
// them slow but easy to audit; tests and benchmarks compare the production kernels against them.

double coverage_single(long n, const EvaluationGrid& grid, double gamma);

/// Any L >= 2: the full L-dimensional state with multivariate hypergeometric transitions.
double coverage_multi(long n, long chains, const EvaluationGrid& grid, double gamma);

}  // namespace ecdfb::reference
