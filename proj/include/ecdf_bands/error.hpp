#pragma once

#include <stdexcept>
#include <string>

namespace ecdfb {

enum class ErrorCode {
  invalid_probability,
  invalid_params,
  invalid_alpha,
  invalid_gamma,
  too_few_replicates,
  empty_comparison,
  unequal_chain_lengths,
  unsupported_chain_count,
  non_convergence,
  out_of_range,
  missing_slice,
  domain_error,
  chain_too_short,
  invalid_bins,
  grid_mismatch,
  parse_error,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

/// Every library failure is reported as an Error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ecdfb
