#pragma once

#include <stdexcept>
#include <string>

namespace sindex {

enum class errc {
  invalid_input,
  invalid_interval,
  numerical_failure,
  singular_covariance,
  empty_bin,
  empty_dataset,
  bin_too_small,
  no_admissible_bins,
  slope_undefined,
  parse_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::invalid_input: return "InvalidInput";
    case errc::invalid_interval: return "InvalidInterval";
    case errc::numerical_failure: return "NumericalFailure";
    case errc::singular_covariance: return "SingularCovariance";
    case errc::empty_bin: return "EmptyBin";
    case errc::empty_dataset: return "EmptyDataset";
    case errc::bin_too_small: return "BinTooSmall";
    case errc::no_admissible_bins: return "NoAdmissibleBins";
    case errc::slope_undefined: return "SlopeUndefined";
    case errc::parse_error: return "ParseError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

  // Exit-code bucket for the CLI: 2 for data problems, 3 for numerical ones.
  int exit_class() const noexcept {
    switch (code_) {
      case errc::invalid_input:
      case errc::invalid_interval:
      case errc::empty_bin:
      case errc::empty_dataset:
      case errc::parse_error:
        return 2;
      default:
        return 3;
    }
  }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace sindex
