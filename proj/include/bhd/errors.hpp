#pragma once

#include <stdexcept>
#include <string>

namespace bhd {

// User/config errors map to CLI exit code 2, I/O failures to exit code 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a covariance estimate implies a nonpositive quadrature variance
// (possible by statistical fluctuation at very low optical power). Carries the
// raw covariance so callers can still report it.
struct CovarianceOutOfRange : std::runtime_error {
  CovarianceOutOfRange(double cov, const std::string& what)
      : std::runtime_error(what), covariance(cov) {}
  double covariance;
};

}  // namespace bhd
