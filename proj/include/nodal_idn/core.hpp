#pragma once

#include <complex>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nodal_idn {

using cplx = std::complex<double>;
using ComplexSamples = std::vector<cplx>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Failure categories. The CLI maps them onto exit codes.
enum class ErrorKind {
  InvalidInput,       // malformed model, datum or config
  Domain,             // evaluation point outside the region where a formula is valid
  HypothesisA,        // boundary map is not an embedding
  NumericalFailure,   // singular/ill-conditioned system, lost root tracking
  Inconsistent,       // cross-check between independent quantities failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

// Logging: NODAL_IDN_LOG in {error, info, debug}; default error.
enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("NODAL_IDN_LOG");
    if (env == nullptr) return LogLevel::Error;
    const std::string_view v(env);
    if (v == "debug") return LogLevel::Debug;
    if (v == "info") return LogLevel::Info;
    return LogLevel::Error;
  }();
  return level;
}

inline void log(LogLevel level, std::string_view msg) {
  if (static_cast<int>(level) > static_cast<int>(log_threshold())) return;
  static constexpr const char* names[] = {"error", "info", "debug"};
  std::cerr << "[nodal-idn:" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

inline double max_abs(std::span<const cplx> v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double sup_distance(std::span<const cplx> a, std::span<const cplx> b) {
  require(a.size() == b.size(), ErrorKind::InvalidInput, "sup_distance: size mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace nodal_idn
