#pragma once

// Periodic spectral tools on equispaced samples t_k = 2*pi*k/N: DFT,
// differentiation, antiderivative and trigonometric interpolation.

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <span>
#include <vector>

#include "nodal_idn/core.hpp"

namespace nodal_idn::spectral {

/// Forward DFT (no scaling) or inverse DFT (with the 1/N factor).
inline ComplexSamples dft(std::span<const cplx> x, bool inverse = false) {
  thread_local Eigen::FFT<double> fft;
  const ComplexSamples in(x.begin(), x.end());
  ComplexSamples out;
  if (inverse) {
    fft.inv(out, in);
  } else {
    fft.fwd(out, in);
  }
  return out;
}

// Signed wavenumber of DFT bin k; the Nyquist bin of even N maps to 0 for
// odd-order operators (derivative) and is treated separately elsewhere.
inline long wavenumber(std::size_t k, std::size_t n) {
  const long kk = static_cast<long>(k);
  const long nn = static_cast<long>(n);
  return kk <= nn / 2 ? kk : kk - nn;
}

/// d/dt of a periodic sampled function.
inline ComplexSamples differentiate(std::span<const cplx> x) {
  const std::size_t n = x.size();
  auto c = dft(x);
  for (std::size_t k = 0; k < n; ++k) {
    long w = wavenumber(k, n);
    if (n % 2 == 0 && k == n / 2) w = 0;
    c[k] *= cplx(0.0, static_cast<double>(w));
  }
  return dft(c, true);
}

/// Periodic antiderivative with zero mean. The mean of x must vanish (the
/// caller checks; a nonzero mean is silently dropped).
inline ComplexSamples antiderivative(std::span<const cplx> x) {
  const std::size_t n = x.size();
  auto c = dft(x);
  for (std::size_t k = 0; k < n; ++k) {
    long w = wavenumber(k, n);
    if (w == 0 || (n % 2 == 0 && k == n / 2)) {
      c[k] = 0.0;
    } else {
      c[k] /= cplx(0.0, static_cast<double>(w));
    }
  }
  return dft(c, true);
}

inline cplx mean(std::span<const cplx> x) {
  cplx acc{0.0, 0.0};
  for (const auto& v : x) acc += v;
  return acc / static_cast<double>(x.size());
}

/// Trigonometric interpolation onto m >= n equispaced samples.
inline ComplexSamples interpolate(std::span<const cplx> x, std::size_t m) {
  const std::size_t n = x.size();
  require(m >= n, ErrorKind::InvalidInput, "interpolate: target size below source size");
  auto c = dft(x);
  ComplexSamples big(m, cplx{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const long w = wavenumber(k, n);
    if (n % 2 == 0 && k == n / 2) {
      // split the Nyquist coefficient symmetrically
      big[n / 2] += 0.5 * c[k];
      big[m - n / 2] += 0.5 * c[k];
      continue;
    }
    const std::size_t dst = w >= 0 ? static_cast<std::size_t>(w)
                                   : m - static_cast<std::size_t>(-w);
    big[dst] += c[k];
  }
  auto out = dft(big, true);
  const double scale = static_cast<double>(m) / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  return out;
}

/// Evaluates the trigonometric interpolant of x at an arbitrary parameter t.
inline cplx evaluate_at(std::span<const cplx> x, double t) {
  const std::size_t n = x.size();
  auto c = dft(x);
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < n; ++k) {
    const long w = wavenumber(k, n);
    if (n % 2 == 0 && k == n / 2) {
      acc += c[k] * std::cos(static_cast<double>(n / 2) * t);
      continue;
    }
    acc += c[k] * std::polar(1.0, static_cast<double>(w) * t);
  }
  return acc / static_cast<double>(n);
}

/// Relative energy in the top quarter of the spectrum; a cheap resolution
/// diagnostic for sampled boundary data.
inline double tail_fraction(std::span<const cplx> x) {
  const std::size_t n = x.size();
  auto c = dft(x);
  double total = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double e = std::norm(c[k]);
    total += e;
    if (std::abs(wavenumber(k, n)) > static_cast<long>(n) / 4) tail += e;
  }
  return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

}  // namespace nodal_idn::spectral
