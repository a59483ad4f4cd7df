#pragma once

// Dense complex polynomials (ascending coefficients) and rational functions.

#include <Eigen/Dense>

#include <vector>

#include "nodal_idn/core.hpp"

namespace nodal_idn {

using Poly = std::vector<cplx>;

inline cplx polyval(const Poly& p, cplx z) {
  cplx acc{0.0, 0.0};
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
  return acc;
}

inline Poly polyder(const Poly& p) {
  if (p.size() <= 1) return {cplx{0.0, 0.0}};
  Poly d(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k) d[k - 1] = static_cast<double>(k) * p[k];
  return d;
}

struct Rational {
  Poly num{1.0};
  Poly den{1.0};

  cplx operator()(cplx z) const { return polyval(num, z) / polyval(den, z); }
};

/// Roots of the monic polynomial z^p - e1 z^{p-1} + e2 z^{p-2} - ... given
/// its elementary symmetric functions, by companion-matrix eigenvalues
/// followed by Newton polishing.
inline std::vector<cplx> roots_from_elementary(const std::vector<cplx>& e) {
  const auto p = static_cast<Eigen::Index>(e.size());
  if (p == 0) return {};
  // z^p + a_{p-1} z^{p-1} + ... + a_0 with a_{p-k} = (-1)^k e_k
  Poly a(static_cast<std::size_t>(p) + 1);
  a[static_cast<std::size_t>(p)] = 1.0;
  for (Eigen::Index k = 1; k <= p; ++k)
    a[static_cast<std::size_t>(p - k)] = (k % 2 ? -1.0 : 1.0) * e[static_cast<std::size_t>(k - 1)];
  if (p == 1) return {-a[0]};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(p, p);
  for (Eigen::Index i = 1; i < p; ++i) comp(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < p; ++i) comp(i, p - 1) = -a[static_cast<std::size_t>(i)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  const Poly da = polyder(a);
  std::vector<cplx> roots;
  for (Eigen::Index i = 0; i < p; ++i) {
    cplx z = es.eigenvalues()[i];
    for (int it = 0; it < 2; ++it) {
      const cplx d = polyval(da, z);
      if (std::abs(d) == 0.0) break;
      z -= polyval(a, z) / d;
    }
    roots.push_back(z);
  }
  return roots;
}

/// Newton identities: power sums S_1..S_p -> elementary symmetric e_1..e_p.
inline std::vector<cplx> elementary_from_power_sums(const std::vector<cplx>& s) {
  const std::size_t p = s.size();
  std::vector<cplx> e(p + 1);
  e[0] = 1.0;
  for (std::size_t k = 1; k <= p; ++k) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 1; i <= k; ++i) acc += (i % 2 ? 1.0 : -1.0) * e[k - i] * s[i - 1];
    e[k] = acc / static_cast<double>(k);
  }
  return {e.begin() + 1, e.end()};
}

}  // namespace nodal_idn
