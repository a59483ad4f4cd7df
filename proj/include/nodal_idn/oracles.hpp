#pragma once

// Brute-force reference computations used by the test suites. Nothing here
// depends on the engine headers (greens, dirichlet, moments, nodes,
// characterize); keep it that way.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "nodal_idn/core.hpp"

namespace nodal_idn::oracles {

using Poly = std::vector<cplx>;  // ascending coefficients

inline cplx horner(const Poly& p, cplx z) {
  cplx acc{0.0, 0.0};
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
  return acc;
}

inline Poly derivative(const Poly& p) {
  Poly d;
  for (std::size_t k = 1; k < p.size(); ++k) d.push_back(static_cast<double>(k) * p[k]);
  if (d.empty()) d.push_back(0.0);
  return d;
}

inline Poly trimmed(Poly p) {
  while (p.size() > 1 && std::abs(p.back()) == 0.0) p.pop_back();
  return p;
}

/// Rational function num/den with explicit coefficient lists.
struct RationalMapOracle {
  Poly num{1.0};
  Poly den{1.0};

  cplx operator()(cplx z) const { return horner(num, z) / horner(den, z); }
};

/// All roots of p via companion-matrix eigenvalues, each followed by one
/// Newton polish step. Degree at most 16.
inline std::vector<cplx> polynomial_roots(const Poly& p_in) {
  const Poly p = trimmed(p_in);
  const std::size_t deg = p.size() - 1;
  require(deg <= 16, ErrorKind::InvalidInput, "polynomial_roots: degree above 16");
  if (deg == 0) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(deg),
                                                 static_cast<Eigen::Index>(deg));
  const cplx lead = p.back();
  for (std::size_t i = 1; i < deg; ++i)
    comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < deg; ++i)
    comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(deg - 1)) = -p[i] / lead;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  const Poly dp = derivative(p);
  std::vector<cplx> roots;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    cplx z = es.eigenvalues()[i];
    const cplx d = horner(dp, z);
    if (std::abs(d) > 0.0) z -= horner(p, z) / d;
    roots.push_back(z);
  }
  return roots;
}

/// Roots of f2(z) = xi with |z - center| < radius.
inline std::vector<cplx> fiber_oracle(const Poly& f2, cplx xi, double radius,
                                      cplx center = 0.0) {
  Poly q = f2;
  q[0] -= xi;
  std::vector<cplx> inside;
  for (const auto& z : polynomial_roots(q)) {
    const double r = std::abs(z - center);
    require(std::abs(r - radius) > 1e-8, ErrorKind::Domain, "fiber touches gamma");
    if (r < radius) inside.push_back(z);
  }
  return inside;
}

/// Roots of num(z) - xi den(z) inside the disk, for a rational f2 = num/den.
inline std::vector<cplx> rational_fiber_oracle(const RationalMapOracle& f2, cplx xi,
                                               double radius) {
  Poly q(std::max(f2.num.size(), f2.den.size()), cplx{0.0, 0.0});
  for (std::size_t k = 0; k < f2.num.size(); ++k) q[k] += f2.num[k];
  for (std::size_t k = 0; k < f2.den.size(); ++k) q[k] -= xi * f2.den[k];
  std::vector<cplx> inside;
  for (const auto& z : polynomial_roots(q)) {
    require(std::abs(std::abs(z) - radius) > 1e-8, ErrorKind::Domain, "fiber touches gamma");
    if (std::abs(z) < radius) inside.push_back(z);
  }
  return inside;
}

/// Max 5-point Laplacian residual of a real field over grid nodes.
inline double fd_laplacian_check(const std::function<double(cplx)>& field,
                                 const std::vector<cplx>& nodes, double h) {
  double worst = 0.0;
  for (const auto& z : nodes) {
    const double lap = (field(z + h) + field(z - h) + field(z + cplx(0, h)) +
                        field(z - cplx(0, h)) - 4.0 * field(z)) /
                       (h * h);
    worst = std::max(worst, std::abs(lap));
  }
  return worst;
}

/// Square grid of spacing h covering [lo, hi] in both axes, filtered by keep.
inline std::vector<cplx> grid_nodes(cplx lo, cplx hi, double h,
                                    const std::function<bool(cplx)>& keep) {
  std::vector<cplx> out;
  for (double x = lo.real(); x <= hi.real() + 1e-12; x += h)
    for (double y = lo.imag(); y <= hi.imag() + 1e-12; y += h)
      if (keep(cplx(x, y))) out.emplace_back(x, y);
  return out;
}

/// Winding number of the closed sampled curve f around xi.
inline int argument_principle_count(const std::vector<cplx>& f, cplx xi) {
  double total = 0.0;
  const std::size_t n = f.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double inc = std::arg((f[(k + 1) % n] - xi) / (f[k] - xi));
    require(std::abs(inc) < kPi * 0.999, ErrorKind::NumericalFailure, "refine sampling");
    total += inc;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

/// Shortley-Weller finite-difference Dirichlet solve on the ellipse
/// x^2/a^2 + y^2/b^2 < 1. Returns an interpolating evaluator on grid nodes.
class EllipseLaplaceFD {
 public:
  EllipseLaplaceFD(double a, double b, double h, const std::function<double(cplx)>& boundary)
      : a_(a), b_(b), h_(h) {
    nx_ = static_cast<int>(std::floor(a / h));
    ny_ = static_cast<int>(std::floor(b / h));
    const int wx = 2 * nx_ + 1, wy = 2 * ny_ + 1;
    index_.assign(static_cast<std::size_t>(wx * wy), -1);
    int count = 0;
    for (int i = -nx_; i <= nx_; ++i)
      for (int j = -ny_; j <= ny_; ++j)
        if (inside(i * h, j * h)) index_[slot(i, j)] = count++;
    Eigen::SparseMatrix<double> mat(count, count);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(count);
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = -nx_; i <= nx_; ++i) {
      for (int j = -ny_; j <= ny_; ++j) {
        const int row = index_[slot(i, j)];
        if (row < 0) continue;
        const double x = i * h, y = j * h;
        // arms: east, west, north, south
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        double arm[4];
        double val[4];
        int col[4];
        for (int d = 0; d < 4; ++d) {
          const int ii = i + di[d], jj = j + dj[d];
          const bool in_grid = ii >= -nx_ && ii <= nx_ && jj >= -ny_ && jj <= ny_;
          if (in_grid && index_[slot(ii, jj)] >= 0) {
            arm[d] = h;
            col[d] = index_[slot(ii, jj)];
            val[d] = 0.0;
          } else {
            // intersection of the grid line with the ellipse
            double s;
            if (d < 2) {
              const double xb = a * std::sqrt(std::max(0.0, 1.0 - y * y / (b * b)));
              s = di[d] > 0 ? xb - x : x + xb;
              val[d] = boundary(cplx(x + di[d] * s, y));
            } else {
              const double yb = b * std::sqrt(std::max(0.0, 1.0 - x * x / (a * a)));
              s = dj[d] > 0 ? yb - y : y + yb;
              val[d] = boundary(cplx(x, y + dj[d] * s));
            }
            arm[d] = std::max(s, 1e-14);
            col[d] = -1;
          }
        }
        double diag = 0.0;
        for (int axis = 0; axis < 2; ++axis) {
          const double hp = arm[2 * axis], hm = arm[2 * axis + 1];
          const double cp = 2.0 / (hp * (hp + hm));
          const double cm = 2.0 / (hm * (hp + hm));
          diag -= cp + cm;
          for (int s = 0; s < 2; ++s) {
            const int d = 2 * axis + s;
            const double c = s == 0 ? cp : cm;
            if (col[d] >= 0) {
              trip.emplace_back(row, col[d], c);
            } else {
              rhs[row] -= c * val[d];
            }
          }
        }
        trip.emplace_back(row, row, diag);
      }
    }
    mat.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(mat);
    require(lu.info() == Eigen::Success, ErrorKind::NumericalFailure, "EllipseLaplaceFD: LU failed");
    solution_ = lu.solve(rhs);
  }

  /// Value at grid node (i, j); the node must be interior.
  double at(int i, int j) const {
    const int idx = index_[slot(i, j)];
    require(idx >= 0, ErrorKind::Domain, "EllipseLaplaceFD: node outside the domain");
    return solution_[idx];
  }
  double spacing() const { return h_; }
  bool interior(int i, int j) const { return inside(i * h_, j * h_); }

 private:
  bool inside(double x, double y) const { return x * x / (a_ * a_) + y * y / (b_ * b_) < 1.0; }
  std::size_t slot(int i, int j) const {
    return static_cast<std::size_t>((i + nx_) * (2 * ny_ + 1) + (j + ny_));
  }

  double a_, b_, h_;
  int nx_ = 0, ny_ = 0;
  std::vector<int> index_;
  Eigen::VectorXd solution_;
};

}  // namespace nodal_idn::oracles
