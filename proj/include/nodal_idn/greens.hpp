#pragma once

// Green functions and double-layer machinery on a sampled boundary curve.
//
// Conventions. Green functions carry the singularity (1/2pi) ln|z - zeta|.
// The layer operator T maps a boundary density v to
//   (T v)(z) = sum_j v_j * d/dn_zeta g(gamma_j, z) |gamma'_j| (2pi/N),
// i.e. the real part of 2i \int v dbar g for real v, extended complex-linearly.
// It jumps by exactly v across gamma: T+ v - T- v = v.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>

#include "nodal_idn/core.hpp"
#include "nodal_idn/curve_model.hpp"
#include "nodal_idn/spectral.hpp"

namespace nodal_idn {

/// Closed-form principal Green function of the disk |z| < R.
inline double disk_green(cplx z, cplx zeta, double radius) {
  require(std::abs(z) < radius && std::abs(zeta) <= radius * (1.0 + 1e-12), ErrorKind::Domain,
          "disk_green: point outside the disk");
  require(z != zeta, ErrorKind::Domain, "disk_green: diagonal singularity");
  const double r2 = radius * radius;
  return std::log(std::abs(z - zeta) * radius / std::abs(r2 - std::conj(zeta) * z)) / kTwoPi;
}

/// d/dz of disk_green(z, zeta, R) in its first argument.
inline cplx disk_green_dz(cplx z, cplx zeta, double radius) {
  const double r2 = radius * radius;
  return (1.0 / (z - zeta) + std::conj(zeta) / (r2 - std::conj(zeta) * z)) / (2.0 * kTwoPi);
}

enum class KernelKind { MundaneLog, DiskPrincipal };

/// Real Green kernel g(z, zeta) with its holomorphic derivative in zeta.
struct GreenKernel {
  KernelKind kind = KernelKind::MundaneLog;
  double radius = 0.0;  // DiskPrincipal only

  static GreenKernel mundane_log() { return {KernelKind::MundaneLog, 0.0}; }
  static GreenKernel disk_principal(double r) { return {KernelKind::DiskPrincipal, r}; }

  double operator()(cplx z, cplx zeta) const {
    require(z != zeta, ErrorKind::Domain, "GreenKernel: diagonal singularity");
    if (kind == KernelKind::MundaneLog) return std::log(std::abs(z - zeta)) / kTwoPi;
    return disk_green(z, zeta, radius);
  }

  /// d g(zeta, z) / d zeta (coefficient of d zeta).
  cplx d_zeta(cplx zeta, cplx z) const {
    if (kind == KernelKind::MundaneLog) return 1.0 / (2.0 * kTwoPi * (zeta - z));
    return disk_green_dz(zeta, z, radius);
  }

  /// Normal derivative in zeta along the unit normal n.
  double d_normal(cplx zeta, cplx z, cplx n) const { return std::real(2.0 * d_zeta(zeta, z) * n); }
};

namespace detail {

inline double near_boundary_limit(const BoundaryCurve& c) {
  return 10.0 * c.step() * c.max_speed();
}

// Smallest power-of-two upsampling factor making plain quadrature trustworthy at z.
inline std::size_t refinement_for(const BoundaryCurve& c, cplx z, std::size_t max_factor = 64) {
  const double dist = c.distance_to(z);
  std::size_t f = 1;
  while (dist <= near_boundary_limit(c) / static_cast<double>(f)) {
    f *= 2;
    if (f > max_factor)
      fail(ErrorKind::Domain, "near-boundary evaluation: use trace operator");
  }
  return f;
}

// Interior boundary limit of the Cauchy integral (1/2pi i) \int w dzeta/(zeta - z),
// computed by singularity subtraction; the diagonal term is w'(t_k).
inline ComplexSamples cauchy_interior_trace(const BoundaryCurve& c, std::span<const cplx> w) {
  const std::size_t n = c.size();
  const auto& g = c.positions();
  const auto& dg = c.derivatives();
  const auto dw = spectral::differentiate(w);
  ComplexSamples out(n);
  const cplx scale = 1.0 / (kI * static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k) {
        acc += dw[k];
      } else {
        acc += (w[j] - w[k]) * dg[j] / (g[j] - g[k]);
      }
    }
    out[k] = w[k] + scale * acc;
  }
  return out;
}

}  // namespace detail

/// Plain trapezoid layer potential T v at z (off the curve).
inline cplx layer_potential_T(std::span<const cplx> v, cplx z, const GreenKernel& kernel,
                              const BoundaryCurve& curve) {
  require(v.size() == curve.size(), ErrorKind::InvalidInput,
          "layer_potential_T: density size mismatch");
  if (curve.distance_to(z) <= detail::near_boundary_limit(curve))
    fail(ErrorKind::Domain, "near-boundary evaluation: use trace operator");
  const std::size_t n = curve.size();
  cplx acc{0.0, 0.0};
  for (std::size_t j = 0; j < n; ++j) {
    const double speed = std::abs(curve.derivatives()[j]);
    acc += v[j] * kernel.d_normal(curve.positions()[j], z, curve.normal(j)) * speed;
  }
  return acc * curve.step();
}

/// Nystrom discretization of the boundary trace of the log-kernel double layer.
class NystromSystem {
 public:
  explicit NystromSystem(BoundaryCurve curve, std::string name = "curve")
      : curve_(std::move(curve)), name_(std::move(name)) {
    require(curve_.orientation() == 1, ErrorKind::InvalidInput,
            "NystromSystem: curve must be counterclockwise");
    const std::size_t n = curve_.size();
    const auto& g = curve_.positions();
    const auto& dg = curve_.derivatives();
    const auto kappa = curve_.curvature();
    kernel_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    diagonal_.resize(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        double val;
        if (j == k) {
          val = kappa[k] * std::abs(dg[k]) * 0.5 * inv_n;
          diagonal_[k] = val;
        } else {
          val = std::imag(dg[j] / (g[j] - g[k])) * inv_n;
        }
        kernel_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = val;
      }
    }
    Eigen::MatrixXd a = kernel_;
    a.diagonal().array() += 0.5;
    lu_ = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(a);
    rcond_ = lu_->rcond();
    if (!(rcond_ > 0.0) || !std::isfinite(rcond_))
      fail(ErrorKind::NumericalFailure, "NystromSystem: singular system for " + name_);
    if (1.0 / rcond_ > 1e10)
      log(LogLevel::Error, "NystromSystem: condition estimate above 1e10 for " + name_);
  }

  const BoundaryCurve& curve() const noexcept { return curve_; }
  const Eigen::MatrixXd& matrix() const noexcept { return kernel_; }
  const std::vector<double>& diagonal() const noexcept { return diagonal_; }
  double condition_estimate() const noexcept { return 1.0 / rcond_; }
  const std::string& name() const noexcept { return name_; }

  ComplexSamples apply_kernel(std::span<const cplx> v) const {
    check_size(v);
    const auto n = static_cast<Eigen::Index>(v.size());
    Eigen::VectorXd re(n), im(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      re[k] = v[static_cast<std::size_t>(k)].real();
      im[k] = v[static_cast<std::size_t>(k)].imag();
    }
    const Eigen::VectorXd kr = kernel_ * re;
    const Eigen::VectorXd ki = kernel_ * im;
    ComplexSamples out(v.size());
    for (Eigen::Index k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = {kr[k], ki[k]};
    return out;
  }

  /// Solves (1/2 + K) v = u.
  ComplexSamples solve(std::span<const cplx> u) const {
    check_size(u);
    const auto n = static_cast<Eigen::Index>(u.size());
    Eigen::VectorXd re(n), im(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      re[k] = u[static_cast<std::size_t>(k)].real();
      im[k] = u[static_cast<std::size_t>(k)].imag();
    }
    const Eigen::VectorXd sr = lu_->solve(re);
    const Eigen::VectorXd si = lu_->solve(im);
    ComplexSamples out(u.size());
    for (Eigen::Index k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = {sr[k], si[k]};
    return out;
  }

 private:
  void check_size(std::span<const cplx> v) const {
    require(v.size() == curve_.size(), ErrorKind::InvalidInput,
            "NystromSystem: sample count does not match the system");
  }

  BoundaryCurve curve_;
  std::string name_;
  Eigen::MatrixXd kernel_;
  std::vector<double> diagonal_;
  std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
  double rcond_ = 0.0;
};

/// Exterior boundary trace (T- v)|gamma = -v/2 + K v.
inline ComplexSamples trace_T_minus(std::span<const cplx> v, const NystromSystem& system) {
  auto out = system.apply_kernel(v);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= 0.5 * v[k];
  return out;
}

/// Interior boundary trace (T+ v)|gamma, computed independently of the
/// Nystrom matrix: Re of the interior Cauchy trace, applied to Re v and Im v.
inline ComplexSamples trace_T_plus(std::span<const cplx> v, const BoundaryCurve& curve) {
  require(v.size() == curve.size(), ErrorKind::InvalidInput, "trace_T_plus: size mismatch");
  ComplexSamples re(v.size()), im(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    re[k] = v[k].real();
    im[k] = v[k].imag();
  }
  const auto cr = detail::cauchy_interior_trace(curve, re);
  const auto ci = detail::cauchy_interior_trace(curve, im);
  ComplexSamples out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = {cr[k].real(), ci[k].real()};
  return out;
}

/// Harmonic extension represented by a double-layer density.
class DirichletSolution {
 public:
  DirichletSolution(std::shared_ptr<const NystromSystem> system, ComplexSamples density,
                    ComplexSamples boundary_values)
      : system_(std::move(system)), density_(std::move(density)),
        boundary_values_(std::move(boundary_values)) {}

  const ComplexSamples& density() const noexcept { return density_; }
  const ComplexSamples& boundary_values() const noexcept { return boundary_values_; }
  const NystromSystem& system() const noexcept { return *system_; }

  /// Eu(z) for interior z. Near the curve the density is spectrally
  /// upsampled so that the trapezoid rule stays accurate.
  cplx operator()(cplx z) const {
    const auto& curve = system_->curve();
    const std::size_t f = detail::refinement_for(curve, z);
    if (f == 1) return layer_potential_T(density_, z, GreenKernel::mundane_log(), curve);
    const auto fine = curve.refined(f);
    const auto v = spectral::interpolate(density_, curve.size() * f);
    return layer_potential_T(v, z, GreenKernel::mundane_log(), fine);
  }

  /// d/dz Eu at interior z: (1/2) d/dz of the Cauchy integral of the density.
  cplx dz(cplx z) const {
    const auto& curve0 = system_->curve();
    const std::size_t f = detail::refinement_for(curve0, z);
    const BoundaryCurve fine = f == 1 ? curve0 : curve0.refined(f);
    const ComplexSamples v = f == 1 ? density_ : spectral::interpolate(density_, curve0.size() * f);
    const auto& g = fine.positions();
    const auto& dg = fine.derivatives();
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < g.size(); ++j) {
      const cplx d = g[j] - z;
      acc += v[j] * dg[j] / (d * d);
    }
    return 0.5 * acc / (kI * static_cast<double>(g.size()));
  }

  /// Boundary trace of d/dz Eu (dz-coefficient samples on gamma).
  ComplexSamples boundary_dz() const {
    const auto& curve = system_->curve();
    const auto c = detail::cauchy_interior_trace(curve, density_);
    const auto dc = spectral::differentiate(c);
    ComplexSamples out(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) out[k] = 0.5 * dc[k] / curve.derivatives()[k];
    return out;
  }

 private:
  std::shared_ptr<const NystromSystem> system_;
  ComplexSamples density_;
  ComplexSamples boundary_values_;
};

/// Solves u = v + (T- v)|gamma and returns the interior evaluator z -> T+ v(z).
inline DirichletSolution solve_dirichlet_fredholm(std::span<const cplx> u,
                                                  std::shared_ptr<const NystromSystem> system) {
  require(system != nullptr, ErrorKind::InvalidInput, "solve_dirichlet_fredholm: null system");
  if (system->condition_estimate() > 1e10)
    fail(ErrorKind::NumericalFailure,
         "solve_dirichlet_fredholm: singular system for " + system->name());
  auto v = system->solve(u);
  return DirichletSolution(std::move(system), std::move(v), ComplexSamples(u.begin(), u.end()));
}

/// Principal Green function G(z, zeta) = g(z, zeta) - E(g_z|gamma)(zeta) of
/// the domain enclosed by the system's curve. One Fredholm solve per source
/// point z; densities are cached.
class PrincipalGreen {
 public:
  PrincipalGreen(GreenKernel mundane, std::shared_ptr<const NystromSystem> system)
      : mundane_(mundane), system_(std::move(system)) {
    if (mundane_.kind == KernelKind::DiskPrincipal) {
      for (const auto& p : system_->curve().positions())
        require(std::abs(p) < mundane_.radius, ErrorKind::InvalidInput,
                "build_principal_green: enclosing disk does not contain the curve");
    }
  }

  double operator()(cplx z, cplx zeta) const {
    require(z != zeta, ErrorKind::Domain, "PrincipalGreen: diagonal singularity");
    const auto& sol = solution_for(z);
    return mundane_(z, zeta) - sol(zeta).real();
  }

  /// d/dzeta G(z, zeta).
  cplx d_zeta(cplx z, cplx zeta) const {
    const auto& sol = solution_for(z);
    return mundane_.d_zeta(zeta, z) - sol.dz(zeta);
  }

  /// G(z, .) on the boundary samples: zero up to the solver residual.
  ComplexSamples boundary_trace(cplx z) const {
    const auto& sol = solution_for(z);
    const auto tp = trace_T_plus(sol.density(), system_->curve());
    ComplexSamples out(tp.size());
    const auto& pos = system_->curve().positions();
    for (std::size_t k = 0; k < tp.size(); ++k) out[k] = mundane_(z, pos[k]) - tp[k];
    return out;
  }

  const NystromSystem& system() const noexcept { return *system_; }

 private:
  const DirichletSolution& solution_for(cplx z) const {
    const std::pair<double, double> key{z.real(), z.imag()};
    std::lock_guard<std::mutex> lock(*mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    require(system_->curve().winding_number(z) == 1, ErrorKind::Domain,
            "PrincipalGreen: source point outside the domain");
    ComplexSamples data(system_->curve().size());
    const auto& pos = system_->curve().positions();
    for (std::size_t k = 0; k < data.size(); ++k) data[k] = mundane_(z, pos[k]);
    auto sol = solve_dirichlet_fredholm(data, system_);
    return cache_.emplace(key, std::move(sol)).first->second;
  }

  GreenKernel mundane_;
  std::shared_ptr<const NystromSystem> system_;
  mutable std::map<std::pair<double, double>, DirichletSolution> cache_;
  std::shared_ptr<std::mutex> mutex_ = std::make_shared<std::mutex>();
};

inline PrincipalGreen build_principal_green(const GreenKernel& mundane,
                                            std::shared_ptr<const NystromSystem> system) {
  return PrincipalGreen(mundane, std::move(system));
}

}  // namespace nodal_idn
