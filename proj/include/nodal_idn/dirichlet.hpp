#pragma once

// Nodal Dirichlet problem, the Dirichlet-Neumann map, the theta operator and
// DN data (gamma, u, theta u).
//
// Convention: the charge c at a point a enters as U ~ 2c ln|z - a|, so that
// the dz-coefficient of dU has residue c at a.

#include <algorithm>
#include <array>
#include <functional>
#include <memory>
#include <sstream>
#include <utility>

#include "nodal_idn/core.hpp"
#include "nodal_idn/curve_model.hpp"
#include "nodal_idn/greens.hpp"
#include "nodal_idn/polynomial.hpp"
#include "nodal_idn/spectral.hpp"

namespace nodal_idn {

namespace detail {

inline bool is_centered_circle(const BoundaryCurve& c, double radius) {
  for (const auto& p : c.positions())
    if (std::abs(std::abs(p) - radius) > 1e-12 * radius) return false;
  return true;
}

inline bool all_real(std::span<const cplx> v) {
  for (const auto& x : v)
    if (x.imag() != 0.0) return false;
  return true;
}

// (1/2 pi i) of the contour integral of w over |z - a| = eps, m-node trapezoid.
inline cplx circle_residue(const std::function<cplx(cplx)>& w, cplx a, double eps, std::size_t m) {
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < m; ++k) {
    const cplx e = std::polar(eps, kTwoPi * static_cast<double>(k) / static_cast<double>(m));
    acc += w(a + e) * e;
  }
  return acc / static_cast<double>(m);
}

// Spectral tangential derivative d/ds of boundary samples.
inline ComplexSamples tangential_derivative(const BoundaryCurve& c, std::span<const cplx> u) {
  auto d = spectral::differentiate(u);
  for (std::size_t k = 0; k < d.size(); ++k) d[k] /= std::abs(c.derivatives()[k]);
  return d;
}

}  // namespace detail

/// U = E u + sum 4 pi c G(., a): harmonic away from the charge points with
/// boundary values u and log singularities 2c ln|z - a|.
class HarmonicDistribution {
 public:
  HarmonicDistribution(NodalDomainModel model, AdmissibleFamily family, ComplexSamples u,
                       std::shared_ptr<const NystromSystem> system)
      : model_(std::move(model)), family_(std::move(family)), u_(std::move(u)) {
    points_ = model_.all_points();
    charges_ = family_.flat();
    const auto& curve = model_.boundary;
    closed_form_ = model_.domain.kind == DomainKind::Disk &&
                   detail::is_centered_circle(curve, model_.domain.radius);
    radius_ = model_.domain.radius;
    ComplexSamples data = u_;
    if (!closed_form_) {
      // subtract the free-space logs; their boundary trace is smooth
      for (std::size_t k = 0; k < data.size(); ++k)
        for (std::size_t j = 0; j < points_.size(); ++j)
          data[k] -= 2.0 * charges_[j] * std::log(std::abs(curve.positions()[k] - points_[j]));
    }
    regular_ = std::make_shared<DirichletSolution>(solve_dirichlet_fredholm(data, std::move(system)));
  }

  const NodalDomainModel& model() const noexcept { return model_; }
  const AdmissibleFamily& family() const noexcept { return family_; }
  const ComplexSamples& boundary_values() const noexcept { return u_; }
  const std::vector<cplx>& points() const noexcept { return points_; }
  const std::vector<cplx>& charges() const noexcept { return charges_; }
  const DirichletSolution& regular_part() const noexcept { return *regular_; }

  /// U(z) at an interior point distinct from the charge points.
  cplx operator()(cplx z) const {
    cplx v = (*regular_)(z);
    for (std::size_t j = 0; j < points_.size(); ++j) {
      if (charges_[j] == cplx(0.0)) continue;
      v += closed_form_ ? 2.0 * kTwoPi * charges_[j] * disk_green(z, points_[j], radius_)
                        : 2.0 * charges_[j] * std::log(std::abs(z - points_[j]));
    }
    return v;
  }

  /// dz-coefficient of the (1,0) part of dU at an interior point.
  cplx dz(cplx z) const {
    cplx v = regular_->dz(z);
    for (std::size_t j = 0; j < points_.size(); ++j) v += charge_dz(j, z);
    return v;
  }

  /// dz-coefficient of dU on the boundary samples.
  ComplexSamples boundary_dz() const {
    auto w = regular_->boundary_dz();
    const auto& pos = model_.boundary.positions();
    for (std::size_t k = 0; k < w.size(); ++k)
      for (std::size_t j = 0; j < points_.size(); ++j) w[k] += charge_dz(j, pos[k]);
    return w;
  }

  /// Residue circle radius: 0.01 of the distance to gamma and to the other points.
  double residue_radius(std::size_t j) const {
    double d = model_.boundary.distance_to(points_[j]);
    for (std::size_t i = 0; i < points_.size(); ++i)
      if (i != j) d = std::min(d, std::abs(points_[i] - points_[j]));
    return 0.01 * d;
  }

  /// Contour residues of dU at every charge point (flat order).
  std::vector<cplx> contour_residues(std::size_t nodes = 64) const {
    std::vector<cplx> out;
    for (std::size_t j = 0; j < points_.size(); ++j)
      out.push_back(detail::circle_residue([this](cplx z) { return dz(z); }, points_[j],
                                           residue_radius(j), nodes));
    return out;
  }

 private:
  cplx charge_dz(std::size_t j, cplx z) const {
    const cplx c = charges_[j], a = points_[j];
    if (c == cplx(0.0)) return 0.0;
    if (!closed_form_) return c / (z - a);
    return c * (1.0 / (z - a) + std::conj(a) / (radius_ * radius_ - std::conj(a) * z));
  }

  NodalDomainModel model_;
  AdmissibleFamily family_;
  ComplexSamples u_;
  std::vector<cplx> points_, charges_;
  bool closed_form_ = false;
  double radius_ = 0.0;
  std::shared_ptr<const DirichletSolution> regular_;
};

inline std::shared_ptr<const NystromSystem> make_system(const NodalDomainModel& model) {
  require(model.domain.kind != DomainKind::Annulus, ErrorKind::InvalidInput,
          "annulus domains are not supported by the nodal solver");
  return std::make_shared<const NystromSystem>(model.boundary, "model boundary");
}

inline HarmonicDistribution solve_nodal_dirichlet(const NodalDomainModel& model,
                                                  const AdmissibleFamily& family,
                                                  std::span<const cplx> u,
                                                  std::shared_ptr<const NystromSystem> system = nullptr) {
  model.validate();
  family.validate_against(model);
  require(u.size() == model.boundary.size(), ErrorKind::InvalidInput,
          "solve_nodal_dirichlet: boundary sample count mismatch");
  for (const auto& a : model.all_points())
    require(model.boundary.winding_number(a) == 1, ErrorKind::Domain,
            "solve_nodal_dirichlet: charge point on or outside gamma");
  if (!system) system = make_system(model);
  return HarmonicDistribution(model, family, ComplexSamples(u.begin(), u.end()), std::move(system));
}

/// dN u = i d_tau u - 2i w tau, from boundary values and the dz-coefficient w.
inline ComplexSamples dn_from_theta(const BoundaryCurve& c, std::span<const cplx> u,
                                    std::span<const cplx> w) {
  const auto du = detail::tangential_derivative(c, u);
  ComplexSamples out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = kI * du[k] - 2.0 * kI * w[k] * c.tangent(k);
  return out;
}

/// w = (1/2)(d_tau u + i N u) conj(tau): the L operator in dz-coefficient form.
inline ComplexSamples theta_from_dn(const BoundaryCurve& c, std::span<const cplx> u,
                                    std::span<const cplx> nu) {
  const auto du = detail::tangential_derivative(c, u);
  ComplexSamples out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k)
    out[k] = 0.5 * (du[k] + kI * nu[k]) * std::conj(c.tangent(k));
  return out;
}

/// Outward normal derivative of U on gamma.
inline ComplexSamples apply_dn(const HarmonicDistribution& dist) {
  auto out = dn_from_theta(dist.model().boundary, dist.boundary_values(), dist.boundary_dz());
  if (detail::all_real(dist.boundary_values()) && detail::all_real(dist.charges())) {
    const double scale = 1.0 + max_abs(out);
    for (auto& v : out) {
      require(std::abs(v.imag()) <= 1e-8 * scale, ErrorKind::NumericalFailure,
              "apply_dn: real data produced a complex normal derivative");
      v = v.real();
    }
  }
  return out;
}

/// theta u as dz-coefficient samples: the boundary trace of dU.
inline ComplexSamples compute_theta(const HarmonicDistribution& dist) { return dist.boundary_dz(); }

struct WeakHolomorphyReport {
  std::vector<cplx> residues;
  std::vector<double> growth_factors;  // worst per point over the halving sequence
  bool residues_match = true;
  bool node_sum_zero = true;
  bool bounded_remainder = true;

  bool passed() const { return residues_match && node_sum_zero && bounded_remainder; }
};

/// Checks a dz-coefficient near one node: residues, zero sum and absence of
/// higher-order poles (sup of form - c/(z-a) on halving circles).
inline WeakHolomorphyReport verify_weak_holomorphy(const std::function<cplx(cplx)>& form,
                                                   std::span<const cplx> group,
                                                   std::span<const cplx> charges,
                                                   double eps = 0.0, std::size_t nodes = 64) {
  require(group.size() == charges.size(), ErrorKind::InvalidInput,
          "verify_weak_holomorphy: group and charges differ in length");
  WeakHolomorphyReport rep;
  cplx sum{0.0, 0.0};
  double scale = 1.0;
  for (const auto& c : charges) scale = std::max(scale, std::abs(c));
  for (std::size_t j = 0; j < group.size(); ++j) {
    const cplx a = group[j], c = charges[j];
    double r = eps;
    if (r <= 0.0) {
      double d = 1.0;
      for (std::size_t i = 0; i < group.size(); ++i)
        if (i != j) d = std::min(d, std::abs(group[i] - a));
      r = 0.01 * d;
    }
    const cplx res = detail::circle_residue(form, a, r, nodes);
    rep.residues.push_back(res);
    sum += res;
    if (std::abs(res - c) > 1e-6 * scale) rep.residues_match = false;
    double prev = -1.0, worst = 0.0;
    for (int level = 0; level < 4; ++level) {
      const double rr = r / static_cast<double>(1 << level);
      double sup = 0.0;
      for (std::size_t k = 0; k < nodes; ++k) {
        const cplx e = std::polar(rr, kTwoPi * static_cast<double>(k) / static_cast<double>(nodes));
        sup = std::max(sup, std::abs(form(a + e) - c / e));
      }
      if (prev > 1e-10 * scale) worst = std::max(worst, sup / prev);
      prev = sup;
    }
    rep.growth_factors.push_back(worst);
    if (worst >= 1.5) rep.bounded_remainder = false;
  }
  if (std::abs(sum) > 1e-6 * scale) rep.node_sum_zero = false;
  return rep;
}

struct HypothesisAReport {
  bool injective = false;
  bool immersive = false;
  double min_image_distance = 0.0;
  double min_speed = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> offending_pairs;  // at most 16
  std::vector<std::size_t> offending_samples;                        // at most 16

  bool passed() const { return injective && immersive; }

  std::string summary() const {
    std::ostringstream os;
    os << "hypothesis A: injective=" << (injective ? "yes" : "no")
       << " (min image distance " << min_image_distance << ")"
       << ", immersive=" << (immersive ? "yes" : "no") << " (min |f'| " << min_speed << ")";
    for (const auto& [i, j] : offending_pairs) os << "\n  f(t_" << i << ") ~ f(t_" << j << ")";
    for (auto k : offending_samples) os << "\n  f'(t_" << k << ") ~ 0";
    return os.str();
  }
};

namespace detail {

// Distance between the segments [p0,p1] and [q0,q1] of C^2 viewed as R^4.
inline double segment_distance(cplx p0a, cplx p0b, cplx p1a, cplx p1b, cplx q0a, cplx q0b,
                               cplx q1a, cplx q1b) {
  auto dot = [](cplx xa, cplx xb, cplx ya, cplx yb) {
    return std::real(xa * std::conj(ya) + xb * std::conj(yb));
  };
  const cplx da = p1a - p0a, db = p1b - p0b;  // d1
  const cplx ea = q1a - q0a, eb = q1b - q0b;  // d2
  const cplx ra = p0a - q0a, rb = p0b - q0b;
  const double a = dot(da, db, da, db), e = dot(ea, eb, ea, eb), f = dot(ea, eb, ra, rb);
  const double c = dot(da, db, ra, rb), b = dot(da, db, ea, eb);
  const double denom = a * e - b * b;
  double s = denom > 1e-300 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
  double t = e > 1e-300 ? (b * s + f) / e : 0.0;
  if (t < 0.0) {
    t = 0.0;
    s = a > 1e-300 ? std::clamp(-c / a, 0.0, 1.0) : 0.0;
  } else if (t > 1.0) {
    t = 1.0;
    s = a > 1e-300 ? std::clamp((b - c) / a, 0.0, 1.0) : 0.0;
  }
  const cplx xa = p0a + s * da - q0a - t * ea, xb = p0b + s * db - q0b - t * eb;
  return std::sqrt(std::norm(xa) + std::norm(xb));
}

}  // namespace detail

/// Sample-resolution embedding check of t -> (f1, f2)(t): non-adjacent
/// chords of the sampled image polygon in C^2 must stay apart, and the
/// spectral derivative must not vanish.
inline HypothesisAReport check_hypothesis_a(std::span<const cplx> f1, std::span<const cplx> f2) {
  const std::size_t n = f1.size();
  HypothesisAReport rep;
  rep.min_image_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t i1 = (i + 1) % n;
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const std::size_t j1 = (j + 1) % n;
      if (j1 == i) continue;
      const double d = detail::segment_distance(f1[i], f2[i], f1[i1], f2[i1], f1[j], f2[j],
                                                f1[j1], f2[j1]);
      rep.min_image_distance = std::min(rep.min_image_distance, d);
      if (d <= 1e-6 && rep.offending_pairs.size() < 16) rep.offending_pairs.emplace_back(i, j);
    }
  }
  const auto d1 = spectral::differentiate(f1);
  const auto d2 = spectral::differentiate(f2);
  rep.min_speed = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sqrt(std::norm(d1[k]) + std::norm(d2[k]));
    rep.min_speed = std::min(rep.min_speed, s);
    if (s <= 1e-8 && rep.offending_samples.size() < 16) rep.offending_samples.push_back(k);
  }
  rep.injective = rep.min_image_distance > 1e-6;
  rep.immersive = rep.min_speed > 1e-8;
  return rep;
}

/// The triple (gamma, u, theta u) with the derived boundary map f.
struct DNDatum {
  BoundaryCurve curve;
  std::array<ComplexSamples, 3> u;
  std::array<ComplexSamples, 3> theta;
  ComplexSamples f1, f2;
  HypothesisAReport hypothesis_a;

  std::size_t size() const { return curve.size(); }

  /// Same datum on the oppositely oriented curve.
  DNDatum reversed() const {
    DNDatum r;
    r.curve = curve.reversed();
    const std::size_t n = size();
    auto flip = [n](const ComplexSamples& s) {
      ComplexSamples o(n);
      for (std::size_t k = 0; k < n; ++k) o[k] = s[(n - k) % n];
      return o;
    };
    for (int l = 0; l < 3; ++l) {
      r.u[l] = flip(u[l]);
      r.theta[l] = flip(theta[l]);
    }
    r.f1 = flip(f1);
    r.f2 = flip(f2);
    r.hypothesis_a = hypothesis_a;
    return r;
  }
};

/// Derives f from theta and runs the hypothesis-A check. With enforce set,
/// a failed check throws ErrorKind::HypothesisA carrying the diagnostics.
inline DNDatum assemble_datum(BoundaryCurve curve, std::array<ComplexSamples, 3> u,
                              std::array<ComplexSamples, 3> theta, bool enforce = true) {
  const std::size_t n = curve.size();
  for (int l = 0; l < 3; ++l)
    require(u[l].size() == n && theta[l].size() == n, ErrorKind::InvalidInput,
            "DNDatum: sample count mismatch");
  DNDatum d;
  d.curve = std::move(curve);
  d.u = std::move(u);
  d.theta = std::move(theta);
  const double scale = max_abs(d.theta[0]);
  std::vector<std::size_t> zeros;
  for (std::size_t k = 0; k < n; ++k)
    if (std::abs(d.theta[0][k]) <= 1e-12 * scale || scale == 0.0) zeros.push_back(k);
  if (!zeros.empty()) {
    std::ostringstream os;
    os << "theta u_0 vanishes at samples";
    for (std::size_t i = 0; i < zeros.size() && i < 16; ++i) os << ' ' << zeros[i];
    fail(ErrorKind::HypothesisA, os.str());
  }
  d.f1.resize(n);
  d.f2.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    d.f1[k] = d.theta[1][k] / d.theta[0][k];
    d.f2[k] = d.theta[2][k] / d.theta[0][k];
  }
  d.hypothesis_a = check_hypothesis_a(d.f1, d.f2);
  if (enforce && !d.hypothesis_a.passed()) fail(ErrorKind::HypothesisA, d.hypothesis_a.summary());
  return d;
}

/// Physical path: three nodal Dirichlet solves sharing one Nystrom system.
inline DNDatum build_dn_datum(const NodalDomainModel& model,
                              const std::array<AdmissibleFamily, 3>& families,
                              const std::array<ComplexSamples, 3>& u, bool enforce = true) {
  const auto system = make_system(model);
  std::array<ComplexSamples, 3> theta;
  for (int l = 0; l < 3; ++l)
    theta[l] = compute_theta(solve_nodal_dirichlet(model, families[l], u[l], system));
  return assemble_datum(model.boundary, u, std::move(theta), enforce);
}

/// Synthetic path: dz-coefficients prescribed directly as meromorphic
/// functions with simple poles at the model's points. The boundary
/// potentials are reconstructed as sum 2c ln|gamma - a| + H with H' the
/// regular part of the form.
inline DNDatum build_dn_datum(const NodalDomainModel& model,
                              const std::array<AdmissibleFamily, 3>& families,
                              const std::array<std::function<cplx(cplx)>, 3>& forms,
                              bool enforce = true) {
  model.validate();
  const auto& curve = model.boundary;
  const std::size_t n = curve.size();
  const auto pts = model.all_points();
  std::array<ComplexSamples, 3> u, theta;
  for (int l = 0; l < 3; ++l) {
    families[l].validate_against(model);
    const auto c = families[l].flat();
    // residue contract on every node group
    std::size_t offset = 0;
    for (std::size_t g = 0; g < model.node_groups.size(); ++g) {
      const auto& grp = model.node_groups[g];
      double eps = 1.0;
      for (const auto& a : grp) {
        eps = std::min(eps, curve.distance_to(a));
        for (const auto& b : pts)
          if (b != a) eps = std::min(eps, std::abs(a - b));
      }
      const auto rep = verify_weak_holomorphy(
          forms[l], grp, std::span<const cplx>(c).subspan(offset, grp.size()), 0.01 * eps);
      if (!rep.passed()) {
        std::ostringstream os;
        os << "prescribed form " << l << " violates the residue contract at node group " << g;
        fail(ErrorKind::InvalidInput, os.str());
      }
      offset += grp.size();
    }
    theta[l].resize(n);
    ComplexSamples regular(n);
    for (std::size_t k = 0; k < n; ++k) {
      const cplx z = curve.positions()[k];
      theta[l][k] = forms[l](z);
      cplx polar{0.0, 0.0};
      for (std::size_t j = 0; j < pts.size(); ++j) polar += c[j] / (z - pts[j]);
      regular[k] = (theta[l][k] - polar) * curve.derivatives()[k];
    }
    const cplx mean = spectral::mean(regular);
    require(std::abs(mean) <= 1e-8 * (1.0 + max_abs(regular)), ErrorKind::InvalidInput,
            "prescribed form " + std::to_string(l) + " has poles not listed in the model");
    u[l] = spectral::antiderivative(regular);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < pts.size(); ++j)
        u[l][k] += 2.0 * c[j] * std::log(std::abs(curve.positions()[k] - pts[j]));
  }
  return assemble_datum(curve, std::move(u), std::move(theta), enforce);
}

}  // namespace nodal_idn
