#pragma once

// Is a boundary triple a DN datum? The G function and the shock equation for
// its local fiber functions, the Green identity for charges, and orientation.

#include <array>
#include <random>
#include <sstream>
#include <vector>

#include "nodal_idn/core.hpp"
#include "nodal_idn/curve_model.hpp"
#include "nodal_idn/dirichlet.hpp"
#include "nodal_idn/greens.hpp"
#include "nodal_idn/moments.hpp"
#include "nodal_idn/spectral.hpp"

namespace nodal_idn {

/// (1/2 pi i) oint f1 dF / F with F = xi0 + xi1 f1 + f2, trapezoid rule with
/// spectral derivatives.
inline cplx compute_G(const DNDatum& datum, cplx xi0, cplx xi1) {
  const std::size_t n = datum.size();
  ComplexSamples F(n);
  for (std::size_t k = 0; k < n; ++k) {
    F[k] = xi0 + xi1 * datum.f1[k] + datum.f2[k];
    if (std::abs(F[k]) <= 1e-6) {
      std::ostringstream os;
      os << "probe line meets f(gamma) at (xi0, xi1) = (" << xi0 << ", " << xi1 << ")";
      fail(ErrorKind::Domain, os.str());
    }
  }
  const auto dF = spectral::differentiate(F);
  cplx acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += datum.f1[k] * dF[k] / F[k];
  return acc / (kI * static_cast<double>(n));
}

/// Window over the (xi0, xi1) plane: square grids of n0 x n0 points around
/// xi0_center and n1 x n1 points around xi1_center.
struct ShockWindow {
  cplx xi0_center;
  cplx xi1_center = 0.0;
  double radius = 0.05;
  std::size_t n0 = 5;
  std::size_t n1 = 3;
  double delta = 1e-3;
};

struct ShockReport {
  int p = 0;
  double delta = 0.0;
  double shock = 0.0;      // max_j |h_j dh_j/dxi0 - dh_j/dxi1|
  double flat = 0.0;       // max |d^2/dxi0^2 (G - sum h_j)|
  double g_curvature = 0.0;  // max |d^2 G/dxi0^2|
  double min_separation = 0.0;
  double shock_half = 0.0;   // shock residual at delta / 2
  double flat_half = 0.0;
  double shock_order_ratio = 0.0;  // shock / shock_half, 4 for a second-order floor
  std::vector<cplx> xi0, xi1;
  std::vector<cplx> G;                    // [i1 * |xi0| + i0]
  std::vector<std::vector<cplx>> h;       // same indexing, fibers
};

namespace detail {

struct ShockPass {
  double shock = 0.0, flat = 0.0, g2 = 0.0, sep = std::numeric_limits<double>::infinity();
  int p = -1;
  std::vector<cplx> G;
  std::vector<std::vector<cplx>> h;
};

inline int pencil_sheet_count(const CauchyMoments& e, cplx xi, cplx xi0, cplx xi1) {
  const cplx m0 = e.moments(xi, 0)[0];
  const long p = std::lround(m0.real());
  if (std::abs(m0 - static_cast<double>(p)) > 1e-6) {
    std::ostringstream os;
    os << "pencil sheet count not integral at (xi0, xi1) = (" << xi0 << ", " << xi1 << ")";
    fail(ErrorKind::NumericalFailure, os.str());
  }
  if (p < 0) fail(ErrorKind::Inconsistent, "negative sheet count: boundary orientation reversed");
  return static_cast<int>(p);
}

inline ShockPass shock_pass(const DNDatum& datum, const CauchyMoments& base, const ShockWindow& w,
                            double delta, const std::vector<cplx>& g0, const std::vector<cplx>& g1) {
  ShockPass out;
  for (const auto& x1 : g1) {
    const auto e = base.pencil(x1);
    const auto ep = base.pencil(x1 + delta), em = base.pencil(x1 - delta);
    for (const auto& x0 : g0) {
      try {
        const cplx xi = -x0;
        const int p = pencil_sheet_count(e, xi, x0, x1);
        if (out.p < 0) out.p = p;
        if (p != out.p) fail(ErrorKind::NumericalFailure, "sheet count changes across the window");
        const cplx G = compute_G(datum, x0, x1);
        const cplx Gp = compute_G(datum, x0 + delta, x1), Gm = compute_G(datum, x0 - delta, x1);
        out.G.push_back(G);
        out.g2 = std::max(out.g2, std::abs(Gp - 2.0 * G + Gm) / (delta * delta));
        if (p == 0) {
          out.h.emplace_back();
          out.flat = std::max(out.flat, std::abs(Gp - 2.0 * G + Gm) / (delta * delta));
          continue;
        }
        const auto h = fiber_at(e, xi, p);
        const double sep = min_separation(h);
        out.sep = std::min(out.sep, sep);
        if (sep <= 1e-4) fail(ErrorKind::NumericalFailure, "fiber sheets collide: move window");
        const auto hp0 = fiber_at(e, xi - delta, p, &h), hm0 = fiber_at(e, xi + delta, p, &h);
        const auto hp1 = fiber_at(ep, xi, p, &h), hm1 = fiber_at(em, xi, p, &h);
        cplx sum = 0.0, sump = 0.0, summ = 0.0;
        for (int j = 0; j < p; ++j) {
          const cplx d0 = (hp0[j] - hm0[j]) / (2.0 * delta), d1 = (hp1[j] - hm1[j]) / (2.0 * delta);
          out.shock = std::max(out.shock, std::abs(h[j] * d0 - d1));
          sum += h[j];
          sump += hp0[j];
          summ += hm0[j];
        }
        out.flat = std::max(out.flat, std::abs((Gp - sump) - 2.0 * (G - sum) + (Gm - summ)) / (delta * delta));
        out.h.push_back(h);
      } catch (const Error& err) {
        if (err.kind() == ErrorKind::Inconsistent) throw;
        std::ostringstream os;
        os << "fiber recovery failed at (xi0, xi1) = (" << x0 << ", " << x1 << "): " << err.what();
        fail(err.kind(), os.str());
      }
    }
  }
  return out;
}

}  // namespace detail

/// Shock (Riemann-Burgers) and flatness residuals of the pencil fibers on a
/// window, at step delta and delta / 2.
inline ShockReport shock_residual(const DNDatum& datum, const ShockWindow& w) {
  require(w.delta > 0.0 && w.radius > 0.0, ErrorKind::InvalidInput, "shock_residual: steps must be positive");
  const CauchyMoments base(datum);
  ShockReport r;
  r.xi0 = square_grid(w.xi0_center, w.radius, w.n0);
  r.xi1 = square_grid(w.xi1_center, w.radius, w.n1);
  const auto a = detail::shock_pass(datum, base, w, w.delta, r.xi0, r.xi1);
  const auto b = detail::shock_pass(datum, base, w, 0.5 * w.delta, r.xi0, r.xi1);
  r.p = a.p;
  r.delta = w.delta;
  r.shock = a.shock;
  r.flat = a.flat;
  r.g_curvature = a.g2;
  r.min_separation = a.p > 0 ? a.sep : 0.0;
  r.shock_half = b.shock;
  r.flat_half = b.flat;
  r.shock_order_ratio = b.shock > 0.0 ? a.shock / b.shock : 0.0;
  r.G = a.G;
  r.h = a.h;
  return r;
}

struct GreenIdentityReport {
  std::vector<cplx> probes;
  std::array<std::vector<cplx>, 3> defect;   // signed, per probe
  std::array<std::vector<double>, 3> residual;
  double max_residual = 0.0;
  bool charges_zero_sum = true;
};

/// Enclosing domain for the Green identity: the model domain scaled by 1.25.
inline DomainDescriptor enclosing_domain(const DomainDescriptor& d) {
  require(d.kind != DomainKind::Annulus, ErrorKind::InvalidInput,
          "mundane Green unavailable for annulus domains");
  DomainDescriptor e = d;
  e.radius *= 1.25;
  e.semi_a *= 1.25;
  e.semi_b *= 1.25;
  return e;
}

/// Deterministic probe points between the boundary of `d` and the enclosing
/// domain (scale factors in [1.05, 1.2]).
inline std::vector<cplx> green_probes(const DomainDescriptor& d, std::size_t count, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> z;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = 1.05 + 0.15 * u(rng), t = kTwoPi * u(rng);
    if (d.kind == DomainKind::Disk)
      z.push_back(std::polar(s * d.radius, t));
    else
      z.push_back(s * cplx(d.semi_a * std::cos(t), d.semi_b * std::sin(t)));
  }
  return z;
}

/// | (2/i) oint_gamma [u_l d_zeta g(zeta, z) + g(zeta, z) (du_l - theta u_l)] + 4 pi sum c g(a, z) |
/// for probes z outside the domain guess. du - theta u is the pullback of
/// dbar U, which is conj(theta u) for real potentials.
inline GreenIdentityReport green_identity_residual(const DNDatum& datum, const DomainDescriptor& guess,
                                                   const std::vector<std::vector<cplx>>& points,
                                                   const std::array<std::vector<std::vector<cplx>>, 3>& charges,
                                                   const std::vector<cplx>& probes) {
  const auto outer = enclosing_domain(guess);
  std::function<double(cplx, cplx)> g;
  std::function<cplx(cplx, cplx)> g_zeta;
  std::shared_ptr<PrincipalGreen> pg;
  if (outer.kind == DomainKind::Disk) {
    const double R = outer.radius;
    g = [R](cplx zeta, cplx z) { return disk_green(z, zeta, R); };
    g_zeta = [R](cplx zeta, cplx z) { return disk_green_dz(zeta, z, R); };
  } else {
    auto system = std::make_shared<const NystromSystem>(outer.boundary(256));
    pg = std::make_shared<PrincipalGreen>(build_principal_green(GreenKernel::mundane_log(), system));
    g = [pg](cplx zeta, cplx z) { return (*pg)(z, zeta); };
    g_zeta = [pg](cplx zeta, cplx z) { return pg->d_zeta(z, zeta); };
  }
  const auto& pos = datum.curve.positions();
  const auto& der = datum.curve.derivatives();
  const std::size_t n = datum.size();
  GreenIdentityReport rep;
  rep.probes = probes;
  for (const auto& z : probes) {
    require(datum.curve.distance_to(z) > 1e-6, ErrorKind::Domain, "green_identity_residual: probe on gamma");
    require(datum.curve.winding_number(z) == 0 && outer.contains(z), ErrorKind::Domain,
            "green_identity_residual: probe must lie between gamma and the enclosing domain");
  }
  for (int l = 0; l < 3; ++l) {
    const auto& cl = charges[static_cast<std::size_t>(l)];
    require(cl.size() == points.size(), ErrorKind::InvalidInput, "green_identity_residual: charge groups mismatch");
    for (std::size_t a = 0; a < points.size(); ++a) {
      require(cl[a].size() == points[a].size(), ErrorKind::InvalidInput,
              "green_identity_residual: charge group size mismatch");
      cplx s = 0.0;
      double m = 0.0;
      for (const auto& c : cl[a]) {
        s += c;
        m = std::max(m, std::abs(c));
      }
      if (std::abs(s) > 1e-9 * std::max(m, 1.0)) rep.charges_zero_sum = false;
    }
    const auto du = spectral::differentiate(datum.u[static_cast<std::size_t>(l)]);
    for (const auto& z : probes) {
      cplx acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const cplx uk = datum.u[static_cast<std::size_t>(l)][k];
        const cplx dbar = du[k] - datum.theta[static_cast<std::size_t>(l)][k] * der[k];
        acc += uk * g_zeta(pos[k], z) * der[k] + g(pos[k], z) * dbar;
      }
      const cplx lhs = (2.0 / kI) * acc * (kTwoPi / static_cast<double>(n));
      cplx rhs = 0.0;
      for (std::size_t a = 0; a < points.size(); ++a)
        for (std::size_t j = 0; j < points[a].size(); ++j) rhs += cl[a][j] * g(points[a][j], z);
      rhs *= -2.0 * kTwoPi;
      rep.defect[static_cast<std::size_t>(l)].push_back(lhs - rhs);
      rep.residual[static_cast<std::size_t>(l)].push_back(std::abs(lhs - rhs));
      rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs));
    }
  }
  if (!rep.charges_zero_sum) log(LogLevel::Info, "green_identity_residual: candidate charges are not zero-sum per group");
  return rep;
}

enum class Orientation { Gamma, ReversedGamma, AlgebraicAmbiguous, Neither };

inline const char* to_string(Orientation o) {
  switch (o) {
    case Orientation::Gamma: return "gamma";
    case Orientation::ReversedGamma: return "-gamma";
    case Orientation::AlgebraicAmbiguous: return "algebraic-ambiguous";
    case Orientation::Neither: return "neither";
  }
  return "neither";
}

struct CharacterizationThresholds {
  double shock = 1e-5;
  double flat = 1e-5;
  double flatness = 1e-8;  // |d^2 G/dxi0^2| below this is treated as identically zero
  double green = 1e-6;
};

struct OrientationReport {
  Orientation verdict = Orientation::Neither;
  std::optional<ShockReport> forward, reversed;
  std::string forward_error, reversed_error;
  bool forward_passes = false, reversed_passes = false;
};

namespace detail {

inline bool shock_passes(const ShockReport& r, const CharacterizationThresholds& t) {
  return r.shock < t.shock && r.flat < t.flat;
}

}  // namespace detail

/// Runs the shock criterion for gamma and for -gamma and reports which one
/// passes; when d^2 G/dxi0^2 vanishes on the window both reconstructions are
/// attached and the verdict is algebraic-ambiguous.
inline OrientationReport orientation_probe(const DNDatum& datum, const ShockWindow& w,
                                           const CharacterizationThresholds& t = {}) {
  OrientationReport rep;
  const auto reversed = datum.reversed();
  try {
    rep.forward = shock_residual(datum, w);
    rep.forward_passes = detail::shock_passes(*rep.forward, t);
  } catch (const Error& e) {
    rep.forward_error = e.what();
  }
  try {
    rep.reversed = shock_residual(reversed, w);
    rep.reversed_passes = detail::shock_passes(*rep.reversed, t);
  } catch (const Error& e) {
    rep.reversed_error = e.what();
  }
  const bool flat = (rep.forward && rep.forward->g_curvature < t.flatness) ||
                    (rep.reversed && rep.reversed->g_curvature < t.flatness);
  if (flat && (rep.forward_passes || rep.reversed_passes))
    rep.verdict = Orientation::AlgebraicAmbiguous;
  else if (rep.forward_passes && !rep.reversed_passes)
    rep.verdict = Orientation::Gamma;
  else if (rep.reversed_passes && !rep.forward_passes)
    rep.verdict = Orientation::ReversedGamma;
  else if (rep.forward_passes && rep.reversed_passes)
    rep.verdict = Orientation::AlgebraicAmbiguous;
  if (rep.verdict == Orientation::Neither)
    fail(ErrorKind::NumericalFailure, "not a DN-datum at tested windows");
  return rep;
}

struct GreenCheckInput {
  DomainDescriptor domain;
  std::vector<std::vector<cplx>> points;
  std::array<std::vector<std::vector<cplx>>, 3> charges;
  std::size_t probes = 20;
  std::uint64_t seed = 7;
};

struct CharacterizationReport {
  HypothesisAReport hypothesis_a;
  ShockWindow window;
  std::optional<OrientationReport> orientation;
  std::string orientation_error;
  std::optional<ShockReport> failed_shock;  // gamma-side residuals when no orientation passes
  std::optional<GreenIdentityReport> green;
  CharacterizationThresholds thresholds;
  bool passed = false;
  std::vector<std::string> failures;
};

/// All criteria on one window; passed iff hypothesis A holds, one orientation
/// passes the shock criterion, and (when candidates are given) the Green
/// identity holds.
inline CharacterizationReport characterize(const DNDatum& datum, const ShockWindow& w,
                                           const std::optional<GreenCheckInput>& green = std::nullopt,
                                           const CharacterizationThresholds& t = {}) {
  CharacterizationReport rep;
  rep.window = w;
  rep.thresholds = t;
  rep.hypothesis_a = datum.hypothesis_a;
  if (!rep.hypothesis_a.passed()) rep.failures.push_back("hypothesis A: " + rep.hypothesis_a.summary());
  try {
    rep.orientation = orientation_probe(datum, w, t);
  } catch (const Error& e) {
    rep.orientation_error = e.what();
    rep.failures.push_back(std::string("shock criterion: ") + e.what());
    try {
      rep.failed_shock = shock_residual(datum, w);
    } catch (const Error&) {
    }
  }
  if (green) {
    try {
      rep.green = green_identity_residual(datum, green->domain, green->points, green->charges,
                                          green_probes(green->domain, green->probes, green->seed));
      if (!(rep.green->max_residual < t.green)) {
        std::ostringstream os;
        os << "Green identity residual " << rep.green->max_residual << " exceeds " << t.green;
        rep.failures.push_back(os.str());
      }
    } catch (const Error& e) {
      rep.failures.push_back(std::string("Green identity: ") + e.what());
    }
  }
  rep.passed = rep.failures.empty();
  return rep;
}

}  // namespace nodal_idn
