#pragma once

// Inverse engine: Cauchy moments of a DN datum, sheet counts, fibers by
// Newton identities, form quotients by Vandermonde solves, and window sweeps.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "nodal_idn/core.hpp"
#include "nodal_idn/dirichlet.hpp"
#include "nodal_idn/polynomial.hpp"
#include "nodal_idn/spectral.hpp"

namespace nodal_idn {

/// Contour integrals over gamma of f1^m (f2 - xi)^-1 df2 and of
/// f1^m (f2 - xi)^-1 theta u_l, by the periodic trapezoid rule.
class CauchyMoments {
 public:
  explicit CauchyMoments(const DNDatum& datum)
      : f1_(datum.f1), f2_(datum.f2), df2_(spectral::differentiate(datum.f2)) {
    const std::size_t n = f2_.size();
    for (int l = 0; l < 3; ++l) {
      weighted_theta_[l].resize(n);
      for (std::size_t k = 0; k < n; ++k)
        weighted_theta_[l][k] = datum.theta[l][k] * datum.curve.derivatives()[k];
    }
    refresh_geometry();
  }

  /// Moments of the pencil coordinate f2 + xi1 f1 in place of f2.
  CauchyMoments pencil(cplx xi1) const {
    CauchyMoments c = *this;
    const auto df1 = spectral::differentiate(f1_);
    for (std::size_t k = 0; k < f2_.size(); ++k) {
      c.f2_[k] += xi1 * f1_[k];
      c.df2_[k] += xi1 * df1[k];
    }
    c.refresh_geometry();
    return c;
  }

  std::size_t size() const noexcept { return f2_.size(); }
  const ComplexSamples& f1() const noexcept { return f1_; }
  const ComplexSamples& f2() const noexcept { return f2_; }
  const ComplexSamples& df2() const noexcept { return df2_; }
  double exclusion_distance() const noexcept { return exclusion_; }
  double image_radius() const noexcept { return image_radius_; }

  double distance_to_image(cplx xi) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& v : f2_) d = std::min(d, std::abs(v - xi));
    return d;
  }

  void check_off_curve(cplx xi) const {
    if (distance_to_image(xi) <= exclusion_) {
      std::ostringstream os;
      os << "on-curve evaluation at xi = " << xi;
      fail(ErrorKind::Domain, os.str());
    }
  }

  /// M_0 .. M_mmax at xi.
  std::vector<cplx> moments(cplx xi, int mmax) const {
    require(mmax >= 0 && mmax <= 32, ErrorKind::InvalidInput, "moment order must lie in [0, 32]");
    check_off_curve(xi);
    return accumulate(df2_, xi, mmax);
  }

  cplx moment(int m, cplx xi) const { return moments(xi, m)[static_cast<std::size_t>(m)]; }

  /// A_0 .. A_mmax for the form theta u_l at xi.
  std::vector<cplx> form_moments(int l, cplx xi, int mmax) const {
    require(l >= 0 && l < 3, ErrorKind::InvalidInput, "form index must be 0, 1 or 2");
    require(mmax >= 0 && mmax <= 32, ErrorKind::InvalidInput, "moment order must lie in [0, 32]");
    check_off_curve(xi);
    // theta samples already carry d gamma/dt; the trapezoid weight is the same
    return accumulate(weighted_theta_[static_cast<std::size_t>(l)], xi, mmax);
  }

  /// Largest |M_m| on a circle far outside f2(gamma), relative to the size of
  /// f1^m there. A nonzero polynomial part cannot vanish on a whole circle,
  /// so this measures the departure from the bounded regime.
  double polynomial_part_residual(int mmax) const {
    const double r = 2.0 * image_radius_ + 1.0;
    double f1max = 1.0;
    for (const auto& v : f1_) f1max = std::max(f1max, std::abs(v));
    double worst = 0.0;
    for (int k = 0; k < 16; ++k) {
      const auto m = moments(std::polar(r, kTwoPi * k / 16.0), mmax);
      for (int j = 0; j <= mmax; ++j) worst = std::max(worst, std::abs(m[j]) / std::pow(f1max, j));
    }
    return worst;
  }

 private:
  void refresh_geometry() {
    const std::size_t n = f2_.size();
    double chord = 0.0;
    for (std::size_t k = 0; k < n; ++k) chord = std::max(chord, std::abs(f2_[(k + 1) % n] - f2_[k]));
    exclusion_ = 4.0 * chord;
    image_radius_ = 0.0;
    for (const auto& v : f2_) image_radius_ = std::max(image_radius_, std::abs(v));
  }

  std::vector<cplx> accumulate(const ComplexSamples& weight, cplx xi, int mmax) const {
    const std::size_t n = f2_.size();
    std::vector<cplx> acc(static_cast<std::size_t>(mmax) + 1, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
      cplx term = weight[k] / (f2_[k] - xi);
      for (int m = 0; m <= mmax; ++m) {
        acc[static_cast<std::size_t>(m)] += term;
        term *= f1_[k];
      }
    }
    const cplx scale = 1.0 / (kI * static_cast<double>(n));
    for (auto& v : acc) v *= scale;
    return acc;
  }

  ComplexSamples f1_, f2_, df2_;
  std::array<ComplexSamples, 3> weighted_theta_;
  double exclusion_ = 0.0;
  double image_radius_ = 0.0;
};

inline cplx compute_moment(const DNDatum& datum, int m, cplx xi) {
  return CauchyMoments(datum).moment(m, xi);
}

/// Moments on a square grid of grid_n x grid_n points covering
/// center + [-radius, radius]^2, row-major (rows along Im xi).
struct MomentTable {
  cplx center;
  double radius = 0.0;
  std::size_t grid_n = 9;
  std::vector<cplx> xi;
  std::vector<std::vector<cplx>> M;  // M[m][grid index]
  int max_order = 0;
};

inline std::vector<cplx> square_grid(cplx center, double radius, std::size_t n) {
  std::vector<cplx> g;
  g.reserve(n * n);
  const double step = n > 1 ? 2.0 * radius / static_cast<double>(n - 1) : 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      g.push_back(center + cplx(-radius + step * static_cast<double>(j),
                                -radius + step * static_cast<double>(i)));
  return g;
}

inline MomentTable build_moment_table(const CauchyMoments& engine, cplx center, double radius,
                                      int max_order, std::size_t grid_n = 9) {
  MomentTable t;
  t.center = center;
  t.radius = radius;
  t.grid_n = grid_n;
  t.max_order = max_order;
  t.xi = square_grid(center, radius, grid_n);
  for (const auto& x : t.xi) {
    if (engine.distance_to_image(x) <= std::max(0.05 * radius, engine.exclusion_distance())) {
      std::ostringstream os;
      os << "window at " << center << " crosses f2(gamma)";
      fail(ErrorKind::Domain, os.str());
    }
  }
  t.M.assign(static_cast<std::size_t>(max_order) + 1, std::vector<cplx>(t.xi.size()));
  for (std::size_t i = 0; i < t.xi.size(); ++i) {
    const auto m = engine.moments(t.xi[i], max_order);
    for (int j = 0; j <= max_order; ++j) t.M[static_cast<std::size_t>(j)][i] = m[static_cast<std::size_t>(j)];
  }
  return t;
}

/// Discrete Cauchy-Riemann residual |d/d conj(xi) F| at every grid point,
/// centered differences of step delta, normalized by max(1, max |F|).
template <class F>
double cauchy_riemann_residual(const F& field, const std::vector<cplx>& points, double delta) {
  double worst = 0.0, scale = 1.0;
  for (const auto& x : points) {
    const cplx fx = (field(x + delta) - field(x - delta)) / (2.0 * delta);
    const cplx fy = (field(x + kI * delta) - field(x - kI * delta)) / (2.0 * delta);
    worst = std::max(worst, 0.5 * std::abs(fx + kI * fy));
    scale = std::max(scale, std::abs(field(x)));
  }
  return worst / scale;
}

struct SheetCount {
  int p = 0;
  std::string path;  // "integral moment" or "hankel rank"
  double max_deviation = 0.0;
};

/// Number of sheets over the window: round(median M_0), integrality checked
/// pointwise; otherwise the numerical rank of the Hankel matrix of moments.
inline SheetCount estimate_sheet_count(const MomentTable& table) {
  require(!table.M.empty(), ErrorKind::InvalidInput, "estimate_sheet_count: table has no m = 0 row");
  std::vector<double> re;
  for (const auto& v : table.M[0]) re.push_back(v.real());
  std::vector<double> sorted = re;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
  const double med = sorted[sorted.size() / 2];
  const int p = static_cast<int>(std::lround(med));
  double dev = 0.0;
  for (const auto& v : table.M[0]) dev = std::max(dev, std::abs(v - static_cast<double>(p)));
  if (dev < 1e-4 && p >= 0) return {p, "integral moment", dev};

  // Hankel fallback on M_1 .. M_{2K-1} at the window center
  const int k = (table.max_order) / 2;
  require(k >= 1, ErrorKind::NumericalFailure, "sheet count ambiguous: move window");
  const std::size_t c = table.xi.size() / 2;
  Eigen::MatrixXcd h(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) h(i, j) = table.M[static_cast<std::size_t>(i + j + 1)][c];
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(h);
  const auto& s = svd.singularValues();
  int rank = 0;
  double best_gap = 0.0;
  for (int i = 0; i + 1 < s.size(); ++i) {
    if (s[i + 1] <= 0.0) {
      rank = i + 1;
      best_gap = std::numeric_limits<double>::infinity();
      break;
    }
    const double gap = s[i] / s[i + 1];
    if (gap > best_gap) {
      best_gap = gap;
      rank = i + 1;
    }
  }
  require(best_gap > 1e6, ErrorKind::NumericalFailure, "sheet count ambiguous: move window");
  return {rank, "hankel rank", dev};
}

enum class PolynomialRegime { Bounded, General };

struct EliminationOptions {
  PolynomialRegime regime = PolynomialRegime::Bounded;
  int k = 8;                    // number of Laurent terms in the general regime
  cplx expansion_point = 0.0;   // pole of the Laurent model, outside the window
  double exterior_residual = 0.0;  // from CauchyMoments::polynomial_part_residual
};

struct EliminationResult {
  std::vector<cplx> S;           // power sums at the samples
  Poly P;                        // polynomial part, ascending in xi
  double fit_residual = 0.0;
  double condition = 1.0;
};

/// Separates M_m(xi) = S_{h,m}(xi) + P_m(xi). In the bounded regime P = 0 is
/// asserted from the exterior residual; in the general regime (experimental)
/// S is modelled by a truncated Laurent series about an exterior point and
/// fitted jointly with P by least squares.
inline EliminationResult eliminate_polynomial_part(const std::vector<cplx>& xi,
                                                   const std::vector<cplx>& M, int m,
                                                   const EliminationOptions& opt = {}) {
  require(xi.size() == M.size(), ErrorKind::InvalidInput, "eliminate_polynomial_part: size mismatch");
  EliminationResult r;
  if (opt.regime == PolynomialRegime::Bounded) {
    require(opt.exterior_residual < 1e-6, ErrorKind::NumericalFailure,
            "polynomial part does not vanish: bounded regime violated");
    r.S = M;
    r.P = Poly(static_cast<std::size_t>(m) + 1, cplx{0.0, 0.0});
    r.fit_residual = opt.exterior_residual;
    return r;
  }
  const std::size_t cols = static_cast<std::size_t>(m + 1 + opt.k);
  require(xi.size() >= cols + 1, ErrorKind::InvalidInput,
          "eliminate_polynomial_part: need at least m + 2 + k samples");
  for (std::size_t i = 0; i < xi.size(); ++i)
    for (std::size_t j = i + 1; j < xi.size(); ++j)
      require(xi[i] != xi[j], ErrorKind::InvalidInput, "eliminate_polynomial_part: repeated sample");
  // column scaling: polynomial in (xi - c)/s, Laurent in s'/(xi - q)
  cplx c = 0.0;
  for (const auto& x : xi) c += x;
  c /= static_cast<double>(xi.size());
  double s = 0.0, dq = std::numeric_limits<double>::infinity();
  for (const auto& x : xi) {
    s = std::max(s, std::abs(x - c));
    dq = std::min(dq, std::abs(x - opt.expansion_point));
  }
  if (s == 0.0) s = 1.0;
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(xi.size()), static_cast<Eigen::Index>(cols));
  Eigen::VectorXcd b(static_cast<Eigen::Index>(xi.size()));
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    cplx pw = 1.0;
    for (int j = 0; j <= m; ++j) {
      a(row, j) = pw;
      pw *= (xi[i] - c) / s;
    }
    const cplx inv = dq / (xi[i] - opt.expansion_point);
    pw = inv;
    for (int j = 0; j < opt.k; ++j) {
      a(row, m + 1 + j) = pw;
      pw *= inv;
    }
    b[row] = M[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  r.condition = sv[0] / sv[sv.size() - 1];
  if (!(r.condition <= 1e10)) fail(ErrorKind::NumericalFailure, "enlarge window or raise k");
  const Eigen::VectorXcd x = svd.solve(b);
  // back to monomials in xi
  Poly shifted(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) shifted[static_cast<std::size_t>(j)] = x[j] / std::pow(s, j);
  r.P.assign(static_cast<std::size_t>(m) + 1, cplx{0.0, 0.0});
  // expand sum_j a_j (xi - c)^j
  for (int j = 0; j <= m; ++j) {
    double binom = 1.0;
    for (int i = 0; i <= j; ++i) {
      r.P[static_cast<std::size_t>(i)] += shifted[static_cast<std::size_t>(j)] * binom * std::pow(-c, j - i);
      binom = binom * static_cast<double>(j - i) / static_cast<double>(i + 1);
    }
  }
  r.S.resize(xi.size());
  double res = 0.0;
  const Eigen::VectorXcd fit = a * x;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    r.S[i] = M[i] - polyval(r.P, xi[i]);
    res = std::max(res, std::abs(fit[static_cast<Eigen::Index>(i)] - b[static_cast<Eigen::Index>(i)]));
  }
  r.fit_residual = res;
  return r;
}

inline double min_separation(const std::vector<cplx>& roots) {
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < roots.size(); ++i)
    for (std::size_t j = i + 1; j < roots.size(); ++j) s = std::min(s, std::abs(roots[i] - roots[j]));
  return s;
}

/// Reorders `current` so that entry j continues previous[j]. Nearest
/// neighbour with a collision guard.
inline std::vector<cplx> match_roots(const std::vector<cplx>& previous, const std::vector<cplx>& current) {
  require(previous.size() == current.size(), ErrorKind::NumericalFailure,
          "root matching: sheet count changed");
  std::vector<cplx> out(current.size());
  std::vector<bool> taken(current.size(), false);
  for (std::size_t j = 0; j < previous.size(); ++j) {
    std::size_t best = current.size();
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < current.size(); ++i) {
      const double d = std::abs(current[i] - previous[j]);
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    if (taken[best]) fail(ErrorKind::NumericalFailure, "decrease grid step");
    taken[best] = true;
    out[j] = current[best];
  }
  return out;
}

/// Roots h_1..h_p from power sums S_1..S_p, continuation-matched to
/// `previous` when given.
inline std::vector<cplx> recover_fibers(const std::vector<cplx>& power_sums,
                                        const std::vector<cplx>* previous = nullptr) {
  require(!power_sums.empty(), ErrorKind::InvalidInput, "recover_fibers: p must be at least 1");
  auto roots = roots_from_elementary(elementary_from_power_sums(power_sums));
  if (previous != nullptr) return match_roots(*previous, roots);
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return roots;
}

/// Solves sum_j h_j^m g_j = A_m, m = 0..p-1.
inline std::vector<cplx> solve_vandermonde(const std::vector<cplx>& roots, const std::vector<cplx>& rhs) {
  const auto p = static_cast<Eigen::Index>(roots.size());
  if (p == 0) return {};
  if (min_separation(roots) <= 1e-6) fail(ErrorKind::NumericalFailure, "near branch point: move xi");
  Eigen::MatrixXcd v(p, p);
  Eigen::VectorXcd b(p);
  for (Eigen::Index m = 0; m < p; ++m) {
    for (Eigen::Index j = 0; j < p; ++j) v(m, j) = std::pow(roots[static_cast<std::size_t>(j)], static_cast<int>(m));
    b[m] = rhs[static_cast<std::size_t>(m)];
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s[0] / s[p - 1] <= 1e10)) fail(ErrorKind::NumericalFailure, "near branch point: move xi");
  const Eigen::VectorXcd g = svd.solve(b);
  return {g.data(), g.data() + p};
}

/// Form quotients dU_l/dF_2 at the fiber points over xi.
inline std::vector<cplx> recover_form_quotient(const CauchyMoments& engine, int l, cplx xi,
                                               const std::vector<cplx>& roots) {
  if (roots.empty()) return {};
  const auto a = engine.form_moments(l, xi, static_cast<int>(roots.size()) - 1);
  return solve_vandermonde(roots, a);
}

/// Fiber roots at one xi given the sheet count (bounded regime: S = M).
inline std::vector<cplx> fiber_at(const CauchyMoments& engine, cplx xi, int p,
                                  const std::vector<cplx>* previous = nullptr) {
  if (p == 0) return {};
  const auto m = engine.moments(xi, p);
  return recover_fibers({m.begin() + 1, m.end()}, previous);
}

/// Continues the labelled roots `start` at xi0 to xi1 along the segment,
/// halving steps until every step moves each root by less than half the
/// current separation.
inline std::vector<cplx> continue_fiber(const CauchyMoments& engine, cplx xi0, cplx xi1, int p,
                                        std::vector<cplx> start, int depth = 0) {
  if (p == 0) return {};
  bool ok = true;
  std::vector<cplx> end;
  try {
    end = fiber_at(engine, xi1, p, &start);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NumericalFailure) throw;
    ok = false;
  }
  const double sep = min_separation(start);
  for (std::size_t j = 0; ok && j < start.size(); ++j)
    if (std::abs(end[j] - start[j]) >= 0.5 * sep) ok = false;
  if (ok) return end;
  if (depth >= 12) fail(ErrorKind::NumericalFailure, "decrease grid step");
  const cplx mid = 0.5 * (xi0 + xi1);
  auto at_mid = continue_fiber(engine, xi0, mid, p, std::move(start), depth + 1);
  return continue_fiber(engine, mid, xi1, p, std::move(at_mid), depth + 1);
}

/// Grid traversal order: rows alternate direction.
inline std::vector<std::size_t> serpentine_order(std::size_t n) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t jj = 0; jj < n; ++jj) order.push_back(i * n + (i % 2 == 0 ? jj : n - 1 - jj));
  return order;
}

struct FiberWindow {
  std::size_t id = 0;
  cplx requested_center;
  cplx center;
  double radius = 0.0;
  std::size_t grid_n = 9;
  bool relocated = false;
  bool ok = false;
  std::string note;

  int p = 0;
  std::string sheet_count_path;
  std::vector<cplx> xi;
  std::vector<std::vector<cplx>> roots;                    // [grid][sheet]
  std::array<std::vector<std::vector<cplx>>, 3> quotients;  // [l][grid][sheet]
  double min_root_separation = 0.0;
  double power_sum_residual = 0.0;
  double moment_cr_residual = 0.0;
  double fiber_cr_residual = 0.0;
  double polynomial_residual = 0.0;
  std::vector<std::size_t> global_sheet;  // window sheet -> stitched label
};

struct WindowPlan {
  std::vector<cplx> centers;
  double radius = 0.1;
  std::size_t grid_n = 9;
  bool quotients = true;
  bool holomorphy_checks = true;
  unsigned jobs = 1;

  static WindowPlan ring(cplx center, double ring_radius, std::size_t count, double window_radius) {
    WindowPlan w;
    w.radius = window_radius;
    for (std::size_t k = 0; k < count; ++k)
      w.centers.push_back(center + std::polar(ring_radius, kTwoPi * static_cast<double>(k) / static_cast<double>(count)));
    return w;
  }
};

namespace detail {

inline void run_window(const CauchyMoments& engine, FiberWindow& w, double exterior_residual,
                       const WindowPlan& plan) {
  const auto table = build_moment_table(engine, w.center, w.radius, 0, w.grid_n);
  const auto sc = estimate_sheet_count(table);
  w.p = sc.p;
  w.sheet_count_path = sc.path;
  w.xi = table.xi;
  w.polynomial_residual = exterior_residual;
  const int mmax = std::max(2 * w.p, 1);
  const auto full = build_moment_table(engine, w.center, w.radius, mmax, w.grid_n);
  EliminationOptions opt;
  opt.exterior_residual = exterior_residual;
  std::vector<std::vector<cplx>> S(static_cast<std::size_t>(mmax) + 1);
  for (int m = 0; m <= mmax; ++m) S[static_cast<std::size_t>(m)] = eliminate_polynomial_part(full.xi, full.M[static_cast<std::size_t>(m)], m, opt).S;
  const std::size_t npts = w.xi.size();
  w.roots.assign(npts, {});
  for (auto& q : w.quotients) q.assign(npts, {});
  w.min_root_separation = std::numeric_limits<double>::infinity();
  if (plan.holomorphy_checks) {
    w.moment_cr_residual = 0.0;
    const double delta = 1e-3 * w.radius;
    for (int m = 0; m <= mmax; ++m)
      w.moment_cr_residual = std::max(
          w.moment_cr_residual,
          cauchy_riemann_residual([&](cplx x) { return engine.moment(m, x); }, w.xi, delta));
  }
  if (w.p == 0) {
    w.ok = true;
    return;
  }
  const auto order = serpentine_order(w.grid_n);
  const std::vector<cplx>* prev = nullptr;
  std::size_t prev_idx = 0;
  for (const auto idx : order) {
    std::vector<cplx> sums;
    for (int m = 1; m <= w.p; ++m) sums.push_back(S[static_cast<std::size_t>(m)][idx]);
    std::vector<cplx> r;
    if (prev == nullptr) {
      r = recover_fibers(sums);
    } else {
      r = continue_fiber(engine, w.xi[prev_idx], w.xi[idx], w.p, *prev);
    }
    w.min_root_separation = std::min(w.min_root_separation, min_separation(r));
    for (int m = 1; m <= 2 * w.p; ++m) {
      cplx ps = 0.0;
      for (const auto& h : r) ps += std::pow(h, m);
      const cplx s = S[static_cast<std::size_t>(m)][idx];
      w.power_sum_residual = std::max(w.power_sum_residual, std::abs(ps - s) / std::max(1.0, std::abs(s)));
    }
    w.roots[idx] = std::move(r);
    prev = &w.roots[idx];
    prev_idx = idx;
  }
  if (w.min_root_separation < 1e-4)
    fail(ErrorKind::NumericalFailure, "window straddles a branch point");
  if (plan.quotients)
    for (int l = 0; l < 3; ++l)
      for (std::size_t i = 0; i < npts; ++i)
        w.quotients[static_cast<std::size_t>(l)][i] = recover_form_quotient(engine, l, w.xi[i], w.roots[i]);
  if (plan.holomorphy_checks) {
    const double delta = 1e-3 * w.radius;
    double worst = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < npts; ++i) {
      const auto& r0 = w.roots[i];
      auto at = [&](cplx x) { return continue_fiber(engine, w.xi[i], x, w.p, r0); };
      const auto xp = at(w.xi[i] + delta), xm = at(w.xi[i] - delta);
      const auto yp = at(w.xi[i] + kI * delta), ym = at(w.xi[i] - kI * delta);
      for (int j = 0; j < w.p; ++j) {
        const cplx fx = (xp[j] - xm[j]) / (2.0 * delta), fy = (yp[j] - ym[j]) / (2.0 * delta);
        worst = std::max(worst, 0.5 * std::abs(fx + kI * fy));
        scale = std::max(scale, std::abs(r0[j]));
      }
    }
    w.fiber_cr_residual = worst / scale;
  }
  w.ok = true;
}

}  // namespace detail

struct ReconstructedCurve {
  std::vector<FiberWindow> windows;
  std::size_t failed = 0;
  std::vector<std::string> notes;
  double exterior_residual = 0.0;
};

/// Runs the per-window pipeline, relocating windows that straddle branch
/// points, then stitches sheet labels across overlapping windows.
inline ReconstructedCurve sweep_windows(const CauchyMoments& engine, const WindowPlan& plan) {
  ReconstructedCurve out;
  out.exterior_residual = engine.polynomial_part_residual(8);
  out.windows.resize(plan.centers.size());
  auto work = [&](std::size_t i) {
    FiberWindow& w = out.windows[i];
    w.id = i;
    w.requested_center = plan.centers[i];
    w.radius = plan.radius;
    w.grid_n = plan.grid_n;
    // shifts of 1.2 radii push a branch point on the grid out of the window
    const cplx offsets[] = {0.0, 1.2, -1.2, 1.2 * kI, -1.2 * kI};
    std::string last;
    for (const auto& off : offsets) {
      FiberWindow trial = w;
      trial.center = plan.centers[i] + off * plan.radius;
      trial.relocated = off != cplx(0.0);
      try {
        detail::run_window(engine, trial, out.exterior_residual, plan);
        if (trial.relocated) {
          std::ostringstream os;
          os << "relocated from " << plan.centers[i] << " to " << trial.center << " (" << last << ")";
          trial.note = os.str();
        }
        w = std::move(trial);
        return;
      } catch (const Error& e) {
        last = e.what();
        if (e.kind() == ErrorKind::Domain) break;  // crossing f2(gamma): skip
      }
    }
    w.ok = false;
    w.center = plan.centers[i];
    w.note = "skipped: " + last;
  };
  const unsigned jobs = std::max(1u, plan.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < plan.centers.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < plan.centers.size(); i += jobs) work(i);
      });
    for (auto& th : pool) th.join();
  }
  // stitching, sequential in window order
  std::size_t next_label = 0;
  for (std::size_t i = 0; i < out.windows.size(); ++i) {
    auto& w = out.windows[i];
    if (!w.ok) {
      ++out.failed;
      out.notes.push_back("window " + std::to_string(i) + ": " + w.note);
      continue;
    }
    if (!w.note.empty()) out.notes.push_back("window " + std::to_string(i) + ": " + w.note);
    w.global_sheet.assign(static_cast<std::size_t>(w.p), 0);
    bool stitched = false;
    for (std::size_t j = i; j-- > 0;) {
      const auto& v = out.windows[j];
      if (!v.ok || v.p != w.p || w.p == 0) continue;
      const cplx d = w.center - v.center;
      if (std::max(std::abs(d.real()), std::abs(d.imag())) >= w.radius + v.radius) continue;
      // nearest grid points across the overlap
      auto nearest = [](const FiberWindow& fw, cplx target) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < fw.xi.size(); ++k)
          if (std::abs(fw.xi[k] - target) < std::abs(fw.xi[best] - target)) best = k;
        return best;
      };
      const std::size_t a = nearest(v, w.center), b = nearest(w, v.center);
      try {
        const auto moved = continue_fiber(engine, v.xi[a], w.xi[b], w.p, v.roots[a]);
        // moved[s] continues v's sheet s; find it among w's roots at b
        const auto perm = match_roots(moved, w.roots[b]);
        for (std::size_t s = 0; s < perm.size(); ++s) {
          const auto it = std::find(w.roots[b].begin(), w.roots[b].end(), perm[s]);
          w.global_sheet[static_cast<std::size_t>(it - w.roots[b].begin())] = v.global_sheet[s];
        }
        stitched = true;
        break;
      } catch (const Error& e) {
        out.notes.push_back("window " + std::to_string(i) + ": stitching with window " +
                            std::to_string(j) + " failed: " + e.what());
      }
    }
    if (!stitched)
      for (auto& g : w.global_sheet) g = next_label++;
    else
      for (auto g : w.global_sheet) next_label = std::max(next_label, g + 1);
  }
  return out;
}

}  // namespace nodal_idn
