#pragma once

// Singular points of the reconstructed curve: discriminant zeros, monodromy
// cycles around them, branch residues, energy growth and node partitions.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "nodal_idn/core.hpp"
#include "nodal_idn/curve_model.hpp"
#include "nodal_idn/moments.hpp"
#include "nodal_idn/polynomial.hpp"
#include "nodal_idn/spectral.hpp"

namespace nodal_idn {

struct NodeOptions {
  double contour_radius = 0.05;
  std::size_t quadrature = 128;   // points per turn for residues
  std::size_t discriminant_nodes = 256;
  int energy_levels = 4;          // annuli eps/2 < r < eps, eps = rho, rho/2, ...
  std::size_t energy_angular = 64;
  std::size_t energy_radial = 8;
  double tau_res_floor = 1e-6;
  unsigned jobs = 1;
};

/// One local branch through a candidate point: a monodromy cycle of the
/// fiber over a small circle around xi0.
struct LocalBranch {
  std::vector<std::size_t> members;   // indices into the start fiber, in cycle order
  std::vector<std::size_t> global_sheets;  // stitched labels, npos when unknown
  cplx center_value;                  // mean of h over the cycle: h at xi0
  std::size_t cycle_length() const { return members.size(); }
};

struct SingularCandidate {
  cplx h;    // first coordinate of the image point
  cplx xi0;  // second coordinate
  std::size_t window = 0;
  int p = 0;
  double contour_radius = 0.0;
  std::vector<cplx> start_fiber;      // fiber at xi0 + contour_radius
  std::vector<LocalBranch> branches;  // cycles through (h, xi0)
  std::vector<LocalBranch> other_cycles;
  std::string note;
};

enum class BranchClass { NodeBranch, Spurious, Undetermined };

inline const char* to_string(BranchClass c) {
  switch (c) {
    case BranchClass::NodeBranch: return "node-branch";
    case BranchClass::Spurious: return "spurious";
    case BranchClass::Undetermined: return "undetermined";
  }
  return "undetermined";
}

enum class EnergyVerdict { Divergent, Convergent, Undetermined };

inline const char* to_string(EnergyVerdict v) {
  switch (v) {
    case EnergyVerdict::Divergent: return "divergent";
    case EnergyVerdict::Convergent: return "convergent";
    case EnergyVerdict::Undetermined: return "undetermined";
  }
  return "undetermined";
}

struct EnergyGrowth {
  std::vector<double> radii;          // outer radius eps of each annulus
  std::vector<double> contributions;  // integral of |g|^2 over eps/2 < r < eps
  std::vector<double> ratios;         // successive contribution ratios
  double total = 0.0;
  EnergyVerdict verdict = EnergyVerdict::Undetermined;
};

struct BranchAnalysis {
  std::array<cplx, 3> residue{};
  std::array<EnergyGrowth, 3> energy;
  BranchClass cls = BranchClass::Undetermined;
  bool diagnostics_agree = true;
  std::string note;
};

struct SingularPointReport {
  SingularCandidate point;
  std::vector<BranchAnalysis> branches;
};

namespace detail {

/// prod_{j<k} (h_j - h_k)^2 at xi, symmetric in the fiber.
inline cplx discriminant(const CauchyMoments& engine, cplx xi, int p) {
  const auto h = fiber_at(engine, xi, p);
  cplx d = 1.0;
  for (std::size_t j = 0; j < h.size(); ++j)
    for (std::size_t k = j + 1; k < h.size(); ++k) d *= (h[j] - h[k]) * (h[j] - h[k]);
  return d;
}

/// Labelled fibers along `turns` turns of the circle |xi - c| = r starting
/// at c + r, continued from `start`. Entry k sits at angle 2 pi k / m.
inline std::vector<std::vector<cplx>> track_circle(const CauchyMoments& engine, cplx c, double r,
                                                   const std::vector<cplx>& start, int p,
                                                   std::size_t m, std::size_t turns) {
  std::vector<std::vector<cplx>> out;
  out.reserve(m * turns + 1);
  out.push_back(start);
  try {
    for (std::size_t k = 1; k <= m * turns; ++k) {
      const cplx a = c + std::polar(r, kTwoPi * static_cast<double>(k - 1) / static_cast<double>(m));
      const cplx b = c + std::polar(r, kTwoPi * static_cast<double>(k) / static_cast<double>(m));
      out.push_back(continue_fiber(engine, a, b, p, out.back()));
    }
  } catch (const Error& e) {
    fail(ErrorKind::NumericalFailure, std::string("monodromy: branch point inside contour (") + e.what() + ")");
  }
  return out;
}

inline std::vector<std::size_t> permutation_after_turn(const std::vector<cplx>& start,
                                                       const std::vector<cplx>& end) {
  std::vector<std::size_t> perm(start.size());
  std::vector<bool> taken(start.size(), false);
  for (std::size_t j = 0; j < end.size(); ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < start.size(); ++i)
      if (std::abs(start[i] - end[j]) < std::abs(start[best] - end[j])) best = i;
    if (taken[best]) fail(ErrorKind::NumericalFailure, "monodromy: branch point inside contour");
    taken[best] = true;
    perm[j] = best;
  }
  return perm;
}

inline std::vector<double> gauss_legendre_nodes(std::size_t n, std::vector<double>& weights) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    const double b = static_cast<double>(k) / std::sqrt(4.0 * static_cast<double>(k * k) - 1.0);
    j(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = b;
    j(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  std::vector<double> x(n);
  weights.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()[static_cast<Eigen::Index>(k)];
    const double v = es.eigenvectors()(0, static_cast<Eigen::Index>(k));
    weights[k] = 2.0 * v * v;
  }
  return x;
}

}  // namespace detail

struct DiscriminantZero {
  cplx xi;
  int multiplicity = 0;
};

/// Zeros of the fiber discriminant inside |xi - center| < radius, by contour
/// power sums of D'/D. Zeros closer than `merge` are reported as one cluster
/// at their mean.
inline std::vector<DiscriminantZero> discriminant_zeros(const CauchyMoments& engine, cplx center,
                                                        double radius, int p, std::size_t nodes,
                                                        double merge) {
  if (p < 2) return {};
  ComplexSamples d(nodes);
  for (std::size_t k = 0; k < nodes; ++k)
    d[k] = detail::discriminant(engine, center + std::polar(radius, kTwoPi * static_cast<double>(k) / static_cast<double>(nodes)), p);
  const auto dd = spectral::differentiate(d);
  // (1/2 pi i) oint s^k D'/D ds with s = xi - center, D' = dD/dt / (i s)
  auto moment = [&](int k) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
      const cplx s = std::polar(radius, kTwoPi * static_cast<double>(j) / static_cast<double>(nodes));
      acc += std::pow(s, k) * dd[j] / d[j];
    }
    return acc / (kI * static_cast<double>(nodes));
  };
  const cplx n0 = moment(0);
  const long count = std::lround(n0.real());
  if (std::abs(n0 - static_cast<double>(count)) > 0.05)
    fail(ErrorKind::NumericalFailure, "discriminant contour passes too close to a zero: move window");
  if (count <= 0) return {};
  require(count <= 32, ErrorKind::NumericalFailure, "too many discriminant zeros in one window: shrink windows");
  std::vector<cplx> sums;
  for (long k = 1; k <= count; ++k) sums.push_back(moment(static_cast<int>(k)));
  const auto roots = roots_from_elementary(elementary_from_power_sums(sums));
  // greedy clustering; a cluster of a multiple zero is centred at its mean
  std::vector<std::vector<cplx>> clusters;
  for (const auto& r : roots) {
    bool placed = false;
    for (auto& c : clusters) {
      cplx mean = 0.0;
      for (const auto& v : c) mean += v;
      mean /= static_cast<double>(c.size());
      if (std::abs(mean - r) < merge) {
        c.push_back(r);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({r});
  }
  std::vector<DiscriminantZero> out;
  for (const auto& c : clusters) {
    cplx mean = 0.0;
    for (const auto& v : c) mean += v;
    mean /= static_cast<double>(c.size());
    if (std::abs(mean) < radius) out.push_back({center + mean, static_cast<int>(c.size())});
  }
  return out;
}

/// Candidate singular points: discriminant zeros over which two or more
/// monodromy cycles share the same limit value h.
inline std::vector<SingularCandidate> locate_singularities(const CauchyMoments& engine,
                                                           const ReconstructedCurve& curve,
                                                           const NodeOptions& opt = {}) {
  struct Found {
    cplx xi;
    std::size_t window;
    int p;
  };
  std::vector<Found> zeros;
  for (std::size_t wi = 0; wi < curve.windows.size(); ++wi) {
    const auto& w = curve.windows[wi];
    if (!w.ok || w.p < 2) continue;
    std::vector<DiscriminantZero> z;
    for (const double frac : {0.9, 0.8, 0.7}) {
      try {
        z = discriminant_zeros(engine, w.center, frac * w.radius, w.p, opt.discriminant_nodes, 0.1 * w.radius);
        break;
      } catch (const Error& e) {
        log(LogLevel::Debug, std::string("window ") + std::to_string(wi) + ": " + e.what());
      }
    }
    for (const auto& dz : z) {
      bool dup = false;
      for (const auto& f : zeros)
        if (std::abs(f.xi - dz.xi) < 0.1 * w.radius) dup = true;
      if (!dup) zeros.push_back({dz.xi, wi, w.p});
    }
  }
  std::vector<SingularCandidate> out;
  for (std::size_t zi = 0; zi < zeros.size(); ++zi) {
    const auto& z = zeros[zi];
    const auto& w = curve.windows[z.window];
    SingularCandidate c;
    c.xi0 = z.xi;
    c.window = z.window;
    c.p = z.p;
    double rho = opt.contour_radius;
    for (std::size_t o = 0; o < zeros.size(); ++o)
      if (o != zi) rho = std::min(rho, 0.45 * std::abs(zeros[o].xi - z.xi));
    const double room = engine.distance_to_image(z.xi) - engine.exclusion_distance();
    rho = std::min(rho, 0.5 * room);
    if (rho < opt.contour_radius) {
      std::ostringstream os;
      os << "contour radius shrunk to " << rho << " (nearby singular values)";
      c.note = os.str();
      log(LogLevel::Info, c.note);
    }
    if (!(rho > 1e-6)) continue;
    c.contour_radius = rho;
    c.start_fiber = fiber_at(engine, z.xi + rho, z.p);
    const auto path = detail::track_circle(engine, z.xi, rho, c.start_fiber, z.p, opt.quadrature, 1);
    const auto perm = detail::permutation_after_turn(c.start_fiber, path.back());
    // global labels: continue from the nearest window grid point
    std::vector<std::size_t> global(c.start_fiber.size(), std::numeric_limits<std::size_t>::max());
    if (!w.global_sheet.empty()) {
      std::size_t near = 0;
      for (std::size_t k = 1; k < w.xi.size(); ++k)
        if (std::abs(w.xi[k] - (z.xi + rho)) < std::abs(w.xi[near] - (z.xi + rho))) near = k;
      try {
        const auto moved = continue_fiber(engine, w.xi[near], z.xi + rho, z.p, w.roots[near]);
        for (std::size_t s = 0; s < moved.size(); ++s) {
          std::size_t best = 0;
          for (std::size_t i = 1; i < c.start_fiber.size(); ++i)
            if (std::abs(c.start_fiber[i] - moved[s]) < std::abs(c.start_fiber[best] - moved[s])) best = i;
          global[best] = w.global_sheet[s];
        }
      } catch (const Error&) {
      }
    }
    std::vector<bool> seen(perm.size(), false);
    std::vector<LocalBranch> cycles;
    for (std::size_t s = 0; s < perm.size(); ++s) {
      if (seen[s]) continue;
      LocalBranch b;
      for (std::size_t j = s; !seen[j]; j = perm[j]) {
        seen[j] = true;
        b.members.push_back(j);
        b.global_sheets.push_back(global[j]);
      }
      cplx mean = 0.0;
      for (std::size_t k = 0; k < opt.quadrature; ++k)
        for (const auto j : b.members) mean += path[k][j];
      b.center_value = mean / static_cast<double>(opt.quadrature * b.members.size());
      cycles.push_back(std::move(b));
    }
    const double tau_sing = std::max(1e-4 * w.radius, 1e-8);
    std::vector<bool> used(cycles.size(), false);
    for (std::size_t a = 0; a < cycles.size(); ++a) {
      if (used[a]) continue;
      std::vector<std::size_t> group{a};
      for (std::size_t b = a + 1; b < cycles.size(); ++b)
        if (!used[b] && std::abs(cycles[b].center_value - cycles[a].center_value) < tau_sing) group.push_back(b);
      if (group.size() < 2) continue;
      SingularCandidate cand = c;
      cand.h = 0.0;
      for (const auto g : group) {
        used[g] = true;
        cand.branches.push_back(cycles[g]);
        cand.h += cycles[g].center_value;
      }
      cand.h /= static_cast<double>(group.size());
      for (std::size_t o = 0; o < cycles.size(); ++o)
        if (std::find(group.begin(), group.end(), o) == group.end()) cand.other_cycles.push_back(cycles[o]);
      out.push_back(std::move(cand));
    }
  }
  std::sort(out.begin(), out.end(), [](const SingularCandidate& a, const SingularCandidate& b) {
    if (a.xi0.real() != b.xi0.real()) return a.xi0.real() < b.xi0.real();
    if (a.xi0.imag() != b.xi0.imag()) return a.xi0.imag() < b.xi0.imag();
    return a.h.real() < b.h.real();
  });
  return out;
}

/// (1/2 pi i) oint g_l dxi along the cycle of `branch` for l = 0, 1, 2,
/// using `radius` (0 keeps the candidate's contour radius).
inline std::array<cplx, 3> branch_residues(const CauchyMoments& engine, const SingularCandidate& cand,
                                           std::size_t branch, std::size_t nodes = 128,
                                           double radius = 0.0) {
  require(branch < cand.branches.size(), ErrorKind::InvalidInput, "branch_residue: no such branch");
  const auto& b = cand.branches[branch];
  const double r = radius > 0.0 ? radius : cand.contour_radius;
  std::vector<cplx> start = cand.start_fiber;
  if (r != cand.contour_radius) {
    try {
      start = continue_fiber(engine, cand.xi0 + cand.contour_radius, cand.xi0 + r, cand.p, start);
    } catch (const Error& e) {
      fail(ErrorKind::NumericalFailure, std::string("monodromy: branch point inside contour (") + e.what() + ")");
    }
  }
  const auto path = detail::track_circle(engine, cand.xi0, r, start, cand.p, nodes, b.cycle_length());
  const std::size_t j = b.members.front();
  std::array<cplx, 3> acc{};
  for (std::size_t k = 0; k < nodes * b.cycle_length(); ++k) {
    const cplx s = std::polar(r, kTwoPi * static_cast<double>(k) / static_cast<double>(nodes));
    for (int l = 0; l < 3; ++l) {
      const auto g = recover_form_quotient(engine, l, cand.xi0 + s, path[k]);
      acc[static_cast<std::size_t>(l)] += g[j] * s;
    }
  }
  // dxi = i s dtheta, so (1/2 pi i) oint g dxi = mean of g s over the cover
  for (auto& v : acc) v /= static_cast<double>(nodes);
  return acc;
}

inline cplx branch_residue(const CauchyMoments& engine, const SingularCandidate& cand, std::size_t branch,
                           int l, std::size_t nodes = 128) {
  require(l >= 0 && l < 3, ErrorKind::InvalidInput, "form index must be 0, 1 or 2");
  return branch_residues(engine, cand, branch, nodes)[static_cast<std::size_t>(l)];
}

/// Integral of |g_l|^2 over annuli eps/2 < |xi - xi0| < eps on the branch,
/// for eps = rho, rho/2, ...; constant contributions mean logarithmic
/// divergence of the Dirichlet energy.
inline std::array<EnergyGrowth, 3> dirichlet_energy_growth(const CauchyMoments& engine,
                                                           const SingularCandidate& cand,
                                                           std::size_t branch,
                                                           const NodeOptions& opt = {}) {
  require(branch < cand.branches.size(), ErrorKind::InvalidInput, "dirichlet_energy_growth: no such branch");
  const auto& b = cand.branches[branch];
  const std::size_t turns = b.cycle_length();
  const std::size_t j = b.members.front();
  std::vector<double> gw;
  const auto gx = detail::gauss_legendre_nodes(opt.energy_radial, gw);
  std::array<EnergyGrowth, 3> out;
  std::vector<cplx> ray = cand.start_fiber;
  double ray_r = cand.contour_radius;
  double eps = cand.contour_radius;
  for (int level = 0; level < opt.energy_levels; ++level, eps *= 0.5) {
    std::array<double, 3> e{};
    // radial nodes from outside in, so the ray continuation moves monotonically
    for (std::size_t q = gx.size(); q-- > 0;) {
      const double r = 0.75 * eps + 0.25 * eps * gx[q];
      const double wr = 0.25 * eps * gw[q];
      try {
        ray = continue_fiber(engine, cand.xi0 + ray_r, cand.xi0 + r, cand.p, ray);
      } catch (const Error& err) {
        fail(ErrorKind::NumericalFailure, std::string("monodromy: branch point inside contour (") + err.what() + ")");
      }
      ray_r = r;
      const auto path = detail::track_circle(engine, cand.xi0, r, ray, cand.p, opt.energy_angular, turns);
      for (std::size_t k = 0; k < opt.energy_angular * turns; ++k) {
        const cplx x = cand.xi0 + std::polar(r, kTwoPi * static_cast<double>(k) / static_cast<double>(opt.energy_angular));
        for (int l = 0; l < 3; ++l) {
          const auto g = recover_form_quotient(engine, l, x, path[k]);
          e[static_cast<std::size_t>(l)] += std::norm(g[j]) * r * wr * kTwoPi / static_cast<double>(opt.energy_angular);
        }
      }
    }
    for (int l = 0; l < 3; ++l) {
      out[static_cast<std::size_t>(l)].radii.push_back(eps);
      out[static_cast<std::size_t>(l)].contributions.push_back(e[static_cast<std::size_t>(l)]);
      out[static_cast<std::size_t>(l)].total += e[static_cast<std::size_t>(l)];
    }
  }
  for (auto& g : out) {
    const double peak = *std::max_element(g.contributions.begin(), g.contributions.end());
    if (peak <= 1e-24) {
      g.verdict = EnergyVerdict::Convergent;
      continue;
    }
    bool flat = true, shrinking = true;
    for (std::size_t k = 1; k < g.contributions.size(); ++k) {
      const double ratio = g.contributions[k] / g.contributions[k - 1];
      g.ratios.push_back(ratio);
      if (ratio < 0.8 || ratio > 1.25) flat = false;
      if (!(ratio < 0.8)) shrinking = false;
    }
    g.verdict = flat ? EnergyVerdict::Divergent : shrinking ? EnergyVerdict::Convergent : EnergyVerdict::Undetermined;
  }
  return out;
}

/// Residues and energy growth on every branch of a candidate.
inline SingularPointReport analyze_singular_point(const CauchyMoments& engine, const SingularCandidate& cand,
                                                  const NodeOptions& opt = {}) {
  SingularPointReport rep;
  rep.point = cand;
  for (std::size_t b = 0; b < cand.branches.size(); ++b) {
    BranchAnalysis a;
    a.residue = branch_residues(engine, cand, b, opt.quadrature);
    a.energy = dirichlet_energy_growth(engine, cand, b, opt);
    rep.branches.push_back(std::move(a));
  }
  return rep;
}

struct RecoveredNode {
  std::size_t point = 0;               // index into NodeInventory::reports
  std::vector<std::size_t> branches;   // branch indices within that report
  std::array<std::vector<cplx>, 3> charges;
  cplx h, xi0;
};

struct NodeInventory {
  std::vector<SingularPointReport> reports;
  std::vector<RecoveredNode> nodes;
  std::vector<std::size_t> spurious_points;  // reports with no node branch
  double tau_res = 0.0;
  std::array<bool, 3> generic{true, true, true};
  bool partition_unique = true;
  bool unique = true;
  std::string isomorphism = "unique";  // or "roughly isomorphic"
  std::vector<std::array<std::vector<Partition>, 3>> partitions_explored;  // [report][l]
  std::vector<std::string> notes;
};

/// Classifies branches (node-branch iff some |residue| > tau_res), groups
/// node branches into nodes by zero-sum partitions consistent across l, and
/// reports genericity and the uniqueness class.
inline NodeInventory classify_and_partition(std::vector<SingularPointReport> reports, const NodeOptions& opt = {}) {
  NodeInventory inv;
  double rmax = 0.0;
  for (const auto& r : reports)
    for (const auto& b : r.branches)
      for (const auto& c : b.residue) rmax = std::max(rmax, std::abs(c));
  inv.tau_res = std::max(1e-4 * rmax, opt.tau_res_floor);

  for (auto& r : reports) {
    for (auto& b : r.branches) {
      bool charged = false, divergent = false, energy_known = false;
      for (int l = 0; l < 3; ++l) {
        if (std::abs(b.residue[static_cast<std::size_t>(l)]) > inv.tau_res) charged = true;
        const auto& e = b.energy[static_cast<std::size_t>(l)];
        if (!e.contributions.empty()) energy_known = true;
        if (e.verdict == EnergyVerdict::Divergent) divergent = true;
      }
      b.diagnostics_agree = !energy_known || charged == divergent;
      if (!b.diagnostics_agree) {
        b.cls = BranchClass::Undetermined;
        b.note = "residue and energy diagnostics disagree";
      } else {
        b.cls = charged ? BranchClass::NodeBranch : BranchClass::Spurious;
        if (!charged) b.note = "zero residues for every l: spurious, or a node branch undetectable by this method";
      }
    }
  }

  for (std::size_t ri = 0; ri < reports.size(); ++ri) {
    const auto& r = reports[ri];
    std::vector<std::size_t> nb;
    for (std::size_t b = 0; b < r.branches.size(); ++b) {
      if (r.branches[b].cls == BranchClass::NodeBranch) nb.push_back(b);
      if (r.branches[b].cls == BranchClass::NodeBranch && r.point.branches[b].cycle_length() > 1)
        inv.notes.push_back("point " + std::to_string(ri) + ": charged branch ramified over xi (node at a branch point of the projection) is unsupported");
    }
    std::array<std::vector<Partition>, 3> explored;
    if (nb.empty()) {
      inv.spurious_points.push_back(ri);
      inv.partitions_explored.push_back(explored);
      continue;
    }
    // per-l finest zero-sum partitions over the node branches
    std::vector<std::vector<Partition>> per_l;
    for (int l = 0; l < 3; ++l) {
      std::vector<cplx> res;
      double lmax = 0.0;
      for (const auto b : nb) {
        res.push_back(r.branches[b].residue[static_cast<std::size_t>(l)]);
        lmax = std::max(lmax, std::abs(res.back()));
      }
      if (lmax <= inv.tau_res) continue;  // no information from this family
      PartitionResult pr;
      try {
        pr = finest_zero_sum_partition(res, inv.tau_res);
      } catch (const Error&) {
        std::ostringstream os;
        os << "point " << ri << ", l = " << l << ": node residues do not sum to zero";
        fail(ErrorKind::Inconsistent, os.str());
      }
      explored[static_cast<std::size_t>(l)] = pr.partitions;
      per_l.push_back(pr.partitions);
    }
    inv.partitions_explored.push_back(explored);
    std::vector<Partition> common = per_l.front();
    for (std::size_t k = 1; k < per_l.size(); ++k) {
      std::vector<Partition> keep;
      for (const auto& p : common)
        if (std::find(per_l[k].begin(), per_l[k].end(), p) != per_l[k].end()) keep.push_back(p);
      common = std::move(keep);
    }
    if (common.empty()) {
      auto show = [](const Partition& p) {
        std::ostringstream os;
        os << "{";
        for (std::size_t g = 0; g < p.size(); ++g) {
          os << (g ? " " : "") << "(";
          for (std::size_t i = 0; i < p[g].size(); ++i) os << (i ? "," : "") << p[g][i];
          os << ")";
        }
        os << "}";
        return os.str();
      };
      std::ostringstream os;
      os << "point " << ri << ": node partitions differ across l: " << show(per_l.front().front());
      for (std::size_t k = 1; k < per_l.size(); ++k) os << " vs " << show(per_l[k].front());
      fail(ErrorKind::Inconsistent, os.str());
    }
    if (common.size() > 1) {
      inv.partition_unique = false;
      inv.notes.push_back("point " + std::to_string(ri) + ": " + std::to_string(common.size()) +
                          " admissible groupings of node branches");
    }
    for (const auto& group : common.front()) {
      RecoveredNode n;
      n.point = ri;
      n.h = r.point.h;
      n.xi0 = r.point.xi0;
      for (const auto i : group) n.branches.push_back(nb[i]);
      for (int l = 0; l < 3; ++l)
        for (const auto b : n.branches) n.charges[static_cast<std::size_t>(l)].push_back(r.branches[b].residue[static_cast<std::size_t>(l)]);
      inv.nodes.push_back(std::move(n));
    }
  }
  bool any_generic = false;
  for (int l = 0; l < 3; ++l) {
    AdmissibleFamily fam;
    for (const auto& n : inv.nodes) fam.charges.push_back(n.charges[static_cast<std::size_t>(l)]);
    bool generic = true;
    if (!fam.charges.empty()) {
      double scale = 0.0;
      for (const auto& g : fam.charges)
        for (const auto& c : g) scale = std::max(scale, std::abs(c));
      const double rel = std::max(1e-9, inv.tau_res / std::max(scale, 1e-300));
      // recovered charges are zero-sum only to tau_res; genericity up to the same tolerance
      for (auto& g : fam.charges) {
        cplx s = 0.0;
        for (const auto& c : g) s += c;
        g.back() -= s;
      }
      generic = is_generic_family(fam, rel).generic;
    }
    inv.generic[static_cast<std::size_t>(l)] = generic;
    any_generic = any_generic || generic;
  }
  inv.unique = inv.partition_unique && (inv.nodes.empty() || any_generic);
  inv.isomorphism = inv.unique ? "unique" : "roughly isomorphic";
  inv.reports = std::move(reports);
  return inv;
}

/// Full singularity analysis of a reconstructed curve.
inline NodeInventory find_nodes(const CauchyMoments& engine, const ReconstructedCurve& curve,
                                const NodeOptions& opt = {}) {
  const auto cands = locate_singularities(engine, curve, opt);
  std::vector<SingularPointReport> reports(cands.size());
  std::vector<std::string> errors(cands.size());
  auto work = [&](std::size_t i) {
    try {
      reports[i] = analyze_singular_point(engine, cands[i], opt);
    } catch (const Error& e) {
      errors[i] = e.what();
      reports[i].point = cands[i];
    }
  };
  const unsigned jobs = std::max(1u, opt.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < cands.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < cands.size(); i += jobs) work(i);
      });
    for (auto& th : pool) th.join();
  }
  std::vector<SingularPointReport> ok;
  std::vector<std::string> notes;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!errors[i].empty()) {
      notes.push_back("candidate at xi = " + std::to_string(cands[i].xi0.real()) + "+" +
                      std::to_string(cands[i].xi0.imag()) + "i skipped: " + errors[i]);
      continue;
    }
    if (!cands[i].note.empty()) notes.push_back(cands[i].note);
    ok.push_back(std::move(reports[i]));
  }
  auto inv = classify_and_partition(std::move(ok), opt);
  inv.notes.insert(inv.notes.begin(), notes.begin(), notes.end());
  return inv;
}

}  // namespace nodal_idn
