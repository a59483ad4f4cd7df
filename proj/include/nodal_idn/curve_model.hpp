#pragma once

// Planar model domains, nodal identifications and charge families.

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "nodal_idn/core.hpp"
#include "nodal_idn/spectral.hpp"

namespace nodal_idn {

/// Sampled closed oriented curve t -> gamma(t), t_k = 2*pi*k/N.
class BoundaryCurve {
 public:
  BoundaryCurve() = default;

  BoundaryCurve(ComplexSamples positions, ComplexSamples derivatives, int orientation = 1)
      : pos_(std::move(positions)), der_(std::move(derivatives)), orientation_(orientation) {
    require(!pos_.empty() && pos_.size() % 2 == 0, ErrorKind::InvalidInput,
            "BoundaryCurve: sample count must be a positive even integer");
    require(pos_.size() == der_.size(), ErrorKind::InvalidInput,
            "BoundaryCurve: positions/derivatives size mismatch");
    require(orientation_ == 1 || orientation_ == -1, ErrorKind::InvalidInput,
            "BoundaryCurve: orientation must be +1 or -1");
  }

  static BoundaryCurve from_function(const std::function<cplx(double)>& gamma,
                                     const std::function<cplx(double)>& dgamma, std::size_t n) {
    ComplexSamples p(n), d(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = parameter(k, n);
      p[k] = gamma(t);
      d[k] = dgamma(t);
    }
    return BoundaryCurve(std::move(p), std::move(d), 1);
  }

  /// Derivatives come from spectral differentiation of the positions.
  static BoundaryCurve from_samples(ComplexSamples positions, int orientation = 1) {
    auto d = spectral::differentiate(positions);
    return BoundaryCurve(std::move(positions), std::move(d), orientation);
  }

  static BoundaryCurve circle(double radius, std::size_t n, cplx center = 0.0) {
    return from_function([=](double t) { return center + std::polar(radius, t); },
                         [=](double t) { return kI * std::polar(radius, t); }, n);
  }

  static BoundaryCurve ellipse(double a, double b, std::size_t n) {
    return from_function([=](double t) { return cplx(a * std::cos(t), b * std::sin(t)); },
                         [=](double t) { return cplx(-a * std::sin(t), b * std::cos(t)); }, n);
  }

  static double parameter(std::size_t k, std::size_t n) {
    return kTwoPi * static_cast<double>(k) / static_cast<double>(n);
  }

  std::size_t size() const noexcept { return pos_.size(); }
  const ComplexSamples& positions() const noexcept { return pos_; }
  const ComplexSamples& derivatives() const noexcept { return der_; }
  int orientation() const noexcept { return orientation_; }
  double step() const noexcept { return kTwoPi / static_cast<double>(size()); }

  cplx tangent(std::size_t k) const { return der_[k] / std::abs(der_[k]); }
  // (normal, tangent) is positively oriented: normal = -i * tangent.
  cplx normal(std::size_t k) const { return -kI * tangent(k); }

  double max_speed() const {
    double m = 0.0;
    for (const auto& d : der_) m = std::max(m, std::abs(d));
    return m;
  }

  /// Signed curvature at every sample (second derivative by spectral
  /// differentiation of the supplied first derivative).
  std::vector<double> curvature() const {
    const auto dd = spectral::differentiate(der_);
    std::vector<double> k(size());
    for (std::size_t j = 0; j < size(); ++j)
      k[j] = std::imag(std::conj(der_[j]) * dd[j]) / std::pow(std::abs(der_[j]), 3);
    return k;
  }

  /// Same point set traversed backwards; sample 0 is kept fixed.
  BoundaryCurve reversed() const {
    const std::size_t n = size();
    ComplexSamples p(n), d(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t src = (n - k) % n;
      p[k] = pos_[src];
      d[k] = -der_[src];
    }
    return BoundaryCurve(std::move(p), std::move(d), -orientation_);
  }

  /// Spectral upsampling by an integer factor.
  BoundaryCurve refined(std::size_t factor) const {
    if (factor <= 1) return *this;
    return BoundaryCurve(spectral::interpolate(pos_, size() * factor),
                         spectral::interpolate(der_, size() * factor), orientation_);
  }

  /// Distance from z to the sampled point set.
  double distance_to(cplx z) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : pos_) m = std::min(m, std::abs(p - z));
    return m;
  }

  /// Winding number of the sampled polygon around z (0 outside, +-1 inside).
  int winding_number(cplx z) const {
    double total = 0.0;
    const std::size_t n = size();
    for (std::size_t k = 0; k < n; ++k)
      total += std::arg((pos_[(k + 1) % n] - z) / (pos_[k] - z));
    return static_cast<int>(std::lround(total / kTwoPi));
  }

  /// Checks the type invariants; throws with a description on failure.
  void validate(std::size_t check_spectral_from = 128) const {
    const std::size_t n = size();
    double min_speed = std::numeric_limits<double>::infinity();
    for (const auto& d : der_) min_speed = std::min(min_speed, std::abs(d));
    require(min_speed > 0.0, ErrorKind::InvalidInput, "BoundaryCurve: vanishing derivative");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        require(pos_[i] != pos_[j], ErrorKind::InvalidInput,
                "BoundaryCurve: repeated sample position");
    // polygon simplicity: non-adjacent edges must not intersect
    auto cross = [](cplx a, cplx b) { return std::imag(std::conj(a) * b); };
    for (std::size_t i = 0; i < n; ++i) {
      const cplx a0 = pos_[i], a1 = pos_[(i + 1) % n];
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        const cplx b0 = pos_[j], b1 = pos_[(j + 1) % n];
        const double d1 = cross(a1 - a0, b0 - a0), d2 = cross(a1 - a0, b1 - a0);
        const double d3 = cross(b1 - b0, a0 - b0), d4 = cross(b1 - b0, a1 - b0);
        if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) {
          std::ostringstream os;
          os << "BoundaryCurve: self-intersection between edges " << i << " and " << j;
          fail(ErrorKind::InvalidInput, os.str());
        }
      }
    }
    if (n >= check_spectral_from) {
      const auto d = spectral::differentiate(pos_);
      const double rel = sup_distance(d, der_) / max_speed();
      require(rel < 1e-8, ErrorKind::InvalidInput,
              "BoundaryCurve: derivatives inconsistent with spectral differentiation");
    }
  }

 private:
  ComplexSamples pos_;
  ComplexSamples der_;
  int orientation_ = 1;
};

enum class DomainKind { Disk, Ellipse, Annulus };

/// Planar model domain. Disk and ellipse are centered at the origin.
struct DomainDescriptor {
  DomainKind kind = DomainKind::Disk;
  double radius = 1.0;        // disk radius, annulus outer radius
  double inner_radius = 0.0;  // annulus only
  double semi_a = 1.0;        // ellipse
  double semi_b = 1.0;

  static DomainDescriptor disk(double r) { return {DomainKind::Disk, r, 0.0, r, r}; }
  static DomainDescriptor ellipse(double a, double b) {
    return {DomainKind::Ellipse, std::max(a, b), 0.0, a, b};
  }
  static DomainDescriptor annulus(double r_in, double r_out) {
    return {DomainKind::Annulus, r_out, r_in, r_out, r_out};
  }

  /// Scale used for margins: outer radius / largest semi-axis.
  double scale() const { return radius; }

  bool contains(cplx z, double margin = 0.0) const {
    switch (kind) {
      case DomainKind::Disk:
        return std::abs(z) < radius - margin;
      case DomainKind::Annulus:
        return std::abs(z) < radius - margin && std::abs(z) > inner_radius + margin;
      case DomainKind::Ellipse: {
        // conservative: shrink both semi-axes by the margin
        const double a = semi_a - margin, b = semi_b - margin;
        if (a <= 0 || b <= 0) return false;
        return std::norm(cplx(z.real() / a, z.imag() / b)) < 1.0;
      }
    }
    return false;
  }

  /// Outer boundary sampled counterclockwise.
  BoundaryCurve boundary(std::size_t n) const {
    switch (kind) {
      case DomainKind::Disk:
      case DomainKind::Annulus:
        return BoundaryCurve::circle(radius, n);
      case DomainKind::Ellipse:
        return BoundaryCurve::ellipse(semi_a, semi_b, n);
    }
    return BoundaryCurve::circle(radius, n);
  }
};

struct AuxiliaryPole {
  cplx point;
  cplx residue;
};

/// Model domain with node groups: each group lists the interior points that
/// are identified into one node.
struct NodalDomainModel {
  DomainDescriptor domain;
  BoundaryCurve boundary;
  std::vector<std::vector<cplx>> node_groups;
  std::vector<AuxiliaryPole> auxiliary_poles;

  std::size_t point_count() const {
    std::size_t n = 0;
    for (const auto& g : node_groups) n += g.size();
    return n;
  }

  std::vector<cplx> all_points() const {
    std::vector<cplx> pts;
    for (const auto& g : node_groups) pts.insert(pts.end(), g.begin(), g.end());
    return pts;
  }

  void validate() const {
    const double margin = 0.05 * domain.scale();
    std::vector<cplx> seen;
    for (std::size_t gi = 0; gi < node_groups.size(); ++gi) {
      const auto& g = node_groups[gi];
      require(g.size() >= 2, ErrorKind::InvalidInput,
              "NodalDomainModel: node group " + std::to_string(gi) + " has fewer than 2 points");
      for (const auto& p : g) {
        require(domain.contains(p, margin), ErrorKind::InvalidInput,
                "NodalDomainModel: node point not interior (group " + std::to_string(gi) + ")");
        for (const auto& q : seen)
          require(std::abs(p - q) > 0.0, ErrorKind::InvalidInput,
                  "NodalDomainModel: repeated node point");
        seen.push_back(p);
      }
    }
    cplx total{0.0, 0.0};
    for (const auto& a : auxiliary_poles) total += a.residue;
    require(std::abs(total) <= 1e-12, ErrorKind::InvalidInput,
            "NodalDomainModel: auxiliary pole residues do not sum to zero");
  }
};

/// Charges aligned with NodalDomainModel::node_groups.
struct AdmissibleFamily {
  std::vector<std::vector<cplx>> charges;

  static AdmissibleFamily zeros_like(const NodalDomainModel& model) {
    AdmissibleFamily f;
    for (const auto& g : model.node_groups) f.charges.emplace_back(g.size(), cplx{0.0, 0.0});
    return f;
  }

  std::size_t point_count() const {
    std::size_t n = 0;
    for (const auto& g : charges) n += g.size();
    return n;
  }

  std::vector<cplx> flat() const {
    std::vector<cplx> out;
    for (const auto& g : charges) out.insert(out.end(), g.begin(), g.end());
    return out;
  }

  bool is_admissible() const {
    for (const auto& g : charges) {
      cplx s{0.0, 0.0};
      double m = 0.0;
      for (const auto& c : g) {
        s += c;
        m = std::max(m, std::abs(c));
      }
      if (std::abs(s) > 1e-12 * m) return false;
    }
    return true;
  }

  void validate_against(const NodalDomainModel& model) const {
    require(charges.size() == model.node_groups.size(), ErrorKind::InvalidInput,
            "AdmissibleFamily: group count does not match the model");
    for (std::size_t g = 0; g < charges.size(); ++g)
      require(charges[g].size() == model.node_groups[g].size(), ErrorKind::InvalidInput,
              "AdmissibleFamily: group " + std::to_string(g) + " size mismatch");
    require(is_admissible(), ErrorKind::InvalidInput,
            "AdmissibleFamily: per-node charges do not sum to zero");
  }
};

struct GenericityResult {
  bool generic = true;
  // one proper subset per group (indices into the group) whose total vanishes
  std::vector<std::vector<std::size_t>> witness;
};

/// Subset-sum genericity: no choice of proper subsets T_a of each group, not
/// all empty, has vanishing total charge. Exhaustive; at most 20 points.
inline GenericityResult is_generic_family(const AdmissibleFamily& family,
                                          double rel_tol = 1e-9) {
  require(family.is_admissible(), ErrorKind::InvalidInput,
          "is_generic_family: family is not admissible");
  require(family.point_count() <= 20, ErrorKind::InvalidInput,
          "is_generic_family: more than 20 identified points");
  const auto& groups = family.charges;
  double scale = 0.0;
  for (const auto& g : groups)
    for (const auto& c : g) scale = std::max(scale, std::abs(c));
  const double tol = rel_tol * (scale > 0.0 ? scale : 1.0);

  // per group: sums of all proper subsets (mask 0 .. 2^nu - 2, full mask excluded)
  std::vector<std::vector<cplx>> sums(groups.size());
  for (std::size_t a = 0; a < groups.size(); ++a) {
    const std::size_t nu = groups[a].size();
    const std::uint32_t full = (1u << nu) - 1u;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
      cplx s{0.0, 0.0};
      for (std::size_t j = 0; j < nu; ++j)
        if (mask & (1u << j)) s += groups[a][j];
      sums[a].push_back(s);
    }
  }
  std::vector<std::size_t> digit(groups.size(), 0);
  GenericityResult res;
  while (true) {
    // advance mixed-radix counter; start skips the all-empty choice
    std::size_t a = 0;
    for (; a < groups.size(); ++a) {
      if (++digit[a] < sums[a].size()) break;
      digit[a] = 0;
    }
    if (a == groups.size()) break;
    cplx total{0.0, 0.0};
    for (std::size_t b = 0; b < groups.size(); ++b) total += sums[b][digit[b]];
    if (std::abs(total) <= tol) {
      res.generic = false;
      for (std::size_t b = 0; b < groups.size(); ++b) {
        std::vector<std::size_t> subset;
        for (std::size_t j = 0; j < groups[b].size(); ++j)
          if (digit[b] & (1u << j)) subset.push_back(j);
        res.witness.push_back(std::move(subset));
      }
      return res;
    }
  }
  return res;
}

/// The pairwise-distinct-modulus condition |c_j| != |c_k| within every group.
/// Independent of the subset-sum predicate; neither is assumed to imply the other.
inline bool has_distinct_moduli(const AdmissibleFamily& family, double rel_tol = 1e-9) {
  for (const auto& g : family.charges) {
    double scale = 0.0;
    for (const auto& c : g) scale = std::max(scale, std::abs(c));
    for (std::size_t j = 0; j < g.size(); ++j)
      for (std::size_t k = j + 1; k < g.size(); ++k)
        if (std::abs(std::abs(g[j]) - std::abs(g[k])) <= rel_tol * scale) return false;
  }
  return true;
}

using Partition = std::vector<std::vector<std::size_t>>;

struct PartitionResult {
  std::vector<Partition> partitions;  // all finest partitions found
  bool unique = true;
  bool truncated = false;  // enumeration stopped at the result cap
};

namespace detail {

inline Partition normalized(Partition p) {
  for (auto& g : p) std::sort(g.begin(), g.end());
  std::sort(p.begin(), p.end());
  return p;
}

}  // namespace detail

/// Splits indexed residues into minimal nonempty zero-sum groups.
/// tol <= 0 selects 1e-6 * max |residue|.
inline PartitionResult finest_zero_sum_partition(std::span<const cplx> residues,
                                                 double tol = -1.0,
                                                 std::size_t max_results = 64) {
  const std::size_t n = residues.size();
  require(n >= 1, ErrorKind::InvalidInput, "finest_zero_sum_partition: empty input");
  require(n <= 16, ErrorKind::InvalidInput, "finest_zero_sum_partition: more than 16 points");
  double scale = 0.0;
  cplx total{0.0, 0.0};
  for (const auto& r : residues) {
    scale = std::max(scale, std::abs(r));
    total += r;
  }
  if (tol <= 0.0) tol = 1e-6 * (scale > 0.0 ? scale : 1.0);
  require(std::abs(total) <= tol, ErrorKind::InvalidInput,
          "finest_zero_sum_partition: not admissible within tolerance");

  const std::uint32_t full = (1u << n) - 1u;
  std::vector<cplx> sum(full + 1u, cplx{0.0, 0.0});
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const std::uint32_t low = mask & (~mask + 1u);
    const int bit = std::countr_zero(low);
    sum[mask] = sum[mask ^ low] + residues[static_cast<std::size_t>(bit)];
  }
  // Group tolerances scale with the group size so that sums of near-zero
  // groups stay classified as zero.
  auto is_zero = [&](std::uint32_t mask) {
    return std::abs(sum[mask]) <= tol * std::popcount(mask);
  };
  std::vector<std::uint32_t> minimal;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    if (!is_zero(mask)) continue;
    bool is_min = true;
    for (std::uint32_t sub = (mask - 1u) & mask; sub != 0; sub = (sub - 1u) & mask) {
      if (is_zero(sub)) {
        is_min = false;
        break;
      }
    }
    if (is_min) minimal.push_back(mask);
  }

  PartitionResult res;
  std::vector<std::uint32_t> chosen;
  std::function<void(std::uint32_t)> cover = [&](std::uint32_t covered) {
    if (res.partitions.size() >= max_results) {
      res.truncated = true;
      return;
    }
    if (covered == full) {
      Partition p;
      for (auto m : chosen) {
        std::vector<std::size_t> g;
        for (std::size_t j = 0; j < n; ++j)
          if (m & (1u << j)) g.push_back(j);
        p.push_back(std::move(g));
      }
      res.partitions.push_back(detail::normalized(std::move(p)));
      return;
    }
    const std::uint32_t first = (~covered) & (covered + 1u);  // lowest uncovered bit
    for (auto m : minimal) {
      if ((m & first) == 0u || (m & covered) != 0u) continue;
      chosen.push_back(m);
      cover(covered | m);
      chosen.pop_back();
    }
  };
  cover(0u);
  require(!res.partitions.empty(), ErrorKind::InvalidInput,
          "finest_zero_sum_partition: not admissible within tolerance");
  res.unique = res.partitions.size() == 1 && !res.truncated;
  return res;
}

/// True when every group of `coarse` is a union of groups of `fine`.
inline bool is_coarsening(const Partition& coarse, const Partition& fine) {
  for (const auto& fg : fine) {
    bool inside_one = false;
    for (const auto& cg : coarse) {
      const bool all = std::all_of(fg.begin(), fg.end(), [&](std::size_t i) {
        return std::find(cg.begin(), cg.end(), i) != cg.end();
      });
      if (all) {
        inside_one = true;
        break;
      }
    }
    if (!inside_one) return false;
  }
  return true;
}

}  // namespace nodal_idn
