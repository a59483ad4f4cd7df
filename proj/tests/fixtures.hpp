#pragma once

// Shared test data: the graph, charged four-sheet and spurious examples.

#include <array>
#include <functional>

#include "nodal_idn/dirichlet.hpp"
#include "nodal_idn/oracles.hpp"

namespace fixtures {

using nodal_idn::AdmissibleFamily;
using nodal_idn::cplx;

inline nodal_idn::NodalDomainModel disk(double r, std::size_t n,
                                        std::vector<std::vector<cplx>> groups = {}) {
  return {nodal_idn::DomainDescriptor::disk(r), nodal_idn::BoundaryCurve::circle(r, n), std::move(groups), {}};
}

inline std::array<AdmissibleFamily, 3> no_charges() { return {}; }

// w = (1, z^2, z) on the unit circle: f = (z^2, z).
inline nodal_idn::DNDatum graph(std::size_t n = 256) {
  const std::array<std::function<cplx(cplx)>, 3> forms = {
      [](cplx) { return cplx(1.0); }, [](cplx z) { return z * z; }, [](cplx z) { return z; }};
  return nodal_idn::build_dn_datum(disk(1.0, n), no_charges(), forms);
}

inline cplx four_w0(cplx z) { return 1.0 / (z - 1.0) - 1.0 / (z + 1.0); }
inline cplx four_f1(cplx z) { return 2.0 + z * z * z - z; }
inline cplx four_f2(cplx z) { return 3.0 + z * z * z * z - z * z; }
inline const nodal_idn::oracles::Poly four_f1_poly = {2.0, -1.0, 0.0, 1.0};
inline const nodal_idn::oracles::Poly four_f2_poly = {3.0, 0.0, -1.0, 0.0, 1.0};

inline std::array<AdmissibleFamily, 3> four_families() {
  return {AdmissibleFamily{{{1.0, -1.0}}}, AdmissibleFamily{{{2.0, -2.0}}}, AdmissibleFamily{{{3.0, -3.0}}}};
}

// Charged example on |z| < 1.5: f = (2 + z^3 - z, 3 + z^4 - z^2), node {1, -1}.
inline nodal_idn::DNDatum four_sheet(std::size_t n = 512) {
  const std::array<std::function<cplx(cplx)>, 3> forms = {
      four_w0, [](cplx z) { return four_f1(z) * four_w0(z); },
      [](cplx z) { return four_f2(z) * four_w0(z); }};
  return nodal_idn::build_dn_datum(disk(1.5, n, {{1.0, -1.0}}), four_families(), forms);
}

// f = (z^2 - 1, z^3 - z) on |z| < 1.5, no charges: f(1) = f(-1) = (0, 0).
inline nodal_idn::DNDatum spurious(std::size_t n = 512) {
  const std::array<std::function<cplx(cplx)>, 3> forms = {
      [](cplx) { return cplx(1.0); }, [](cplx z) { return z * z - 1.0; },
      [](cplx z) { return z * z * z - z; }};
  return nodal_idn::build_dn_datum(disk(1.5, n), no_charges(), forms);
}

}  // namespace fixtures
