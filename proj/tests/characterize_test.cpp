#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "nodal_idn/characterize.hpp"

using namespace nodal_idn;

namespace {

ShockWindow four_window() {
  ShockWindow w;
  w.xi0_center = -4.0;
  w.radius = 0.05;
  w.delta = 1e-3;
  return w;
}

DNDatum corrupted(DNDatum d) {
  for (auto& v : d.f1) v += 0.1 * std::conj(v);
  return d;
}

// f = (z, z): the image lies in the line y1 = y2
DNDatum flat_datum() {
  const std::array<std::function<cplx(cplx)>, 3> forms = {
      [](cplx) { return cplx(1.0); }, [](cplx z) { return z; }, [](cplx z) { return z; }};
  return build_dn_datum(fixtures::disk(1.0, 256), fixtures::no_charges(), forms);
}

std::array<std::vector<std::vector<cplx>>, 3> four_charges() {
  return {std::vector<std::vector<cplx>>{{1.0, -1.0}}, {{2.0, -2.0}}, {{3.0, -3.0}}};
}

}  // namespace

TEST(ComputeG, GraphExample) {
  EXPECT_NEAR(std::abs(compute_G(fixtures::graph(), -0.25, 0.0) - 0.0625), 0.0, 1e-12);
}

TEST(ComputeG, ZeroFirstCoordinateGivesZero) {
  auto d = fixtures::graph();
  d.f1.assign(d.f1.size(), 0.0);
  EXPECT_EQ(compute_G(d, -0.3, 0.2), cplx(0.0));
}

TEST(ComputeG, FourSheetMatchesPencilRootOracle) {
  const auto d = fixtures::four_sheet();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    const cplx xi0(-3.6 + u(rng), u(rng)), xi1(u(rng), u(rng));
    // roots of xi0 + xi1 f1 + f2 inside the disk
    oracles::Poly F = fixtures::four_f2_poly;
    for (std::size_t k = 0; k < fixtures::four_f1_poly.size(); ++k) F[k] += xi1 * fixtures::four_f1_poly[k];
    F[0] += xi0;
    cplx expect = 0.0;
    for (const auto& z : oracles::fiber_oracle(F, 0.0, 1.5)) expect += fixtures::four_f1(z);
    EXPECT_LT(std::abs(compute_G(d, xi0, xi1) - expect), 1e-9) << xi0 << " " << xi1;
  }
}

TEST(ComputeG, ReducesToFirstMomentOnAxis) {
  for (const auto& d : {fixtures::graph(), fixtures::four_sheet(), fixtures::spurious()}) {
    const CauchyMoments e(d);
    for (const cplx xi : {cplx(0.3, 0.1), cplx(-0.2, 0.05)}) {
      if (e.distance_to_image(xi) <= e.exclusion_distance()) continue;
      EXPECT_LT(std::abs(compute_G(d, -xi, 0.0) - e.moment(1, xi)), 1e-9);
    }
  }
  EXPECT_THROW(compute_G(fixtures::graph(), -1.0, 0.0), Error);
}

TEST(ShockResidual, ValidDatumSecondOrder) {
  const auto r = shock_residual(fixtures::four_sheet(), four_window());
  EXPECT_EQ(r.p, 4);
  EXPECT_LT(r.shock, 1e-5);
  EXPECT_LT(r.flat, 1e-5);
  EXPECT_NEAR(r.shock_order_ratio, 4.0, 0.8);
  EXPECT_GT(r.g_curvature, 1e-8);
  EXPECT_EQ(r.G.size(), 25u * 9u);
}

TEST(ShockResidual, CorruptedDatumFails) {
  EXPECT_GT(shock_residual(corrupted(fixtures::four_sheet()), four_window()).shock, 1e-2);
}

TEST(ShockResidual, EmptyFiberWindow) {
  ShockWindow w;
  w.xi0_center = -20.0;
  w.radius = 0.5;
  const auto r = shock_residual(fixtures::four_sheet(), w);
  EXPECT_EQ(r.p, 0);
  EXPECT_EQ(r.shock, 0.0);
  EXPECT_LT(r.flat, 1e-5);
}

TEST(ShockResidual, GraphAndFlatData) {
  ShockWindow w;
  w.xi0_center = -0.2;
  const auto g = shock_residual(fixtures::graph(), w);
  EXPECT_EQ(g.p, 1);
  EXPECT_LT(g.shock, 1e-5);
  EXPECT_GT(g.g_curvature, 1.0);
  w.xi0_center = -0.3;
  const auto f = shock_residual(flat_datum(), w);
  EXPECT_LT(f.g_curvature, 1e-8);
  EXPECT_LT(f.shock, 1e-5);
}

TEST(GreenIdentity, TrueChargesSatisfyIdentity) {
  const auto d = fixtures::four_sheet();
  const auto dom = DomainDescriptor::disk(1.5);
  const auto probes = green_probes(dom, 20);
  const auto r = green_identity_residual(d, dom, {{1.0, -1.0}}, four_charges(), probes);
  EXPECT_EQ(r.probes.size(), 20u);
  EXPECT_LT(r.max_residual, 1e-6);
  EXPECT_TRUE(r.charges_zero_sum);
}

TEST(GreenIdentity, PerturbedChargeIsDetectedLinearly) {
  const auto d = fixtures::four_sheet();
  const auto dom = DomainDescriptor::disk(1.5);
  const auto probes = green_probes(dom, 20);
  const auto base = green_identity_residual(d, dom, {{1.0, -1.0}}, four_charges(), probes);
  auto ch = four_charges();
  ch[0][0][0] += 0.1;
  const auto pert = green_identity_residual(d, dom, {{1.0, -1.0}}, ch, probes);
  EXPECT_GT(pert.max_residual, 1e-2);
  EXPECT_FALSE(pert.charges_zero_sum);
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const cplx expected = 0.1 * 2.0 * kTwoPi * disk_green(1.0, probes[k], 1.875);
    EXPECT_LT(std::abs((pert.defect[0][k] - base.defect[0][k]) - expected), 1e-8);
    EXPECT_LT(std::abs(pert.defect[1][k] - base.defect[1][k]), 1e-12);
  }
}

TEST(GreenIdentity, ZeroDatumGivesZero) {
  auto d = fixtures::graph();
  for (int l = 0; l < 3; ++l) {
    d.u[l].assign(d.size(), 0.0);
    d.theta[l].assign(d.size(), 0.0);
  }
  const auto dom = DomainDescriptor::disk(1.0);
  const auto r = green_identity_residual(d, dom, {}, {}, green_probes(dom, 20));
  EXPECT_EQ(r.max_residual, 0.0);
}

TEST(GreenIdentity, ChargeFreeDataAndEllipseGuess) {
  const auto sp = fixtures::spurious();
  const auto dom = DomainDescriptor::disk(1.5);
  EXPECT_LT(green_identity_residual(sp, dom, {}, {}, green_probes(dom, 20)).max_residual, 1e-6);

  const auto model = NodalDomainModel{DomainDescriptor::ellipse(1.3, 0.9), BoundaryCurve::ellipse(1.3, 0.9, 256), {}, {}};
  const std::array<std::function<cplx(cplx)>, 3> forms = {
      [](cplx) { return cplx(1.0); }, [](cplx z) { return z * z; }, [](cplx z) { return z; }};
  const auto d = build_dn_datum(model, fixtures::no_charges(), forms);
  EXPECT_LT(green_identity_residual(d, model.domain, {}, {}, green_probes(model.domain, 10)).max_residual, 1e-6);
}

TEST(GreenIdentity, BadProbesAndDomains) {
  const auto d = fixtures::graph();
  const auto dom = DomainDescriptor::disk(1.0);
  EXPECT_THROW(green_identity_residual(d, dom, {}, {}, {cplx(0.5)}), Error);
  EXPECT_THROW(green_identity_residual(d, dom, {}, {}, {cplx(1.0)}), Error);
  EXPECT_THROW(green_identity_residual(d, DomainDescriptor::annulus(0.5, 1.0), {}, {}, {cplx(1.1)}), Error);
}

TEST(OrientationProbe, SpecExamples) {
  const auto d = fixtures::four_sheet();
  const auto fwd = orientation_probe(d, four_window());
  EXPECT_EQ(fwd.verdict, Orientation::Gamma);
  EXPECT_TRUE(fwd.forward_passes);
  EXPECT_FALSE(fwd.reversed_passes);
  EXPECT_EQ(orientation_probe(d.reversed(), four_window()).verdict, Orientation::ReversedGamma);

  ShockWindow w;
  w.xi0_center = -0.3;
  const auto flat = orientation_probe(flat_datum(), w);
  EXPECT_EQ(flat.verdict, Orientation::AlgebraicAmbiguous);
  EXPECT_TRUE(flat.forward.has_value());

  EXPECT_THROW(orientation_probe(corrupted(d), four_window()), Error);
}

TEST(Characterize, ValidCorruptedAndReversed) {
  const auto d = fixtures::four_sheet();
  GreenCheckInput g{DomainDescriptor::disk(1.5), {{1.0, -1.0}}, four_charges()};
  const auto ok = characterize(d, four_window(), g);
  EXPECT_TRUE(ok.passed) << (ok.failures.empty() ? "" : ok.failures.front());
  EXPECT_FALSE(characterize(corrupted(d), four_window()).passed);
  const auto rev = characterize(d.reversed(), four_window());
  EXPECT_TRUE(rev.passed);
  EXPECT_EQ(rev.orientation->verdict, Orientation::ReversedGamma);
}
