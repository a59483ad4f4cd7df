#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "nodal_idn/moments.hpp"

using namespace nodal_idn;
namespace orc = nodal_idn::oracles;

namespace {

struct OracleFiber {
  std::vector<cplx> z, h;
};

OracleFiber four_fiber(cplx xi) {
  OracleFiber o;
  o.z = orc::fiber_oracle(fixtures::four_f2_poly, xi, 1.5);
  for (const auto& z : o.z) o.h.push_back(fixtures::four_f1(z));
  return o;
}

// distance between two point sets as multisets, by greedy matching
double set_distance(std::vector<cplx> a, std::vector<cplx> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](cplx p, cplx q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

}  // namespace

TEST(CauchyMoments, GraphExamples) {
  const auto d = fixtures::graph();
  EXPECT_NEAR(std::abs(compute_moment(d, 1, 0.3) - 0.09), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(compute_moment(d, 2, 0.5) - 0.0625), 0.0, 1e-12);
  const CauchyMoments e(d);
  for (const auto& xi : square_grid(0.0, 0.5, 5))
    for (int m = 0; m <= 6; ++m) EXPECT_LT(std::abs(e.moment(m, xi) - std::pow(xi, 2 * m)), 1e-10);
}

TEST(CauchyMoments, OnCurveEvaluationIsRejected) {
  const CauchyMoments e(fixtures::graph());
  try {
    e.moment(1, 1.0);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::Domain);
    EXPECT_NE(std::string(err.what()).find("on-curve"), std::string::npos);
  }
  EXPECT_THROW(e.moments(0.2, 33), Error);
}

TEST(CauchyMoments, FourSheetMatchesFiberOracle) {
  const CauchyMoments e(fixtures::four_sheet());
  for (const cplx xi : {cplx(3.1), cplx(3.1, 0.2), cplx(2.9, -0.3), cplx(3.5, 0.1)}) {
    const auto o = four_fiber(xi);
    const auto m = e.moments(xi, 8);
    for (int k = 0; k <= 8; ++k) {
      cplx s = 0.0;
      for (const auto& h : o.h) s += std::pow(h, k);
      EXPECT_LT(std::abs(m[k] - s), 1e-8 * std::max(1.0, std::abs(s))) << xi << " m=" << k;
    }
  }
}

TEST(CauchyMoments, QuadratureConvergesGeometrically) {
  // closest point to the unit circle that the exclusion zone admits at N = 1024
  const cplx xi = std::polar(0.974, 0.3);
  for (int m : {0, 1, 3}) {
    const double e1 = std::abs(compute_moment(fixtures::graph(1024), m, xi) - std::pow(xi, 2 * m));
    const double e2 = std::abs(compute_moment(fixtures::graph(2048), m, xi) - std::pow(xi, 2 * m));
    EXPECT_GT(e1, 1e-13);
    EXPECT_GT(e1 / std::max(e2, 1e-300), 100.0) << e1 << " " << e2;
  }
}

TEST(SheetCount, SpecExamples) {
  const CauchyMoments g(fixtures::graph());
  EXPECT_EQ(estimate_sheet_count(build_moment_table(g, 0.0, 0.2, 0)).p, 1);
  const CauchyMoments f(fixtures::four_sheet());
  const auto sc = estimate_sheet_count(build_moment_table(f, 3.1, 0.05, 0));
  EXPECT_EQ(sc.p, 4);
  EXPECT_EQ(sc.path, "integral moment");
  EXPECT_EQ(estimate_sheet_count(build_moment_table(f, 20.0, 0.5, 0)).p, 0);
}

TEST(SheetCount, WindowCrossingImageIsRejected) {
  const CauchyMoments g(fixtures::graph());
  try {
    build_moment_table(g, 1.0, 0.1, 2);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::Domain);
    EXPECT_NE(std::string(err.what()).find("crosses f2(gamma)"), std::string::npos);
  }
}

TEST(Elimination, BoundedRegimeIsIdentity) {
  const CauchyMoments f(fixtures::four_sheet());
  const double res = f.polynomial_part_residual(8);
  EXPECT_LT(res, 1e-9);
  const auto t = build_moment_table(f, 3.1, 0.05, 2);
  EliminationOptions opt;
  opt.exterior_residual = res;
  const auto r = eliminate_polynomial_part(t.xi, t.M[2], 2, opt);
  for (std::size_t i = 0; i < t.xi.size(); ++i) EXPECT_EQ(r.S[i], t.M[2][i]);
  opt.exterior_residual = 1e-3;
  EXPECT_THROW(eliminate_polynomial_part(t.xi, t.M[2], 2, opt), Error);
}

TEST(Elimination, GeneralRegimeSeparatesPolynomialAndPole) {
  const auto xi = square_grid(0.0, 0.5, 7);
  std::vector<cplx> m(xi.size()), zero(xi.size(), 0.0);
  for (std::size_t i = 0; i < xi.size(); ++i) m[i] = xi[i] + 1.0 / (xi[i] - 5.0);
  EliminationOptions opt;
  opt.regime = PolynomialRegime::General;
  opt.expansion_point = 5.0;
  opt.k = 4;
  const auto r = eliminate_polynomial_part(xi, m, 1, opt);
  EXPECT_LT(std::abs(r.P[0]), 1e-8);
  EXPECT_LT(std::abs(r.P[1] - 1.0), 1e-8);
  for (std::size_t i = 0; i < xi.size(); ++i) EXPECT_LT(std::abs(r.S[i] - 1.0 / (xi[i] - 5.0)), 1e-8);

  const auto z = eliminate_polynomial_part(xi, zero, 2, opt);
  for (const auto& c : z.P) EXPECT_LT(std::abs(c), 1e-14);
  for (const auto& s : z.S) EXPECT_LT(std::abs(s), 1e-14);

  opt.k = 40;
  try {
    eliminate_polynomial_part(xi, m, 1, opt);
    FAIL();
  } catch (const Error& err) {
    EXPECT_NE(std::string(err.what()).find("enlarge window or raise k"), std::string::npos);
  }
}

TEST(NewtonIdentities, SpecExamples) {
  const auto r = recover_fibers({3.0, 5.0});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(std::abs(r[0] - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r[1] - 2.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(recover_fibers({cplx(0.3, 0.1)})[0] - cplx(0.3, 0.1)), 0.0, 1e-15);
  EXPECT_THROW(recover_fibers({}), Error);
}

TEST(NewtonIdentities, RandomRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 1 + trial % 8;
    std::vector<cplx> h;
    while (static_cast<int>(h.size()) < p) {
      const cplx c(u(rng), u(rng));
      if (h.empty() || min_separation([&] { auto v = h; v.push_back(c); return v; }()) > 0.1) h.push_back(c);
    }
    std::vector<cplx> s(static_cast<std::size_t>(p));
    for (int m = 1; m <= p; ++m)
      for (const auto& x : h) s[static_cast<std::size_t>(m - 1)] += std::pow(x, m);
    EXPECT_LT(set_distance(recover_fibers(s), h), 1e-9) << "p=" << p;
  }
}

TEST(NewtonIdentities, FourSheetFiber) {
  const CauchyMoments f(fixtures::four_sheet());
  const cplx xi(3.1, 0.05);
  EXPECT_LT(set_distance(fiber_at(f, xi, 4), four_fiber(xi).h), 1e-8);
}

TEST(FormQuotient, MatchesClosedFormAtFiberPoints) {
  const CauchyMoments f(fixtures::four_sheet());
  const cplx xi(3.1, 0.05);
  const auto o = four_fiber(xi);
  const std::array<std::function<cplx(cplx)>, 3> scale = {
      [](cplx) { return cplx(1.0); }, fixtures::four_f1, fixtures::four_f2};
  for (int l = 0; l < 3; ++l) {
    const auto g = recover_form_quotient(f, l, xi, o.h);
    for (std::size_t j = 0; j < o.z.size(); ++j) {
      const cplx z = o.z[j];
      const cplx expect = scale[l](z) * fixtures::four_w0(z) / (4.0 * z * z * z - 2.0 * z);
      EXPECT_LT(std::abs(g[j] - expect), 1e-6 * std::max(1.0, std::abs(expect))) << l << " " << j;
    }
  }
  const CauchyMoments g(fixtures::graph());
  const auto q = recover_form_quotient(g, 0, 0.3, {0.09});
  EXPECT_NEAR(std::abs(q[0] - 1.0), 0.0, 1e-10);
}

TEST(FormQuotient, CollidingRootsAreRejected) {
  try {
    solve_vandermonde({0.5, 0.5 + 1e-9}, {1.0, 1.0});
    FAIL();
  } catch (const Error& err) {
    EXPECT_NE(std::string(err.what()).find("near branch point: move xi"), std::string::npos);
  }
}

TEST(Continuation, SerpentineOrderVisitsEveryPointWithUnitSteps) {
  const auto o = serpentine_order(4);
  ASSERT_EQ(o.size(), 16u);
  for (std::size_t i = 1; i < o.size(); ++i) {
    const long a = static_cast<long>(o[i - 1]), b = static_cast<long>(o[i]);
    EXPECT_EQ(std::abs(a / 4 - b / 4) + std::abs(a % 4 - b % 4), 1);
  }
}

TEST(Continuation, LabelsFollowSheetsAroundLoop) {
  const CauchyMoments f(fixtures::four_sheet());
  const cplx xi0(3.3, 0.0);
  const auto start = fiber_at(f, xi0, 4);
  auto cur = start;
  // a small loop away from every branch value returns each label to itself
  for (int k = 1; k <= 16; ++k)
    cur = continue_fiber(f, xi0 + 0.05 * (std::polar(1.0, kTwoPi * (k - 1) / 16.0) - 1.0),
                         xi0 + 0.05 * (std::polar(1.0, kTwoPi * k / 16.0) - 1.0), 4, cur);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_LT(std::abs(cur[j] - start[j]), 1e-8);
}

TEST(CauchyRiemann, HolomorphicAndNonHolomorphicFields) {
  const auto pts = square_grid(0.0, 0.5, 5);
  EXPECT_LT(cauchy_riemann_residual([](cplx z) { return z * z * z; }, pts, 1e-4), 1e-7);
  EXPECT_GT(cauchy_riemann_residual([](cplx z) { return std::conj(z); }, pts, 1e-4), 0.5);
}

TEST(WindowSweep, GraphWindowsStitchIntoOneSheet) {
  const CauchyMoments g(fixtures::graph());
  WindowPlan plan;
  plan.centers = {cplx(-0.3, 0.0), cplx(-0.1, 0.0), cplx(0.1, 0.0), cplx(0.3, 0.1)};
  plan.radius = 0.15;
  const auto rc = sweep_windows(g, plan);
  EXPECT_EQ(rc.failed, 0u);
  for (const auto& w : rc.windows) {
    ASSERT_TRUE(w.ok) << w.note;
    EXPECT_EQ(w.p, 1);
    EXPECT_EQ(w.global_sheet, std::vector<std::size_t>{0});
    for (std::size_t i = 0; i < w.xi.size(); ++i) {
      EXPECT_LT(std::abs(w.roots[i][0] - w.xi[i] * w.xi[i]), 1e-10);
      EXPECT_LT(std::abs(w.quotients[0][i][0] - 1.0), 1e-9);
    }
    EXPECT_LT(w.moment_cr_residual, 1e-5);
    EXPECT_LT(w.fiber_cr_residual, 1e-5);
  }
}

TEST(WindowSweep, FourSheetRingMatchesOracle) {
  const CauchyMoments f(fixtures::four_sheet());
  auto plan = WindowPlan::ring(3.0, 0.4, 16, 0.15);
  plan.jobs = 4;
  const auto rc = sweep_windows(f, plan);
  EXPECT_EQ(rc.failed, 0u);
  for (const auto& w : rc.windows) {
    ASSERT_TRUE(w.ok) << w.note;
    EXPECT_EQ(w.p, 4);
    EXPECT_LT(w.moment_cr_residual, 1e-5);
    EXPECT_LT(w.fiber_cr_residual, 1e-4);
    for (std::size_t i = 0; i < w.xi.size(); i += 7)
      EXPECT_LT(set_distance(w.roots[i], four_fiber(w.xi[i]).h), 1e-6);
    auto labels = w.global_sheet;
    std::sort(labels.begin(), labels.end());
    EXPECT_EQ(std::unique(labels.begin(), labels.end()), labels.end());
  }
}

TEST(WindowSweep, ParallelAndSerialAgree) {
  const CauchyMoments f(fixtures::four_sheet(256));
  auto plan = WindowPlan::ring(3.0, 0.4, 6, 0.15);
  plan.holomorphy_checks = false;
  const auto a = sweep_windows(f, plan);
  plan.jobs = 3;
  const auto b = sweep_windows(f, plan);
  for (std::size_t i = 0; i < a.windows.size(); ++i) {
    EXPECT_EQ(a.windows[i].roots, b.windows[i].roots);
    EXPECT_EQ(a.windows[i].global_sheet, b.windows[i].global_sheet);
  }
}

TEST(WindowSweep, WindowOnBranchValueIsRelocated) {
  const CauchyMoments f(fixtures::four_sheet());
  WindowPlan plan;
  plan.centers = {2.75};
  plan.radius = 0.1;
  plan.holomorphy_checks = false;
  const auto rc = sweep_windows(f, plan);
  ASSERT_EQ(rc.windows.size(), 1u);
  const auto& w = rc.windows[0];
  ASSERT_TRUE(w.ok) << w.note;
  EXPECT_TRUE(w.relocated);
  EXPECT_NE(w.note.find("relocated"), std::string::npos);
  EXPECT_GE(w.min_root_separation, 1e-4);
}
