// Acceptance criteria 1-10: one PASS/FAIL line each, with measured values
// and runtimes. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sys/wait.h>
#include <sstream>

#include "fixtures.hpp"
#include "nodal_idn/characterize.hpp"
#include "nodal_idn/greens.hpp"
#include "nodal_idn/io.hpp"
#include "nodal_idn/moments.hpp"
#include "nodal_idn/nodes.hpp"
#include "nodal_idn/oracles.hpp"
#include "nodal_idn/pipeline.hpp"

using namespace nodal_idn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what, double value, double bound, const char* rel = "<") {
    pass = pass && ok;
    if (detail.tellp() > 0) detail << "; ";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %.3g %s %.3g", what.c_str(), value, ok ? rel : "!", bound);
    detail << buf;
  }
  void below(const std::string& what, double value, double bound) { check(value < bound, what, value, bound); }
  void above(const std::string& what, double value, double bound) { check(value > bound, what, value, bound, ">"); }
  void flag(bool ok, const std::string& what) {
    pass = pass && ok;
    if (detail.tellp() > 0) detail << "; ";
    detail << what << (ok ? "" : " FAILED");
  }
};

int failures = 0;

void criterion(int id, const char* name, double budget, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.flag(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.check(secs < budget, "runtime s", secs, budget);
  if (!o.pass) ++failures;
  std::printf("criterion %2d %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.str().c_str());
  std::fflush(stdout);
}

cplx random_in_disk(std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(r * std::sqrt(u(rng)), kTwoPi * u(rng));
}

std::vector<cplx> four_sheet_fiber(cplx xi, std::vector<cplx>* zs = nullptr) {
  const auto z = oracles::fiber_oracle(fixtures::four_f2_poly, xi, 1.5);
  std::vector<cplx> h;
  for (const auto& x : z) h.push_back(fixtures::four_f1(x));
  if (zs) *zs = z;
  return h;
}

fs::path stage(const std::string& name) {
  const fs::path dir = fs::path(NODAL_IDN_WORK_DIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (const auto& e : fs::directory_iterator(NODAL_IDN_SCENARIO_DIR))
    if (e.path().extension() == ".json") fs::copy_file(e.path(), dir / e.path().filename());
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int tool(const std::string& command, const fs::path& config, unsigned jobs) {
  const std::string cmd = std::string("\"") + NODAL_IDN_TOOL + "\" " + command + " --config \"" +
                          config.string() + "\" --jobs " + std::to_string(jobs) + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

int main() {
  criterion(1, "jump identity", 1.0, [](Outcome& o) {
    const auto curve = BoundaryCurve::circle(1.0, 256);
    const NystromSystem sys(curve);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<cplx> a(65), b(65);
      for (int d = 0; d <= 64; ++d) a[d] = cplx(n(rng), n(rng)), b[d] = cplx(n(rng), n(rng));
      ComplexSamples v(256);
      for (std::size_t k = 0; k < 256; ++k) {
        const double t = BoundaryCurve::parameter(k, 256);
        for (int d = 0; d <= 64; ++d) v[k] += a[d] * std::cos(d * t) + b[d] * std::sin(d * t);
      }
      const auto tm = trace_T_minus(v, sys);
      const auto tp = trace_T_plus(v, curve);
      for (std::size_t k = 0; k < 256; ++k) worst = std::max(worst, std::abs(tp[k] - tm[k] - v[k]));
    }
    o.below("sup |T+v - T-v - v|", worst, 1e-7);
  });

  criterion(2, "Fredholm Dirichlet", 2.0, [](Outcome& o) {
    auto sys = std::make_shared<const NystromSystem>(BoundaryCurve::circle(1.0, 256));
    std::mt19937_64 rng(5);
    std::vector<cplx> probes;
    for (int i = 0; i < 40; ++i) probes.push_back(random_in_disk(rng, 0.95));
    double disk = 0.0;
    for (int k = 0; k <= 8; ++k) {
      ComplexSamples u(256);
      for (std::size_t j = 0; j < 256; ++j) u[j] = std::cos(k * BoundaryCurve::parameter(j, 256));
      const auto sol = solve_dirichlet_fredholm(u, sys);
      for (const auto& z : probes) disk = std::max(disk, std::abs(sol(z) - std::pow(std::abs(z), k) * std::cos(k * std::arg(z))));
    }
    o.below("disk vs Poisson", disk, 1e-8);
    const double a = 1.3, b = 0.8, h = 0.01;
    const auto curve = BoundaryCurve::ellipse(a, b, 256);
    ComplexSamples u(256);
    for (std::size_t k = 0; k < 256; ++k) u[k] = std::real(std::pow(curve.positions()[k], 3));
    const auto sol = solve_dirichlet_fredholm(u, std::make_shared<const NystromSystem>(curve));
    const oracles::EllipseLaplaceFD fd(a, b, h, [](cplx z) { return std::real(z * z * z); });
    double worst = 0.0;
    for (int i = -120; i <= 120; i += 10)
      for (int j = -70; j <= 70; j += 10) {
        const cplx z(i * h, j * h);
        if (std::norm(cplx(z.real() / (0.95 * a), z.imag() / (0.95 * b))) >= 1.0) continue;
        worst = std::max(worst, std::abs(sol(z).real() - fd.at(i, j)));
      }
    o.below("ellipse vs FD", worst, 1e-5);
  });

  criterion(3, "principal Green", 5.0, [](Outcome& o) {
    auto sys = std::make_shared<const NystromSystem>(BoundaryCurve::circle(1.0, 256));
    const auto g = build_principal_green(GreenKernel::mundane_log(), sys);
    std::mt19937_64 rng(9);
    double closed = 0.0, sym = 0.0, bnd = 0.0;
    for (int i = 0; i < 50; ++i) {
      const cplx z = random_in_disk(rng, 0.8), w = random_in_disk(rng, 0.8);
      closed = std::max(closed, std::abs(g(z, w) - disk_green(z, w, 1.0)));
    }
    const auto ecurve = BoundaryCurve::ellipse(1.3, 0.8, 256);
    const auto ge = build_principal_green(GreenKernel::mundane_log(), std::make_shared<const NystromSystem>(ecurve));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 10; ++i) {
      cplx z, w;
      do z = cplx(1.1 * u(rng), 0.65 * u(rng));
      while (std::norm(cplx(z.real() / 1.1, z.imag() / 0.65)) >= 1.0);
      do w = cplx(1.1 * u(rng), 0.65 * u(rng));
      while (std::norm(cplx(w.real() / 1.1, w.imag() / 0.65)) >= 1.0);
      sym = std::max({sym, std::abs(ge(z, w) - ge(w, z)), std::abs(g(z * 0.7, w * 0.7) - g(w * 0.7, z * 0.7))});
      for (const auto& b : ge.boundary_trace(z)) bnd = std::max(bnd, std::abs(b));
      for (const auto& b : g.boundary_trace(z * 0.7)) bnd = std::max(bnd, std::abs(b));
    }
    o.below("disk vs closed form", closed, 1e-8);
    o.below("symmetry", sym, 1e-7);
    o.below("boundary trace", bnd, 1e-7);
  });

  criterion(4, "nodal Dirichlet residues", 1.0, [](Outcome& o) {
    double err = 0.0, sums = 0.0;
    const NodalDomainModel disk{DomainDescriptor::disk(1.0), BoundaryCurve::circle(1.0, 256),
                                {{cplx(0.5, 0.1), cplx(-0.4, -0.2)}, {cplx(0.1, 0.6), cplx(0.0, -0.6), cplx(-0.5, 0.4)}}, {}};
    const NodalDomainModel ellipse{DomainDescriptor::ellipse(1.3, 0.8), BoundaryCurve::ellipse(1.3, 0.8, 256),
                                   {{cplx(0.4, 0.1), cplx(-0.3, -0.2)}}, {}};
    const AdmissibleFamily fd{{{1.5, -1.5}, {cplx(1.0, 0.5), cplx(-2.0, 0.25), cplx(1.0, -0.75)}}};
    const AdmissibleFamily fe{{{cplx(0.7, -0.2), cplx(-0.7, 0.2)}}};
    for (const auto& [m, f] : {std::pair{disk, fd}, std::pair{ellipse, fe}}) {
      ComplexSamples u(256);
      for (std::size_t k = 0; k < 256; ++k) u[k] = std::cos(3.0 * BoundaryCurve::parameter(k, 256));
      const auto d = solve_nodal_dirichlet(m, f, u);
      const auto res = d.contour_residues(64);
      const auto c = f.flat();
      for (std::size_t j = 0; j < c.size(); ++j) err = std::max(err, std::abs(res[j] - c[j]));
      std::size_t off = 0;
      for (const auto& grp : m.node_groups) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < grp.size(); ++j) s += res[off + j];
        sums = std::max(sums, std::abs(s));
        off += grp.size();
      }
    }
    o.below("|residue - charge|", err, 1e-6);
    o.below("per-node sum", sums, 1e-6);
  });

  criterion(5, "moment engine", 3.0, [](Outcome& o) {
    const CauchyMoments graph(fixtures::graph(256));
    double g = 0.0;
    for (const auto& xi : square_grid(0.0, 0.5, 5)) {
      const auto m = graph.moments(xi, 6);
      for (int k = 0; k <= 6; ++k) g = std::max(g, std::abs(m[k] - std::pow(xi, 2 * k)));
    }
    o.below("graph |M_m - xi^2m|", g, 1e-10);
    const CauchyMoments four(fixtures::four_sheet(512));
    double f = 0.0;
    for (const auto& xi : square_grid(cplx(3.0, 0.3), 0.2, 5)) {
      const auto h = four_sheet_fiber(xi);
      const auto m = four.moments(xi, 6);
      for (int k = 0; k <= 6; ++k) {
        cplx s = 0.0;
        for (const auto& x : h) s += std::pow(x, k);
        f = std::max(f, std::abs(m[k] - s));
      }
    }
    o.below("4-sheet vs fiber oracle", f, 1e-8);
  });

  const auto four = fixtures::four_sheet(512);
  const CauchyMoments four_engine(four);
  auto plan = WindowPlan::ring(3.0, 0.4, 16, 0.15);
  plan.holomorphy_checks = false;
  ReconstructedCurve ring;

  criterion(6, "fiber recovery", 5.0, [&](Outcome& o) {
    ring = sweep_windows(four_engine, plan);
    double err = 0.0;
    std::size_t points = 0, count_bad = 0;
    for (const auto& w : ring.windows) {
      if (!w.ok) {
        ++count_bad;
        continue;
      }
      for (std::size_t i = 0; i < w.xi.size(); ++i) {
        const auto h = four_sheet_fiber(w.xi[i]);
        if (static_cast<int>(h.size()) != w.p) ++count_bad;
        const auto m = match_roots(w.roots[i], h);
        for (std::size_t j = 0; j < m.size(); ++j) err = std::max(err, std::abs(m[j] - w.roots[i][j]));
        ++points;
      }
    }
    o.check(points >= 81, "grid points", static_cast<double>(points), 81, ">=");
    o.below("max |h - oracle|", err, 1e-6);
    o.flag(count_bad == 0, "sheet count exact on all " + std::to_string(ring.windows.size()) + " windows");
  });

  criterion(7, "form-quotient recovery", 3.0, [&](Outcome& o) {
    const std::array<std::function<cplx(cplx)>, 3> w = {
        fixtures::four_w0, [](cplx z) { return fixtures::four_f1(z) * fixtures::four_w0(z); },
        [](cplx z) { return fixtures::four_f2(z) * fixtures::four_w0(z); }};
    double err = 0.0;
    for (const auto& win : ring.windows) {
      if (!win.ok) continue;
      for (std::size_t i = 0; i < win.xi.size(); i += 4) {
        std::vector<cplx> zs;
        const auto h = four_sheet_fiber(win.xi[i], &zs);
        for (std::size_t j = 0; j < win.roots[i].size(); ++j) {
          std::size_t best = 0;
          for (std::size_t k = 1; k < h.size(); ++k)
            if (std::abs(h[k] - win.roots[i][j]) < std::abs(h[best] - win.roots[i][j])) best = k;
          const cplx z = zs[best], df2 = 4.0 * z * z * z - 2.0 * z;
          for (int l = 0; l < 3; ++l) err = std::max(err, std::abs(win.quotients[l][i][j] - w[l](z) / df2));
        }
      }
    }
    o.below("max |dU_l/dF_2 - oracle|", err, 1e-6);
  });

  criterion(8, "node classification", 10.0, [](Outcome& o) {
    const auto dir = stage("criterion8");
    using pipeline::run;
    std::ostringstream sink;
    bool agree = true;
    for (const char* s : {"four_sheet", "spurious", "graph"}) {
      const auto cfg = dir / (std::string(s) + ".json");
      for (const char* c : {"forward", "invert", "residues"})
        if (run(c, cfg, 1, std::nullopt, sink) != 0) o.flag(false, std::string(s) + " " + c);
      const auto j = io::read_file((dir / "out" / (std::string(s) + ".nodes.json")).string());
      for (const auto& p : j["singular_points"])
        for (const auto& b : p["branches"]) agree = agree && b["diagnostics_agree"].get<bool>();
      if (std::string(s) == "four_sheet") {
        o.below("charge error", j["model_check"]["max_charge_error"].get<double>(), 1e-4);
        o.flag(j["model_check"]["all_matched"].get<bool>() && j["nodes"].size() == 1, "node (1,-1),(2,-2),(3,-3) recovered");
        o.flag(j["unique"].get<bool>(), "generic data unique");
      }
      if (std::string(s) == "spurious") {
        double r = 0.0;
        for (const auto& p : j["singular_points"])
          for (const auto& b : p["branches"])
            for (const auto& c : b["residues"]) r = std::max(r, std::abs(io::complex_from(c)));
        o.flag(j["nodes"].empty() && !j["spurious_points"].empty(), "spurious point found, no node");
        o.below("spurious residues", r, 1e-6);
      }
    }
    o.flag(agree, "residue/energy diagnostics agree");
    SingularPointReport sym;
    for (double s : {1.0, -1.0, 1.0, -1.0}) {
      sym.point.branches.push_back(LocalBranch{{sym.point.branches.size()}, {}, 0.0});
      BranchAnalysis a;
      a.residue = {s, s, s};
      sym.branches.push_back(a);
    }
    const auto inv = classify_and_partition({sym});
    o.flag(!inv.unique && inv.isomorphism == "roughly isomorphic", "(1,-1,1,-1) flagged ambiguous");
  });

  criterion(9, "characterization", 10.0, [&](Outcome& o) {
    ShockWindow w;
    w.xi0_center = -4.0;
    w.radius = 0.05;
    w.delta = 1e-3;
    const auto r = shock_residual(four, w);
    o.below("shock", r.shock, 1e-5);
    o.below("flat", r.flat, 1e-5);
    o.check(std::abs(r.shock_order_ratio - 4.0) < 0.8, "FD ratio", r.shock_order_ratio, 4.0, "~");
    auto bad = four;
    for (auto& v : bad.f1) v += 0.1 * std::conj(v);
    o.above("corrupted shock", shock_residual(bad, w).shock, 1e-2);
    const std::vector<std::vector<cplx>> pts{{1.0, -1.0}};
    std::array<std::vector<std::vector<cplx>>, 3> charges{
        std::vector<std::vector<cplx>>{{1.0, -1.0}}, {{2.0, -2.0}}, {{3.0, -3.0}}};
    const auto dom = DomainDescriptor::disk(1.5);
    const auto probes = green_probes(dom, 20, 7);
    o.below("Green (true charges)", green_identity_residual(four, dom, pts, charges, probes).max_residual, 1e-6);
    charges[1][0] = {2.1, -2.0};
    o.above("Green (perturbed 0.1)", green_identity_residual(four, dom, pts, charges, probes).max_residual, 1e-2);
    const auto orient = orientation_probe(four, w);
    o.flag(orient.verdict == Orientation::Gamma && orient.forward_passes && !orient.reversed_passes,
           "orientation exclusive (gamma)");
    const auto rev = orientation_probe(four.reversed(), w);
    o.flag(rev.verdict == Orientation::ReversedGamma, "reversed datum reports -gamma");
  });

  criterion(10, "CLI determinism", 60.0, [](Outcome& o) {
    const fs::path a = stage("determinism_a"), b = stage("determinism_b");
    const std::vector<std::pair<std::string, std::vector<std::string>>> pipelines = {
        {"graph", {"forward", "invert", "residues"}},
        {"four_sheet", {"forward", "invert", "residues", "characterize"}},
        {"spurious", {"forward", "invert", "residues"}},
        {"flat", {"forward", "characterize"}},
        {"four_sheet_reversed", {"forward", "characterize"}},
        {"compact", {"compact"}}};
    std::size_t files = 0;
    for (const auto& [name, cmds] : pipelines)
      for (const auto& c : cmds) {
        const int ra = tool(c, a / (name + ".json"), 1), rb = tool(c, b / (name + ".json"), 4);
        if (ra != 0 || rb != 0) o.flag(false, name + " " + c + " exit " + std::to_string(ra));
      }
    bool same = true;
    for (const auto& e : fs::directory_iterator(a / "out")) {
      ++files;
      const auto other = b / "out" / e.path().filename();
      if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
        same = false;
        o.flag(false, "differs: " + e.path().filename().string());
      }
    }
    o.check(files >= 15, "output files compared", static_cast<double>(files), 15, ">=");
    o.flag(same, "byte-identical across runs (jobs 1 vs 4)");
  });

  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
