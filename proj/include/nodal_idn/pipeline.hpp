#pragma once

// Command pipelines behind the nodal-idn tool. Each command reads a config
// document, writes its JSON output and returns a process exit code.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "nodal_idn/io.hpp"

namespace nodal_idn::pipeline {

using io::Json;
namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kBadDatum = 2,
  kInversionFailure = 3,
  kInconsistent = 4,
  kCharacterizationFailure = 5,
};

inline constexpr const char* kConfigSchema = "nodal-idn/config/1";
inline constexpr const char* kCompactSchema = "nodal-idn/compact/1";

inline const std::set<std::string>& commands() {
  static const std::set<std::string> c{"forward", "invert", "residues", "characterize", "compact"};
  return c;
}

struct PipelineConfig {
  fs::path source;
  std::optional<fs::path> model, datum, curve;
  std::map<std::string, fs::path> outputs;
  std::optional<WindowPlan> plan;
  NodeOptions nodes;
  CharacterizationThresholds thresholds;
  ShockWindow shock;
  bool has_shock_window = false;
  bool green_from_model = false;
  std::size_t green_probes = 20;
  std::uint64_t seed = 7;
  unsigned jobs = 1;
  int orientation = 1;     // forward: write the datum on -gamma when -1
  double corruption = 0.0;  // forward: theta_1 += a conj(f_1) theta_0
  Json compact;
};

namespace detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

inline double positive(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  require(j[key].is_number() && j[key].get<double>() > 0.0, ErrorKind::InvalidInput,
          std::string("config: ") + key + " must be a positive number");
  return j[key].get<double>();
}

inline WindowPlan plan_from(const Json& j) {
  WindowPlan w;
  w.radius = positive(j, "radius", 0.1);
  w.grid_n = j.value("grid_n", std::size_t{9});
  require(w.grid_n >= 2, ErrorKind::InvalidInput, "config: grid_n must be at least 2");
  w.quotients = j.value("quotients", true);
  w.holomorphy_checks = j.value("holomorphy_checks", true);
  if (j.contains("centers")) w.centers = io::complex_vector(j["centers"]);
  if (j.contains("ring")) {
    const auto& r = j["ring"];
    const auto ring = WindowPlan::ring(io::complex_from(r.at("center")), positive(r, "radius", 1.0),
                                       r.at("count").get<std::size_t>(), w.radius);
    w.centers.insert(w.centers.end(), ring.centers.begin(), ring.centers.end());
  }
  require(!w.centers.empty(), ErrorKind::InvalidInput, "config: window plan has no windows");
  return w;
}

inline std::string format(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

inline std::string format(cplx z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%.6f, %.6f)", z.real(), z.imag());
  return buf;
}

}  // namespace detail

inline PipelineConfig load_config(const fs::path& path) {
  const Json j = io::read_file(path.string());
  io::expect_schema(j, kConfigSchema);
  PipelineConfig c;
  c.source = path;
  const fs::path base = path.parent_path();
  auto opt_path = [&](const char* key) -> std::optional<fs::path> {
    if (!j.contains(key)) return std::nullopt;
    return detail::resolve(base, j[key].get<std::string>());
  };
  c.model = opt_path("model");
  c.datum = opt_path("datum");
  c.curve = opt_path("curve");
  if (j.contains("outputs"))
    for (auto it = j["outputs"].begin(); it != j["outputs"].end(); ++it) {
      require(commands().count(it.key()) == 1, ErrorKind::InvalidInput,
              "config: unknown output command " + it.key());
      c.outputs[it.key()] = detail::resolve(base, it.value().get<std::string>());
    }
  if (j.contains("windows")) c.plan = detail::plan_from(j["windows"]);
  c.seed = j.value("seed", std::uint64_t{7});
  c.jobs = j.value("jobs", 1u);
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    c.nodes.contour_radius = detail::positive(t, "contour_radius", c.nodes.contour_radius);
    c.nodes.tau_res_floor = detail::positive(t, "tau_res_floor", c.nodes.tau_res_floor);
    c.thresholds.shock = detail::positive(t, "shock", c.thresholds.shock);
    c.thresholds.flat = detail::positive(t, "flat", c.thresholds.flat);
    c.thresholds.flatness = detail::positive(t, "flatness", c.thresholds.flatness);
    c.thresholds.green = detail::positive(t, "green", c.thresholds.green);
  }
  if (j.contains("forward")) {
    const auto& f = j["forward"];
    c.orientation = f.value("orientation", 1);
    require(c.orientation == 1 || c.orientation == -1, ErrorKind::InvalidInput,
            "config: forward.orientation must be 1 or -1");
    c.corruption = f.value("corruption", 0.0);
  }
  if (j.contains("characterize")) {
    const auto& s = j["characterize"];
    c.has_shock_window = true;
    c.shock.xi0_center = io::complex_from(s.at("xi0_center"));
    if (s.contains("xi1_center")) c.shock.xi1_center = io::complex_from(s["xi1_center"]);
    c.shock.radius = detail::positive(s, "radius", c.shock.radius);
    c.shock.delta = detail::positive(s, "delta", c.shock.delta);
    c.shock.n0 = s.value("n0", c.shock.n0);
    c.shock.n1 = s.value("n1", c.shock.n1);
    if (s.contains("green")) {
      const auto& g = s["green"];
      c.green_from_model = g.value("from_model", true);
      c.green_probes = g.value("probes", std::size_t{20});
    }
  }
  if (j.contains("compact")) c.compact = j["compact"];
  // inputs and outputs must not alias
  std::set<fs::path> seen;
  for (const auto& [cmd, p] : c.outputs)
    require(seen.insert(p.lexically_normal()).second, ErrorKind::InvalidInput,
            "config: output paths must be distinct");
  for (const auto& in : {c.model, c.datum, c.curve})
    if (in)
      for (const auto& [cmd, p] : c.outputs) {
        const bool produced = (cmd == "forward" && in == c.datum) || (cmd == "invert" && in == c.curve);
        require(produced || in->lexically_normal() != p.lexically_normal(), ErrorKind::InvalidInput,
                "config: output " + cmd + " overwrites an input file");
      }
  if (c.model && c.datum)
    require(c.model->lexically_normal() != c.datum->lexically_normal(), ErrorKind::InvalidInput,
            "config: model and datum paths must be distinct");
  return c;
}

inline fs::path output_path(const PipelineConfig& c, const std::string& command,
                            const std::optional<fs::path>& override_path) {
  if (override_path) return *override_path;
  const auto it = c.outputs.find(command);
  require(it != c.outputs.end(), ErrorKind::InvalidInput,
          "config: no output path for " + command + " (set outputs." + command + " or pass --out)");
  return it->second;
}

inline void write_output(const fs::path& p, const Json& j) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  io::write_file(p.string(), j);
  log(LogLevel::Info, "wrote " + p.string());
}

inline const fs::path& need(const std::optional<fs::path>& p, const char* what) {
  require(p.has_value(), ErrorKind::InvalidInput, std::string("config: missing ") + what + " path");
  return *p;
}

// forward

inline DNDatum forward_datum(const io::ModelSpec& spec, bool enforce) {
  std::array<std::function<cplx(cplx)>, 3> forms;
  for (int l = 0; l < 3; ++l) forms[l] = spec.forms[l];
  auto d = build_dn_datum(spec.model, spec.families, forms, spec.path == "synthetic" && enforce);
  if (spec.path == "dirichlet") d = build_dn_datum(spec.model, spec.families, d.u, enforce);
  return d;
}

inline int cmd_forward(const PipelineConfig& c, const fs::path& out, std::ostream& err) {
  const auto spec = io::model_from(io::read_file(need(c.model, "model").string()));
  DNDatum d;
  try {
    d = forward_datum(spec, true);
    if (c.corruption != 0.0) {
      auto theta = d.theta;
      for (std::size_t k = 0; k < d.size(); ++k)
        theta[1][k] += c.corruption * std::conj(d.f1[k]) * theta[0][k];
      d = assemble_datum(d.curve, d.u, std::move(theta), true);
    }
    if (c.orientation == -1) d = d.reversed();
  } catch (const Error& e) {
    err << "forward: " << e.what() << '\n';
    return kBadDatum;
  }
  write_output(out, io::to_json(d, spec.model.domain));
  return kOk;
}

// invert

inline std::string invert_report(const ReconstructedCurve& rc) {
  std::ostringstream os;
  os << "nodal-idn inversion report\n";
  os << "windows: " << rc.windows.size() << ", failed: " << rc.failed << '\n';
  os << "polynomial-part residual: " << detail::format(rc.exterior_residual) << "\n\n";
  os << "window  center                      p  status\n";
  double ps = 0.0, mcr = 0.0, fcr = 0.0;
  std::set<std::size_t> labels;
  for (const auto& w : rc.windows) {
    os << w.id << "  " << detail::format(w.center) << "  " << w.p << "  "
       << (w.ok ? (w.relocated ? "relocated" : "ok") : "skipped") << '\n';
    if (!w.ok) continue;
    ps = std::max(ps, w.power_sum_residual);
    mcr = std::max(mcr, w.moment_cr_residual);
    fcr = std::max(fcr, w.fiber_cr_residual);
    labels.insert(w.global_sheet.begin(), w.global_sheet.end());
  }
  os << "\nstitching: " << labels.size() << " global sheet labels over "
     << rc.windows.size() - rc.failed << " windows\n";
  for (const auto& n : rc.notes) os << "note: " << n << '\n';
  os << "\nself-consistency residuals (max over windows)\n";
  os << "power sums:              " << detail::format(ps) << '\n';
  os << "moment Cauchy-Riemann:   " << detail::format(mcr) << '\n';
  os << "fiber Cauchy-Riemann:    " << detail::format(fcr) << '\n';
  return os.str();
}

inline fs::path report_path(const fs::path& out) {
  fs::path r = out;
  r.replace_extension(".report.txt");
  return r;
}

inline int cmd_invert(const PipelineConfig& c, const fs::path& out, std::ostream& err) {
  DNDatum d;
  try {
    d = io::datum_from(io::read_file(need(c.datum, "datum").string()));
  } catch (const Error& e) {
    err << "invert: " << e.what() << '\n';
    return kBadDatum;
  }
  require(c.plan.has_value(), ErrorKind::InvalidInput, "config: invert needs a window plan");
  auto plan = *c.plan;
  plan.jobs = c.jobs;
  const CauchyMoments engine(d);
  const auto rc = sweep_windows(engine, plan);
  Json prov{{"datum", fs::path(*c.datum).filename().string()}, {"samples", d.size()}};
  write_output(out, io::to_json(rc, prov));
  {
    std::ofstream rep(report_path(out), std::ios::binary);
    rep << invert_report(rc);
  }
  if (2 * rc.failed > rc.windows.size()) {
    err << "invert: " << rc.failed << " of " << rc.windows.size() << " windows failed\n";
    for (const auto& n : rc.notes) err << "  " << n << '\n';
    return kInversionFailure;
  }
  return kOk;
}

// residues

/// Matches each model node group to the recovered node whose branch charges
/// agree best, over all branch-to-point assignments.
inline Json model_check(const io::ModelSpec& spec, const NodeInventory& inv) {
  Json groups = Json::array();
  double worst = 0.0;
  bool all = true;
  std::set<std::size_t> used;
  for (std::size_t g = 0; g < spec.model.node_groups.size(); ++g) {
    const std::size_t k = spec.model.node_groups[g].size();
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_node = 0;
    for (std::size_t n = 0; n < inv.nodes.size(); ++n) {
      if (used.count(n) || inv.nodes[n].charges[0].size() != k) continue;
      std::vector<std::size_t> perm(k);
      for (std::size_t i = 0; i < k; ++i) perm[i] = i;
      do {
        double e = 0.0;
        for (int l = 0; l < 3; ++l)
          for (std::size_t i = 0; i < k; ++i)
            e = std::max(e, std::abs(inv.nodes[n].charges[l][perm[i]] - spec.families[l].charges[g][i]));
        if (e < best) {
          best = e;
          best_node = n;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    if (!std::isfinite(best)) {
      all = false;
      groups.push_back(Json{{"group", g}, {"node", nullptr}, {"max_charge_error", nullptr}});
      continue;
    }
    used.insert(best_node);
    worst = std::max(worst, best);
    groups.push_back(Json{{"group", g}, {"node", best_node}, {"max_charge_error", best}});
  }
  return Json{{"groups", groups},
              {"all_matched", all},
              {"extra_nodes", inv.nodes.size() - used.size()},
              {"max_charge_error", worst}};
}

inline int cmd_residues(const PipelineConfig& c, const fs::path& out, std::ostream& err) {
  DNDatum d;
  ReconstructedCurve rc;
  try {
    d = io::datum_from(io::read_file(need(c.datum, "datum").string()));
    rc = io::curve_from(io::read_file(need(c.curve, "curve").string()));
  } catch (const Error& e) {
    err << "residues: " << e.what() << '\n';
    return kBadDatum;
  }
  NodeOptions opt = c.nodes;
  opt.jobs = c.jobs;
  const CauchyMoments engine(d);
  NodeInventory inv;
  try {
    inv = find_nodes(engine, rc, opt);
  } catch (const Error& e) {
    err << "residues: " << e.what() << '\n';
    return e.kind() == ErrorKind::Inconsistent ? kInconsistent : kInversionFailure;
  }
  Json j = io::to_json(inv);
  if (c.model) j["model_check"] = model_check(io::model_from(io::read_file(c.model->string())), inv);
  write_output(out, j);
  return kOk;
}

// characterize

inline int cmd_characterize(const PipelineConfig& c, const fs::path& out, std::ostream& err) {
  DNDatum d;
  try {
    d = io::datum_from(io::read_file(need(c.datum, "datum").string()), false);
  } catch (const Error& e) {
    err << "characterize: " << e.what() << '\n';
    return kCharacterizationFailure;
  }
  require(c.has_shock_window, ErrorKind::InvalidInput, "config: characterize needs a window");
  std::optional<GreenCheckInput> green;
  if (c.green_from_model) {
    const auto spec = io::model_from(io::read_file(need(c.model, "model").string()));
    GreenCheckInput g;
    g.domain = spec.model.domain;
    g.points = spec.model.node_groups;
    for (int l = 0; l < 3; ++l) g.charges[l] = spec.families[l].charges;
    g.probes = c.green_probes;
    g.seed = c.seed;
    green = g;
  }
  const auto rep = characterize(d, c.shock, green, c.thresholds);
  write_output(out, io::to_json(rep));
  if (!rep.passed) {
    for (const auto& f : rep.failures) err << "characterize: " << f << '\n';
    return kCharacterizationFailure;
  }
  if (rep.orientation && rep.orientation->verdict == Orientation::ReversedGamma)
    err << "characterize: datum passes on -gamma (orientation reversed)\n";
  return kOk;
}

// compact

/// Potentials on a compact surface Z = sphere with a subdomain
/// S = {|z| > R} containing bipolar charge points a_l^+, a_l^- with charges
/// +c_l, -c_l, and optional extra poles (p, kappa) for l = 0, 1.
struct CompactScenario {
  double radius = 1.0;
  std::size_t samples = 512;
  std::array<cplx, 3> plus{}, minus{};
  std::array<double, 3> charge{};
  std::array<std::vector<AuxiliaryPole>, 2> auxiliary;

  /// Poles and residues of dU_l, all in S.
  std::vector<AuxiliaryPole> poles(int l) const {
    std::vector<AuxiliaryPole> p{{plus[l], charge[l]}, {minus[l], -charge[l]}};
    if (l < 2) p.insert(p.end(), auxiliary[l].begin(), auxiliary[l].end());
    return p;
  }

  /// dz-coefficient of dU_l as numerator / prod (z - pole).
  io::RationalForm form(int l) const {
    io::RationalForm f;
    const auto p = poles(l);
    f.numerator.assign(p.size(), cplx{0.0, 0.0});
    for (std::size_t j = 0; j < p.size(); ++j) {
      oracles::Poly term{p[j].residue};
      for (std::size_t i = 0; i < p.size(); ++i)
        if (i != j) term = io::poly_mul(term, {-p[i].point, 1.0});
      for (std::size_t k = 0; k < term.size(); ++k) f.numerator[k] += term[k];
      f.denominator_roots.push_back(p[j].point);
    }
    return f;
  }

  cplx potential(int l, cplx z) const {
    cplx u = 0.0;
    for (const auto& p : poles(l)) u += 2.0 * p.residue * std::log(std::abs(z - p.point));
    return u;
  }
};

inline CompactScenario compact_from(const Json& j) {
  require(j.is_object(), ErrorKind::InvalidInput, "config: compact section missing");
  CompactScenario s;
  s.radius = detail::positive(j, "radius", 1.0);
  s.samples = j.value("samples", std::size_t{512});
  require(j.contains("charges") && j["charges"].is_array() && j["charges"].size() == 3,
          ErrorKind::HypothesisA, "compact: S contains no charge points (need three bipolar charges)");
  for (int l = 0; l < 3; ++l) {
    const auto& q = j["charges"][l];
    s.plus[l] = io::complex_from(q.at("plus"));
    s.minus[l] = io::complex_from(q.at("minus"));
    s.charge[l] = q.at("c").get<double>();
    require(s.charge[l] != 0.0, ErrorKind::HypothesisA,
            "compact: charge c_" + std::to_string(l) + " vanishes");
  }
  if (j.contains("auxiliary_poles")) {
    require(j["auxiliary_poles"].size() <= 2, ErrorKind::InvalidInput,
            "compact: auxiliary poles perturb l = 0 and l = 1 only");
    for (std::size_t l = 0; l < j["auxiliary_poles"].size(); ++l) {
      cplx total = 0.0;
      for (const auto& a : j["auxiliary_poles"][l]) {
        s.auxiliary[l].push_back({io::complex_from(a.at("point")), io::complex_from(a.at("residue"))});
        total += s.auxiliary[l].back().residue;
      }
      require(std::abs(total) <= 1e-12, ErrorKind::InvalidInput,
              "compact: auxiliary residues must sum to zero");
    }
  }
  // every singular point lies in S, off gamma = bS
  const double margin = 0.05 * s.radius;
  std::vector<cplx> pts;
  for (int l = 0; l < 3; ++l)
    for (const auto& p : s.poles(l)) {
      require(std::abs(p.point) > s.radius + margin, ErrorKind::HypothesisA,
              "charge point outside S");
      pts.push_back(p.point);
    }
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < l; ++k)
      require(s.plus[l] != s.plus[k] && s.minus[l] != s.minus[k] && s.plus[l] != s.minus[k] &&
                  s.minus[l] != s.plus[k] && s.plus[l] != s.minus[l],
              ErrorKind::HypothesisA, "compact: charge points must be distinct");
  return s;
}

/// Datum on gamma = bS, oriented as the boundary of the complement |z| < R:
/// u_l = U_l | gamma, theta u_l from the Dirichlet solve on the complement.
inline DNDatum compact_datum(const CompactScenario& s) {
  NodalDomainModel model{DomainDescriptor::disk(s.radius), BoundaryCurve::circle(s.radius, s.samples), {}, {}};
  std::array<ComplexSamples, 3> u;
  for (int l = 0; l < 3; ++l) {
    u[l].resize(s.samples);
    for (std::size_t k = 0; k < s.samples; ++k) u[l][k] = s.potential(l, model.boundary.positions()[k]);
  }
  std::array<AdmissibleFamily, 3> none;
  return build_dn_datum(model, none, u, true);
}

/// Fiber and form-quotient errors against the rational map z -> (w1/w0, w2/w0).
inline Json compact_oracle(const CompactScenario& s, const ReconstructedCurve& rc) {
  const auto w0 = s.form(0), w1 = s.form(1), w2 = s.form(2);
  const auto f1 = io::quotient(w1, w0), f2 = io::quotient(w2, w0);
  const auto dnum = oracles::derivative(f2.num), dden = oracles::derivative(f2.den);
  auto df2 = [&](cplx z) {
    const cplx n = oracles::horner(f2.num, z), d = oracles::horner(f2.den, z);
    return (oracles::horner(dnum, z) * d - n * oracles::horner(dden, z)) / (d * d);
  };
  const std::array<const io::RationalForm*, 3> w{&w0, &w1, &w2};
  double fiber_err = 0.0, quotient_err = 0.0;
  std::size_t points = 0, count_mismatch = 0;
  for (const auto& win : rc.windows) {
    if (!win.ok) continue;
    for (std::size_t i = 0; i < win.xi.size(); ++i) {
      const auto zs = oracles::rational_fiber_oracle(f2, win.xi[i], s.radius);
      ++points;
      if (static_cast<int>(zs.size()) != win.p) {
        ++count_mismatch;
        continue;
      }
      if (win.p == 0) continue;
      std::vector<cplx> h;
      for (const auto& z : zs) h.push_back(f1(z));
      const auto matched = match_roots(win.roots[i], h);
      for (std::size_t j = 0; j < matched.size(); ++j) {
        fiber_err = std::max(fiber_err, std::abs(matched[j] - win.roots[i][j]));
        const auto z = zs[static_cast<std::size_t>(std::find(h.begin(), h.end(), matched[j]) - h.begin())];
        for (int l = 0; l < 3; ++l)
          if (!win.quotients[l].empty() && !win.quotients[l][i].empty())
            quotient_err = std::max(quotient_err,
                                    std::abs((*w[l])(z) / df2(z) - win.quotients[l][i][j]));
      }
    }
  }
  return Json{{"grid_points", points},
              {"sheet_count_mismatches", count_mismatch},
              {"max_fiber_error", fiber_err},
              {"max_quotient_error", quotient_err}};
}

inline int cmd_compact(const PipelineConfig& c, const fs::path& out, std::ostream& err) {
  CompactScenario s;
  DNDatum d;
  try {
    s = compact_from(c.compact);
    d = compact_datum(s);
  } catch (const Error& e) {
    err << "compact: " << e.what() << '\n';
    return kBadDatum;
  }
  require(c.plan.has_value(), ErrorKind::InvalidInput, "config: compact needs a window plan");
  auto plan = *c.plan;
  plan.jobs = c.jobs;
  const CauchyMoments engine(d);
  const auto rc = sweep_windows(engine, plan);
  Json j{{"schema", kCompactSchema},
         {"S", Json{{"kind", "exterior"}, {"radius", s.radius}}},
         {"complement", io::to_json(DomainDescriptor::disk(s.radius))},
         {"hypothesisA", io::to_json(d.hypothesis_a)}};
  j["curve"] = io::to_json(rc, Json{{"source", "compact"}, {"samples", d.size()}});
  if (2 * rc.failed > rc.windows.size()) {
    err << "compact: " << rc.failed << " of " << rc.windows.size() << " windows failed\n";
    return kInversionFailure;
  }
  j["oracle"] = compact_oracle(s, rc);
  NodeOptions opt = c.nodes;
  opt.jobs = c.jobs;
  try {
    j["nodes"] = io::to_json(find_nodes(engine, rc, opt));
  } catch (const Error& e) {
    err << "compact: " << e.what() << '\n';
    return e.kind() == ErrorKind::Inconsistent ? kInconsistent : kInversionFailure;
  }
  write_output(out, j);
  return kOk;
}

/// Entry point shared by the tool and the tests.
inline int run(const std::string& command, const fs::path& config,
               std::optional<unsigned> jobs, const std::optional<fs::path>& out, std::ostream& err) {
  if (commands().count(command) == 0) {
    err << "unknown command " << command << '\n';
    return kUsage;
  }
  PipelineConfig c;
  fs::path target;
  try {
    c = load_config(config);
    if (jobs) c.jobs = std::max(1u, *jobs);
    target = output_path(c, command, out);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kUsage;
  }
  try {
    if (command == "forward") return cmd_forward(c, target, err);
    if (command == "invert") return cmd_invert(c, target, err);
    if (command == "residues") return cmd_residues(c, target, err);
    if (command == "characterize") return cmd_characterize(c, target, err);
    return cmd_compact(c, target, err);
  } catch (const Error& e) {
    err << command << ": " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidInput ? kUsage : kInversionFailure;
  }
}

}  // namespace nodal_idn::pipeline
