#pragma once

// JSON documents: model/1, datum/1, curve/1, nodes/1, caract/1.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "nodal_idn/characterize.hpp"
#include "nodal_idn/curve_model.hpp"
#include "nodal_idn/dirichlet.hpp"
#include "nodal_idn/moments.hpp"
#include "nodal_idn/nodes.hpp"
#include "nodal_idn/oracles.hpp"

namespace nodal_idn::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kModelSchema = "nodal-idn/model/1";
inline constexpr const char* kDatumSchema = "nodal-idn/datum/1";
inline constexpr const char* kCurveSchema = "nodal-idn/curve/1";
inline constexpr const char* kNodesSchema = "nodal-idn/nodes/1";
inline constexpr const char* kCaractSchema = "nodal-idn/caract/1";

namespace detail {

inline void write_number(std::ostream& os, double x) {
  if (!std::isfinite(x)) {
    os << "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  os << buf;
}

inline void write(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << Json(it.key()).dump() << ": ";
        write(os, it.value(), indent, depth + 1);
      }
      os << '\n' << close << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // arrays of scalars stay on one line
      bool flat = true;
      for (const auto& v : j) flat = flat && !v.is_structured();
      if (flat) {
        os << '[';
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          write(os, j[i], indent, depth + 1);
        }
        os << ']';
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << pad;
        write(os, j[i], indent, depth + 1);
      }
      os << '\n' << close << ']';
      return;
    }
    case Json::value_t::number_float:
      write_number(os, j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// Serializes with floats at 17 significant digits.
inline std::string dump(const Json& j) {
  std::ostringstream os;
  detail::write(os, j, 2, 0);
  os << '\n';
  return os.str();
}

inline Json read_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::InvalidInput, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidInput, path + ": " + e.what());
  }
}

inline void write_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::InvalidInput, "cannot write " + path);
  out << dump(j);
}

inline void expect_schema(const Json& j, const char* schema) {
  require(j.is_object() && j.value("schema", std::string()) == schema, ErrorKind::InvalidInput,
          std::string("expected schema ") + schema);
}

// Scalars and arrays of complex numbers, as [re, im].

inline Json to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

inline cplx complex_from(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          ErrorKind::InvalidInput, "complex numbers are encoded as [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json to_json(const std::vector<cplx>& v) {
  Json a = Json::array();
  for (const auto& z : v) a.push_back(to_json(z));
  return a;
}

inline std::vector<cplx> complex_vector(const Json& j) {
  require(j.is_array(), ErrorKind::InvalidInput, "expected an array of complex numbers");
  std::vector<cplx> v;
  v.reserve(j.size());
  for (const auto& x : j) v.push_back(complex_from(x));
  return v;
}

inline Json to_json(const std::vector<std::vector<cplx>>& v) {
  Json a = Json::array();
  for (const auto& g : v) a.push_back(to_json(g));
  return a;
}

inline std::vector<std::vector<cplx>> complex_groups(const Json& j) {
  require(j.is_array(), ErrorKind::InvalidInput, "expected an array of point arrays");
  std::vector<std::vector<cplx>> out;
  for (const auto& g : j) out.push_back(complex_vector(g));
  return out;
}

/// Real samples are written as plain numbers, complex ones as pairs.
inline Json samples_json(const ComplexSamples& v) {
  bool real = true;
  for (const auto& z : v) real = real && z.imag() == 0.0;
  if (!real) return to_json(v);
  Json a = Json::array();
  for (const auto& z : v) a.push_back(z.real());
  return a;
}

inline Json to_json(const Partition& p) {
  Json a = Json::array();
  for (const auto& b : p) a.push_back(b);
  return a;
}

// Domain and model.

inline Json to_json(const DomainDescriptor& d) {
  switch (d.kind) {
    case DomainKind::Disk:
      return Json{{"kind", "disk"}, {"radius", d.radius}};
    case DomainKind::Ellipse:
      return Json{{"kind", "ellipse"}, {"a", d.semi_a}, {"b", d.semi_b}};
    case DomainKind::Annulus:
      return Json{{"kind", "annulus"}, {"inner_radius", d.inner_radius}, {"radius", d.radius}};
  }
  return {};
}

inline DomainDescriptor domain_from(const Json& j) {
  require(j.is_object(), ErrorKind::InvalidInput, "domain must be an object");
  const auto kind = j.value("kind", std::string());
  auto positive = [&](const char* key) {
    require(j.contains(key) && j[key].is_number() && j[key].get<double>() > 0.0,
            ErrorKind::InvalidInput, std::string("domain.") + key + " must be a positive number");
    return j[key].get<double>();
  };
  if (kind == "disk") return DomainDescriptor::disk(positive("radius"));
  if (kind == "ellipse") return DomainDescriptor::ellipse(positive("a"), positive("b"));
  if (kind == "annulus") {
    const double ri = positive("inner_radius"), ro = positive("radius");
    require(ri < ro, ErrorKind::InvalidInput, "annulus: inner_radius must be below radius");
    return DomainDescriptor::annulus(ri, ro);
  }
  fail(ErrorKind::InvalidInput, "domain.kind must be disk, ellipse or annulus");
}

/// Meromorphic dz-coefficient numerator(z) / prod (z - root).
struct RationalForm {
  oracles::Poly numerator{1.0};
  std::vector<cplx> denominator_roots;

  cplx operator()(cplx z) const {
    cplx d = 1.0;
    for (const auto& r : denominator_roots) d *= z - r;
    return oracles::horner(numerator, z) / d;
  }

  oracles::Poly denominator() const {
    oracles::Poly d{1.0};
    for (const auto& r : denominator_roots) {
      oracles::Poly n(d.size() + 1, cplx{0.0, 0.0});
      for (std::size_t k = 0; k < d.size(); ++k) {
        n[k + 1] += d[k];
        n[k] -= r * d[k];
      }
      d = std::move(n);
    }
    return d;
  }
};

inline oracles::Poly poly_mul(const oracles::Poly& a, const oracles::Poly& b) {
  oracles::Poly c(a.size() + b.size() - 1, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) c[i + k] += a[i] * b[k];
  return c;
}

/// The quotient a / b as a rational map (numerator, denominator polynomials).
inline oracles::RationalMapOracle quotient(const RationalForm& a, const RationalForm& b) {
  return {poly_mul(a.numerator, b.denominator()), poly_mul(b.numerator, a.denominator())};
}

inline Json to_json(const RationalForm& f) {
  return Json{{"numerator", to_json(f.numerator)},
              {"denominator_roots", to_json(f.denominator_roots)}};
}

inline RationalForm form_from(const Json& j) {
  require(j.is_object() && j.contains("numerator"), ErrorKind::InvalidInput,
          "form needs a numerator coefficient list");
  RationalForm f;
  f.numerator = complex_vector(j["numerator"]);
  require(!f.numerator.empty(), ErrorKind::InvalidInput, "form numerator is empty");
  if (j.contains("denominator_roots")) f.denominator_roots = complex_vector(j["denominator_roots"]);
  return f;
}

/// Parsed model file.
struct ModelSpec {
  NodalDomainModel model;
  std::array<AdmissibleFamily, 3> families;
  std::array<RationalForm, 3> forms;
  std::string path = "synthetic";  // or "dirichlet"
  std::size_t samples = 512;
};

inline ModelSpec model_from(const Json& j) {
  expect_schema(j, kModelSchema);
  ModelSpec s;
  s.model.domain = domain_from(j.at("domain"));
  s.samples = j.value("samples", std::size_t{512});
  require(s.samples >= 16 && s.samples % 2 == 0, ErrorKind::InvalidInput,
          "samples must be an even integer >= 16");
  s.model.boundary = s.model.domain.boundary(s.samples);
  if (j.contains("node_groups")) s.model.node_groups = complex_groups(j["node_groups"]);
  if (j.contains("auxiliary_poles"))
    for (const auto& a : j["auxiliary_poles"])
      s.model.auxiliary_poles.push_back({complex_from(a.at("point")), complex_from(a.at("residue"))});
  s.path = j.value("path", std::string("synthetic"));
  require(s.path == "synthetic" || s.path == "dirichlet", ErrorKind::InvalidInput,
          "path must be synthetic or dirichlet");
  if (j.contains("families")) {
    require(j["families"].is_array() && j["families"].size() == 3, ErrorKind::InvalidInput,
            "families must list three charge families");
    for (int l = 0; l < 3; ++l) s.families[l].charges = complex_groups(j["families"][l]);
  } else {
    for (auto& f : s.families) f = AdmissibleFamily::zeros_like(s.model);
  }
  require(j.contains("forms") && j["forms"].is_array() && j["forms"].size() == 3,
          ErrorKind::InvalidInput, "forms must list three dz-coefficients");
  for (int l = 0; l < 3; ++l) s.forms[l] = form_from(j["forms"][l]);
  s.model.validate();
  for (const auto& f : s.families) f.validate_against(s.model);
  return s;
}

inline Json to_json(const ModelSpec& s) {
  Json j{{"schema", kModelSchema}, {"domain", to_json(s.model.domain)}, {"samples", s.samples},
         {"path", s.path}, {"node_groups", to_json(s.model.node_groups)}};
  Json fam = Json::array(), forms = Json::array();
  for (int l = 0; l < 3; ++l) {
    fam.push_back(to_json(s.families[l].charges));
    forms.push_back(to_json(s.forms[l]));
  }
  j["families"] = fam;
  j["forms"] = forms;
  return j;
}

// Datum.

inline Json to_json(const HypothesisAReport& r) {
  Json pairs = Json::array(), samples = Json::array();
  for (const auto& [a, b] : r.offending_pairs) pairs.push_back(Json::array({a, b}));
  for (auto k : r.offending_samples) samples.push_back(k);
  return Json{{"passed", r.passed()},
              {"injective", r.injective},
              {"immersive", r.immersive},
              {"min_image_distance", r.min_image_distance},
              {"min_speed", r.min_speed},
              {"offending_pairs", pairs},
              {"offending_samples", samples}};
}

inline Json to_json(const DNDatum& d, const std::optional<DomainDescriptor>& domain = std::nullopt) {
  Json j{{"schema", kDatumSchema}, {"samples", d.size()}};
  if (domain) j["domain"] = to_json(*domain);
  j["curve"] = Json{{"orientation", d.curve.orientation()},
                    {"positions", to_json(d.curve.positions())},
                    {"derivatives", to_json(d.curve.derivatives())}};
  Json u = Json::array(), th = Json::array();
  for (int l = 0; l < 3; ++l) {
    u.push_back(samples_json(d.u[l]));
    th.push_back(to_json(d.theta[l]));
  }
  j["u"] = u;
  j["theta"] = th;
  j["f"] = Json{{"f1", to_json(d.f1)}, {"f2", to_json(d.f2)}};
  j["hypothesisA"] = to_json(d.hypothesis_a);
  return j;
}

/// Rebuilds the datum from (curve, u, theta); f and the hypothesis-A report
/// are recomputed, not trusted.
inline DNDatum datum_from(const Json& j, bool enforce = true) {
  expect_schema(j, kDatumSchema);
  const auto& c = j.at("curve");
  BoundaryCurve curve(complex_vector(c.at("positions")), complex_vector(c.at("derivatives")),
                      c.value("orientation", 1));
  std::array<ComplexSamples, 3> u, theta;
  require(j.at("u").size() == 3 && j.at("theta").size() == 3, ErrorKind::InvalidInput,
          "datum needs three u and three theta sample arrays");
  for (int l = 0; l < 3; ++l) {
    u[l] = complex_vector(j["u"][l]);
    theta[l] = complex_vector(j["theta"][l]);
  }
  return assemble_datum(std::move(curve), std::move(u), std::move(theta), enforce);
}

inline std::optional<DomainDescriptor> datum_domain(const Json& j) {
  if (!j.contains("domain")) return std::nullopt;
  return domain_from(j["domain"]);
}

// Reconstructed curve.

inline Json to_json(const FiberWindow& w) {
  Json j{{"id", w.id},
         {"requested_center", to_json(w.requested_center)},
         {"center", to_json(w.center)},
         {"radius", w.radius},
         {"grid_n", w.grid_n},
         {"ok", w.ok},
         {"relocated", w.relocated},
         {"note", w.note},
         {"p", w.p},
         {"sheet_count_path", w.sheet_count_path}};
  j["residuals"] = Json{{"power_sum", w.power_sum_residual},
                        {"moment_cauchy_riemann", w.moment_cr_residual},
                        {"fiber_cauchy_riemann", w.fiber_cr_residual},
                        {"polynomial_part", w.polynomial_residual},
                        {"min_root_separation", w.min_root_separation}};
  j["xi"] = to_json(w.xi);
  j["roots"] = to_json(w.roots);
  Json q = Json::array();
  for (const auto& ql : w.quotients) q.push_back(to_json(ql));
  j["form_quotients"] = q;
  j["global_sheet"] = w.global_sheet;
  return j;
}

inline FiberWindow window_from(const Json& j) {
  FiberWindow w;
  w.id = j.at("id").get<std::size_t>();
  w.requested_center = complex_from(j.at("requested_center"));
  w.center = complex_from(j.at("center"));
  w.radius = j.at("radius").get<double>();
  w.grid_n = j.at("grid_n").get<std::size_t>();
  w.ok = j.at("ok").get<bool>();
  w.relocated = j.value("relocated", false);
  w.note = j.value("note", std::string());
  w.p = j.at("p").get<int>();
  w.sheet_count_path = j.value("sheet_count_path", std::string());
  const auto& r = j.at("residuals");
  w.power_sum_residual = r.value("power_sum", 0.0);
  w.moment_cr_residual = r.value("moment_cauchy_riemann", 0.0);
  w.fiber_cr_residual = r.value("fiber_cauchy_riemann", 0.0);
  w.polynomial_residual = r.value("polynomial_part", 0.0);
  w.min_root_separation = r.contains("min_root_separation") && r["min_root_separation"].is_number()
                              ? r["min_root_separation"].get<double>()
                              : std::numeric_limits<double>::infinity();
  w.xi = complex_vector(j.at("xi"));
  w.roots = complex_groups(j.at("roots"));
  if (j.contains("form_quotients"))
    for (std::size_t l = 0; l < 3 && l < j["form_quotients"].size(); ++l)
      w.quotients[l] = complex_groups(j["form_quotients"][l]);
  w.global_sheet = j.value("global_sheet", std::vector<std::size_t>{});
  return w;
}

inline Json to_json(const ReconstructedCurve& c, const Json& provenance = Json::object()) {
  Json j{{"schema", kCurveSchema}, {"provenance", provenance}};
  j["exterior_residual"] = c.exterior_residual;
  j["failed_windows"] = c.failed;
  j["notes"] = c.notes;
  Json w = Json::array();
  for (const auto& x : c.windows) w.push_back(to_json(x));
  j["windows"] = w;
  return j;
}

inline ReconstructedCurve curve_from(const Json& j) {
  expect_schema(j, kCurveSchema);
  ReconstructedCurve c;
  c.exterior_residual = j.value("exterior_residual", 0.0);
  c.failed = j.value("failed_windows", std::size_t{0});
  c.notes = j.value("notes", std::vector<std::string>{});
  for (const auto& w : j.at("windows")) c.windows.push_back(window_from(w));
  return c;
}

// Node inventory.

inline Json to_json(const LocalBranch& b) {
  Json sheets = Json::array();
  for (auto s : b.global_sheets)
    sheets.push_back(s == static_cast<std::size_t>(-1) ? Json(nullptr) : Json(s));
  return Json{{"members", b.members}, {"global_sheets", sheets},
              {"center_value", to_json(b.center_value)}};
}

inline Json to_json(const EnergyGrowth& e) {
  return Json{{"verdict", to_string(e.verdict)},
              {"total", e.total},
              {"radii", e.radii},
              {"contributions", e.contributions},
              {"ratios", e.ratios}};
}

inline Json to_json(const NodeInventory& inv) {
  Json j{{"schema", kNodesSchema}, {"tau_res", inv.tau_res}};
  j["isomorphism"] = inv.isomorphism;
  j["unique"] = inv.unique;
  j["partition_unique"] = inv.partition_unique;
  j["generic"] = Json::array({inv.generic[0], inv.generic[1], inv.generic[2]});
  Json points = Json::array();
  for (std::size_t i = 0; i < inv.reports.size(); ++i) {
    const auto& r = inv.reports[i];
    Json branches = Json::array();
    for (std::size_t b = 0; b < r.branches.size(); ++b) {
      const auto& a = r.branches[b];
      Json e = Json::array();
      for (const auto& g : a.energy) e.push_back(to_json(g));
      branches.push_back(Json{{"branch", to_json(r.point.branches[b])},
                              {"class", to_string(a.cls)},
                              {"residues", Json::array({to_json(a.residue[0]), to_json(a.residue[1]),
                                                        to_json(a.residue[2])})},
                              {"energy", e},
                              {"diagnostics_agree", a.diagnostics_agree},
                              {"note", a.note}});
    }
    Json other = Json::array();
    for (const auto& c : r.point.other_cycles) other.push_back(to_json(c));
    Json explored = Json::array();
    if (i < inv.partitions_explored.size())
      for (const auto& pl : inv.partitions_explored[i]) {
        Json parts = Json::array();
        for (const auto& p : pl) parts.push_back(to_json(p));
        explored.push_back(parts);
      }
    points.push_back(Json{{"h", to_json(r.point.h)},
                          {"xi0", to_json(r.point.xi0)},
                          {"window", r.point.window},
                          {"p", r.point.p},
                          {"contour_radius", r.point.contour_radius},
                          {"branches", branches},
                          {"other_cycles", other},
                          {"partitions_explored", explored},
                          {"note", r.point.note}});
  }
  j["singular_points"] = points;
  Json nodes = Json::array();
  for (const auto& n : inv.nodes)
    nodes.push_back(Json{{"point", n.point},
                         {"branches", n.branches},
                         {"h", to_json(n.h)},
                         {"xi0", to_json(n.xi0)},
                         {"charges", Json::array({to_json(n.charges[0]), to_json(n.charges[1]),
                                                  to_json(n.charges[2])})}});
  j["nodes"] = nodes;
  j["spurious_points"] = inv.spurious_points;
  j["notes"] = inv.notes;
  return j;
}

// Characterization report.

inline Json to_json(const ShockReport& r) {
  return Json{{"p", r.p},
              {"delta", r.delta},
              {"shock_residual", r.shock},
              {"flat_residual", r.flat},
              {"shock_residual_half_step", r.shock_half},
              {"flat_residual_half_step", r.flat_half},
              {"shock_order_ratio", r.shock_order_ratio},
              {"g_curvature", r.g_curvature},
              {"min_separation", r.min_separation},
              {"xi0", to_json(r.xi0)},
              {"xi1", to_json(r.xi1)},
              {"G", to_json(r.G)}};
}

inline Json to_json(const CharacterizationReport& r) {
  Json j{{"schema", kCaractSchema}, {"passed", r.passed}, {"failures", r.failures}};
  j["hypothesisA"] = to_json(r.hypothesis_a);
  j["window"] = Json{{"xi0_center", to_json(r.window.xi0_center)},
                     {"xi1_center", to_json(r.window.xi1_center)},
                     {"radius", r.window.radius},
                     {"n0", r.window.n0},
                     {"n1", r.window.n1},
                     {"delta", r.window.delta}};
  j["thresholds"] = Json{{"shock", r.thresholds.shock},
                         {"flat", r.thresholds.flat},
                         {"flatness", r.thresholds.flatness},
                         {"green", r.thresholds.green}};
  if (r.orientation) {
    const auto& o = *r.orientation;
    Json oj{{"verdict", to_string(o.verdict)},
            {"reversed_flag", o.verdict == Orientation::ReversedGamma},
            {"gamma_passes", o.forward_passes},
            {"reversed_passes", o.reversed_passes}};
    oj["gamma"] = o.forward ? to_json(*o.forward) : Json(nullptr);
    oj["reversed"] = o.reversed ? to_json(*o.reversed) : Json(nullptr);
    oj["gamma_error"] = o.forward_error;
    oj["reversed_error"] = o.reversed_error;
    j["orientation"] = oj;
  } else {
    j["orientation"] = Json{{"error", r.orientation_error},
                            {"gamma", r.failed_shock ? to_json(*r.failed_shock) : Json(nullptr)}};
  }
  if (r.green) {
    const auto& g = *r.green;
    Json res = Json::array();
    for (int l = 0; l < 3; ++l) res.push_back(g.residual[l]);
    j["green_identity"] = Json{{"max_residual", g.max_residual},
                               {"charges_zero_sum", g.charges_zero_sum},
                               {"probes", to_json(g.probes)},
                               {"residuals", res}};
  } else {
    j["green_identity"] = nullptr;
  }
  return j;
}

}  // namespace nodal_idn::io
