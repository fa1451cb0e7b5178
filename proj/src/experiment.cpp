#include "wsl/experiment.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "wsl/error.hpp"
#include "wsl/radial_geometry.hpp"
#include "wsl/ricci_flow.hpp"
#include "wsl/weight_mass.hpp"
#include "wsl/witten.hpp"

namespace wsl::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.141592653589793;

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
  throw SchemaError(path + ": " + what);
}

// Typed access to one JSON object; keys never read are rejected by done().
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) schema_fail(path_, "must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) schema_fail(at(key), "is required");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    seen_.insert(key);
    if (!j_.contains(key)) {
      if (!fallback) schema_fail(at(key), "is required");
      return *fallback;
    }
    const json& v = j_.at(key);
    if (!v.is_number()) schema_fail(at(key), "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) schema_fail(at(key), "must be finite");
    return x;
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) schema_fail(at(key), "must be positive");
    return x;
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) {
    seen_.insert(key);
    if (!j_.contains(key)) {
      if (!fallback) schema_fail(at(key), "is required");
      return *fallback;
    }
    const json& v = j_.at(key);
    if (!v.is_number_integer()) schema_fail(at(key), "must be an integer");
    return v.get<std::int64_t>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    seen_.insert(key);
    if (!j_.contains(key)) {
      if (!fallback) schema_fail(at(key), "is required");
      return *fallback;
    }
    const json& v = j_.at(key);
    if (!v.is_string()) schema_fail(at(key), "must be a string");
    return v.get<std::string>();
  }

  template <class E>
  E choice(const std::string& key, const std::vector<std::pair<std::string, E>>& options,
           std::optional<std::string> fallback = std::nullopt) {
    const std::string v = text(key, fallback);
    for (const auto& [name, value] : options) {
      if (name == v) return value;
    }
    std::string list;
    for (const auto& o : options) list += (list.empty() ? "" : ", ") + o.first;
    schema_fail(at(key), "must be one of " + list);
  }

  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) schema_fail(at(key), "unknown key");
    }
  }

  std::string at(const std::string& key) const { return path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// ---- descriptors ----------------------------------------------------------

family::GridSpec parse_grid(const json& j, const std::string& path) {
  Obj o(j, path);
  family::GridSpec g;
  const std::string spacing = o.text("spacing", "log");
  if (spacing == "log") {
    g.spacing = Spacing::log_uniform;
  } else if (spacing == "uniform") {
    g.spacing = Spacing::uniform;
  } else if (spacing == "origin_capped") {
    g.spacing = Spacing::uniform;
    g.origin_capped = true;
  } else {
    schema_fail(o.at("spacing"), "must be one of log, uniform, origin_capped");
  }
  g.r_min = g.origin_capped ? 0.0 : o.positive("r_min", g.r_min);
  g.r_max = o.positive("r_max", g.r_max);
  const std::int64_t n = o.integer("n_points", static_cast<std::int64_t>(g.n_points));
  if (n < 16) schema_fail(o.at("n_points"), "must be at least 16");
  g.n_points = static_cast<std::size_t>(n);
  if (!g.origin_capped && !(g.r_max > g.r_min)) schema_fail(path, "r_max must exceed r_min");
  o.done();
  return g;
}

family::MetricSpec parse_metric_at(const json& j, const std::string& path) {
  Obj o(j, path);
  family::MetricSpec s;
  s.family = o.choice<family::MetricSpec::Family>(
      "family", {{"flat", family::MetricSpec::Family::flat},
                 {"schwarzschild_conformal", family::MetricSpec::Family::schwarzschild_conformal}});
  const std::int64_t n = o.integer("n", 3);
  if (n < 3 || n > 10) schema_fail(o.at("n"), "must lie in [3, 10]");
  s.dim = static_cast<int>(n);
  s.A = o.number("A", 0.0);
  if (s.family == family::MetricSpec::Family::flat && s.A != 0.0) schema_fail(o.at("A"), "must be 0 for the flat family");
  if (o.has("tau")) s.tau = o.positive("tau");
  if (o.has("bump")) {
    Obj b(o.raw("bump"), o.at("bump"));
    family::Bump bump;
    bump.eps = b.number("eps");
    bump.center = b.number("center", bump.center);
    bump.width = b.positive("width", bump.width);
    bump.profile = b.choice<family::BumpProfile>(
        "profile", {{"gaussian", family::BumpProfile::gaussian}, {"potential", family::BumpProfile::potential}},
        "gaussian");
    b.done();
    s.bump = bump;
  }
  s.chart = o.choice<family::Chart>("chart", {{"conformal", family::Chart::conformal}, {"warped", family::Chart::warped}},
                                    "conformal");
  s.shift = o.number("shift", 0.0);
  if (o.has("grid")) s.grid = parse_grid(o.raw("grid"), o.at("grid"));
  o.done();
  return s;
}

dirac::SpinStructure parse_spin(const json& j, const std::string& path) {
  if (!j.is_string()) schema_fail(path, "must be a string");
  const auto v = j.get<std::string>();
  if (v == "trivial") return dirac::SpinStructure::trivial;
  if (v == "nontrivial") return dirac::SpinStructure::nontrivial;
  schema_fail(path, "must be trivial or nontrivial");
}

dirac::ModelSpace parse_space_at(const json& j, const std::string& path) {
  Obj o(j, path);
  dirac::ModelSpace space;
  const std::string kind = o.text("kind");
  if (kind == "circle") {
    dirac::Circle c;
    c.length = o.positive("length", c.length);
    if (o.has("spin")) c.spin = parse_spin(o.raw("spin"), o.at("spin"));
    space.kind = c;
  } else if (kind == "torus") {
    dirac::FlatTorus t;
    if (o.has("lengths")) {
      const json& l = o.raw("lengths");
      if (!l.is_array() || l.size() != 2 || !l[0].is_number() || !l[1].is_number()) {
        schema_fail(o.at("lengths"), "must be an array of two numbers");
      }
      t.lengths = {l[0].get<double>(), l[1].get<double>()};
      if (!(t.lengths[0] > 0.0 && t.lengths[1] > 0.0)) schema_fail(o.at("lengths"), "must be positive");
    }
    if (o.has("spin")) {
      const json& sp = o.raw("spin");
      if (!sp.is_array() || sp.size() != 2) schema_fail(o.at("spin"), "must be an array of two spin structures");
      t.spin = {parse_spin(sp[0], o.at("spin") + "[0]"), parse_spin(sp[1], o.at("spin") + "[1]")};
    }
    space.kind = t;
  } else if (kind == "sphere") {
    dirac::RoundSphere s;
    const std::int64_t n = o.integer("n", 2);
    if (n < 2 || n > 10) schema_fail(o.at("n"), "must lie in [2, 10]");
    s.dim = static_cast<int>(n);
    s.radius = o.positive("radius", 1.0);
    space.kind = s;
  } else {
    schema_fail(o.at("kind"), "must be one of circle, torus, sphere");
  }
  const std::int64_t res = o.integer("resolution", 32);
  if (res < 32) schema_fail(o.at("resolution"), "must be at least 32");
  space.resolution = static_cast<std::size_t>(res);
  o.done();
  return space;
}

// Weight descriptor of the radial subcommands.
struct RadialWeightSpec {
  enum class Kind { canonical, zero, gaussian } kind = Kind::canonical;
  double amplitude = 0.0;
  double width = 1.0;
};

RadialWeightSpec parse_radial_weight(const json& j, const std::string& path) {
  RadialWeightSpec w;
  if (j.is_string()) {
    const auto v = j.get<std::string>();
    if (v == "canonical") return w;
    if (v == "zero") {
      w.kind = RadialWeightSpec::Kind::zero;
      return w;
    }
    schema_fail(path, "must be canonical, zero or an object");
  }
  Obj o(j, path);
  const std::string type = o.text("type");
  if (type != "gaussian") schema_fail(o.at("type"), "must be gaussian");
  w.kind = RadialWeightSpec::Kind::gaussian;
  w.amplitude = o.number("amplitude");
  w.width = o.positive("width");
  o.done();
  return w;
}

radial::WeightField make_radial_weight(const RadialWeightSpec& spec, const radial::RadialMetric& metric) {
  switch (spec.kind) {
    case RadialWeightSpec::Kind::canonical:
      return mass::solve_weight(metric);
    case RadialWeightSpec::Kind::zero:
      return radial::WeightField::zero(metric.grid());
    case RadialWeightSpec::Kind::gaussian: {
      Samples f(metric.grid().size());
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = metric.grid().r(i) / spec.width;
        f[i] = spec.amplitude * std::exp(-x * x);
      }
      return radial::WeightField::from_f(metric.grid(), std::move(f));
    }
  }
  throw SchemaError("unreachable weight kind");
}

// ---- per-subcommand schema --------------------------------------------------

void validate_body(Subcommand sub, const json& body) {
  Obj o(body, "config");
  o.integer("schema_version");
  o.integer("seed", 0);
  if (o.has("tolerances")) o.raw("tolerances");
  if (o.has("description")) o.text("description");
  switch (sub) {
    case Subcommand::mass:
    case Subcommand::weight_solve:
    case Subcommand::witten:
      parse_metric_at(o.raw("metric"), "config.metric");
      if (o.has("weight")) parse_radial_weight(o.raw("weight"), "config.weight");
      break;
    case Subcommand::dirac: {
      const dirac::ModelSpace space = parse_space_at(o.raw("space"), "config.space");
      if (o.has("weight")) {
        Obj w(o.raw("weight"), "config.weight");
        const std::string type = w.text("type");
        if (space.is_flat()) {
          if (type == "cos") {
            w.number("amplitude");
            const std::int64_t axis = w.integer("axis", 0);
            if (axis < 0 || axis >= space.dim()) schema_fail(w.at("axis"), "out of range for this space");
          } else if (type == "random") {
            w.number("amplitude");
            if (w.integer("max_mode", 3) < 1) schema_fail(w.at("max_mode"), "must be at least 1");
          } else if (type != "zero") {
            schema_fail(w.at("type"), "must be zero, cos or random on flat spaces");
          }
        } else {
          if (type == "constant") {
            w.number("value");
          } else if (type == "random") {
            w.number("amplitude");
          } else if (type != "zero") {
            schema_fail(w.at("type"), "must be zero, constant or random on spheres");
          }
        }
        w.done();
      }
      o.choice<dirac::Scheme>("scheme",
                              {{"spectral", dirac::Scheme::spectral}, {"fd2", dirac::Scheme::fd2}, {"fd4", dirac::Scheme::fd4}},
                              "spectral");
      if (o.integer("eigenvalues", 8) < 1) schema_fail("config.eigenvalues", "must be at least 1");
      if (o.integer("trials", 3) < 1) schema_fail("config.trials", "must be at least 1");
      break;
    }
    case Subcommand::flow: {
      parse_metric_at(o.raw("metric"), "config.metric");
      if (o.has("dt")) o.positive("dt");
      const double T = o.positive("T");
      const double cadence = o.positive("cadence");
      if (cadence > T) schema_fail("config.cadence", "must not exceed T");
      o.positive("cfl", 0.1);
      break;
    }
    case Subcommand::report:
      break;
  }
  o.done();
}

// ---- output helpers ---------------------------------------------------------

json num(double x) {
  const double r = round_sig(x);
  return std::isfinite(r) ? json(r) : json(nullptr);
}

struct CheckList {
  json items = json::array();

  // pass iff residual <= tolerance after both are rounded for emission
  void add(const std::string& name, double residual, double tolerance) {
    const double r = round_sig(residual), t = round_sig(tolerance);
    const bool pass = std::isfinite(r) && r <= t;
    items.push_back({{"name", name}, {"residual", num(r)}, {"tolerance", num(t)}, {"pass", pass}});
    if (!pass) spdlog::warn("check {} failed: residual {} > tolerance {}", name, r, t);
  }
};

std::string csv_cell(double x) {
  const double r = round_sig(x);
  if (!std::isfinite(r)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", r);
  return buf;
}

// RFC 4180 quoting for text cells.
std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Every CSV row starts with the config hash and seed so rows stay attributable
// after files are concatenated.
class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const ExperimentConfig& cfg, const std::vector<std::string>& columns)
      : out_(path, std::ios::binary), prefix_(cfg.hash + "," + std::to_string(cfg.seed)) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    out_ << "config_hash,seed";
    for (const auto& c : columns) out_ << ',' << csv_text(c);
    out_ << "\r\n";
  }

  void row(const std::vector<double>& values) {
    out_ << prefix_;
    for (double v : values) out_ << ',' << csv_cell(v);
    out_ << "\r\n";
  }

 private:
  std::ofstream out_;
  std::string prefix_;
};

json envelope(const ExperimentConfig& cfg) {
  return {{"schema_version", kSchemaVersion},
          {"subcommand", std::string(subcommand_name(cfg.subcommand))},
          {"config_hash", cfg.hash},
          {"seed", cfg.seed},
          {"config", cfg.body}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

double tol(const ExperimentConfig& cfg, const std::string& name) { return cfg.tolerances.at(name); }

// ---- subcommands --------------------------------------------------------------

json run_mass(const ExperimentConfig& cfg, const fs::path& out) {
  const json& b = cfg.body;
  const radial::RadialMetric metric = family::build_metric(parse_metric(b.at("metric")));
  const RadialWeightSpec wspec =
      b.contains("weight") ? parse_radial_weight(b.at("weight"), "config.weight") : RadialWeightSpec{};
  spdlog::info("mass: {} nodes, weight kind {}", metric.grid().size(), static_cast<int>(wspec.kind));
  const radial::WeightField weight = make_radial_weight(wspec, metric);
  const mass::MassReport rep = mass::mass_report(metric, weight);
  const mass::WeightedMass wm = mass::weighted_mass(metric, weight);

  CheckList checks;
  if (wspec.kind == RadialWeightSpec::Kind::canonical) {
    checks.add("weighted_mass_plus_lambda_ale", rep.identity_residual,
               std::max(tol(cfg, "identity_relative") * std::abs(rep.weighted_mass),
                        tol(cfg, "identity_error_factor") * rep.extrapolation_error));
  }
  checks.add("flux_vs_volume_form", rep.flux_cross_check,
             tol(cfg, "flux_relative") * std::max(std::abs(wm.flux.value), std::abs(wm.adm.value)) +
                 10.0 * (wm.flux.fit.error + wm.volume_tail_error) + 1e-8);
  checks.add("positive_weighted_mass", std::max(0.0, -rep.weighted_mass), tol(cfg, "positivity"));

  json j = envelope(cfg);
  j["results"] = {{"adm_mass", num(rep.adm_mass)},
                  {"weighted_mass", num(rep.weighted_mass)},
                  {"lambda_ale", num(rep.lambda_ale)},
                  {"weight_flux", num(wm.flux.value)},
                  {"weight_volume_form", num(wm.volume_form)},
                  {"extrapolation_error", num(rep.extrapolation_error)},
                  {"identity_residual", num(rep.identity_residual)},
                  {"flux_cross_check", num(rep.flux_cross_check)}};
  j["checks"] = checks.items;
  write_json(out / "mass.json", j);

  CsvWriter csv(out / "boundary_samples.csv", cfg, {"radius", "adm_flux"});
  for (const auto& s : rep.boundary_samples) csv.row({s.radius, s.value});
  return j;
}

json run_weight_solve(const ExperimentConfig& cfg, const fs::path& out) {
  const radial::RadialMetric metric = family::build_metric(parse_metric(cfg.body.at("metric")));
  spdlog::info("weight-solve: {} nodes", metric.grid().size());
  const radial::WeightField weight = mass::solve_weight(metric);
  const radial::CurvatureProfile c = radial::curvature(metric, weight);
  double sup_rf = 0.0;
  for (double x : c.R_f) sup_rf = std::max(sup_rf, std::abs(x));
  const mass::MassReport rep = mass::mass_report(metric, weight);

  CheckList checks;
  checks.add("sup_abs_R_f", sup_rf, tol(cfg, "rf_sup"));
  checks.add("weighted_mass_plus_lambda_ale", rep.identity_residual,
             std::max(tol(cfg, "identity_relative") * std::abs(rep.weighted_mass),
                      tol(cfg, "identity_error_factor") * rep.extrapolation_error));
  checks.add("positive_weighted_mass", std::max(0.0, -rep.weighted_mass), tol(cfg, "positivity"));

  json j = envelope(cfg);
  j["results"] = {{"sup_abs_R_f", num(sup_rf)},
                  {"weight_decay_order", num(weight.decay_order())},
                  {"adm_mass", num(rep.adm_mass)},
                  {"weighted_mass", num(rep.weighted_mass)},
                  {"lambda_ale", num(rep.lambda_ale)},
                  {"extrapolation_error", num(rep.extrapolation_error)}};
  j["checks"] = checks.items;
  write_json(out / "weight_solve.json", j);

  CsvWriter csv(out / "weight.csv", cfg, {"r", "f", "w", "R", "R_f"});
  for (std::size_t i = 0; i < c.R.size(); ++i) {
    csv.row({metric.grid().r(i), weight.f()[i], weight.w()[i], c.R[i], c.R_f[i]});
  }
  return j;
}

json run_witten(const ExperimentConfig& cfg, const fs::path& out) {
  const json& b = cfg.body;
  radial::RadialMetric metric = family::build_metric(parse_metric(b.at("metric")));
  if (!metric.is_conformally_flat()) metric = radial::to_isothermal(metric);
  const RadialWeightSpec wspec =
      b.contains("weight") ? parse_radial_weight(b.at("weight"), "config.weight") : RadialWeightSpec{};
  const radial::WeightField weight = make_radial_weight(wspec, metric);
  spdlog::info("witten: {} nodes", metric.grid().size());

  const auto psi0 = witten::unit_spinor(metric.dim());
  const witten::WittenSpinor spinor =
      witten::weighted_witten_spinor(metric, weight, psi0, tol(cfg, "dirac_residual"));
  const witten::Energy energy = witten::witten_energy(metric, weight, spinor);
  const witten::Energy dirichlet = witten::dirichlet_energy(metric, weight, spinor);
  const mass::WeightedMass wm = mass::weighted_mass(metric, weight);
  const Samples gap = witten::kato_gap(metric, spinor);
  double min_gap = 0.0;
  for (double g : gap) min_gap = std::min(min_gap, g);

  CheckList checks;
  checks.add("weighted_dirac_residual", spinor.dirac_residual, tol(cfg, "dirac_residual"));
  checks.add("energy_vs_weighted_mass", std::abs(energy.value - wm.value) / std::max(std::abs(wm.value), 1e-300),
             tol(cfg, "energy_relative"));
  checks.add("kato_inequality", std::max(0.0, -min_gap), tol(cfg, "kato"));
  checks.add("positive_weighted_mass", std::max(0.0, -wm.value), tol(cfg, "positivity"));

  json j = envelope(cfg);
  j["results"] = {{"adm_mass", num(wm.adm.value)},
                  {"weighted_mass", num(wm.value)},
                  {"witten_energy", num(energy.value)},
                  {"witten_energy_tail_error", num(energy.tail_error)},
                  {"dirichlet_energy", num(dirichlet.value)},
                  {"energy_over_weighted_mass", num(energy.value / wm.value)},
                  {"dirac_residual", num(spinor.dirac_residual)},
                  {"spinor_decay_order", num(spinor.decay_order)},
                  {"min_kato_gap", num(min_gap)}};
  j["checks"] = checks.items;
  write_json(out / "witten.json", j);

  CsvWriter csv(out / "witten.csv", cfg, {"r", "amplitude", "kato_gap"});
  for (std::size_t i = 0; i < gap.size(); ++i) csv.row({metric.grid().r(i), spinor.amplitude[i], gap[i]});
  return j;
}

// Exact Dirac spectrum of a flat space (by magnitude, with multiplicity).
std::vector<double> flat_oracle_abs(const dirac::ModelSpace& space, std::size_t count) {
  std::vector<double> mags;
  auto shift = [](dirac::SpinStructure s) { return s == dirac::SpinStructure::trivial ? 0.5 : 0.0; };
  const int K = static_cast<int>(count) + 4;
  if (const auto* c = std::get_if<dirac::Circle>(&space.kind)) {
    for (int k = -K; k <= K; ++k) mags.push_back(std::abs(2.0 * kPi * (k + shift(c->spin)) / c->length));
  } else {
    const auto& t = std::get<dirac::FlatTorus>(space.kind);
    for (int a = -K; a <= K; ++a) {
      for (int b = -K; b <= K; ++b) {
        const double x = 2.0 * kPi * (a + shift(t.spin[0])) / t.lengths[0];
        const double y = 2.0 * kPi * (b + shift(t.spin[1])) / t.lengths[1];
        mags.push_back(std::hypot(x, y));  // +|xi| and -|xi|
        mags.push_back(std::hypot(x, y));
      }
    }
  }
  std::sort(mags.begin(), mags.end());
  mags.resize(count);
  return mags;
}

std::vector<double> by_magnitude(std::vector<double> v) {
  std::sort(v.begin(), v.end(), [](double a, double b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
  });
  return v;
}

// max over trials of |<D psi, phi>_f - <psi, D phi>_f| for smooth random
// spinors, relative to the size of the two terms.
double self_adjoint_defect(const dirac::DiracOperator& op, std::uint64_t seed, int trials) {
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXcd a = dirac::random_spinor(op.space, seed + 2 * static_cast<std::uint64_t>(t), 4);
    const Eigen::VectorXcd b = dirac::random_spinor(op.space, seed + 2 * static_cast<std::uint64_t>(t) + 1, 4);
    const Eigen::VectorXcd Da = op.matrix * a, Db = op.matrix * b;
    const auto norm = [&](const Eigen::VectorXcd& v) { return std::sqrt(std::abs(dirac::weighted_inner(op, v, v))); };
    const double diff = std::abs(dirac::weighted_inner(op, Da, b) - dirac::weighted_inner(op, a, Db));
    worst = std::max(worst, diff / (norm(Da) * norm(b) + norm(a) * norm(Db)));
  }
  return worst;
}

json run_dirac(const ExperimentConfig& cfg, const fs::path& out) {
  const json& b = cfg.body;
  const dirac::ModelSpace space = parse_space(b.at("space"));
  const auto k = static_cast<std::size_t>(b.value("eigenvalues", 8));
  const int trials = b.value("trials", 3);
  const std::string scheme_name = b.value("scheme", "spectral");
  const dirac::Scheme scheme = scheme_name == "fd2"   ? dirac::Scheme::fd2
                               : scheme_name == "fd4" ? dirac::Scheme::fd4
                                                      : dirac::Scheme::spectral;
  const json wj = b.value("weight", json{{"type", "zero"}});
  const std::string wtype = wj.at("type").get<std::string>();
  const int n = space.dim();
  const double friedrich_const = n >= 2 ? n / (4.0 * (n - 1.0)) : 0.0;

  CheckList checks;
  json results;
  json j = envelope(cfg);

  if (!space.is_flat()) {
    const auto& sphere = std::get<dirac::RoundSphere>(space.kind);
    const dirac::SphereWeight f = wtype == "constant" ? dirac::SphereWeight::constant(n, wj.at("value").get<double>())
                                  : wtype == "random"
                                      ? dirac::SphereWeight::random(n, cfg.seed, wj.at("amplitude").get<double>())
                                      : dirac::SphereWeight::constant(n, 0.0);
    const std::vector<double> spec = dirac::sphere_dirac_spectrum(sphere, k);
    const dirac::FriedrichCheck fc = dirac::friedrich_check(space, f, tol(cfg, "friedrich"));
    const double lp = dirac::lambda_p(space);
    const double lambda_min_sq = fc.lhs;
    checks.add("friedrich_margin", std::max(0.0, -fc.margin), tol(cfg, "friedrich"));
    checks.add("lambda_p_bound", std::max(0.0, friedrich_const * lp - lambda_min_sq), tol(cfg, "friedrich"));
    results = {{"lambda_min_sq", num(fc.lhs)},       {"friedrich_rhs", num(fc.rhs)},
               {"friedrich_margin", num(fc.margin)}, {"equality", fc.equality},
               {"lambda_p", num(lp)}};
    if (n >= 3) {
      const double m1 = dirac::mu_1(space);
      checks.add("mu_1_ge_lambda_p", std::max(0.0, lp - m1), tol(cfg, "friedrich"));
      results["mu_1"] = num(m1);
    }
    CsvWriter csv(out / "spectrum.csv", cfg, {"index", "eigenvalue", "residual", "oracle_abs"});
    const std::vector<double> sorted = by_magnitude(spec);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      csv.row({static_cast<double>(i), sorted[i], 0.0, std::abs(sorted[i])});
    }
  } else {
    Samples f(space.points(), 0.0);
    if (wtype == "cos") {
      const int axis = wj.value("axis", 0);
      const double a = wj.at("amplitude").get<double>();
      const double L = std::holds_alternative<dirac::Circle>(space.kind)
                           ? std::get<dirac::Circle>(space.kind).length
                           : std::get<dirac::FlatTorus>(space.kind).lengths[static_cast<std::size_t>(axis)];
      const auto pts = dirac::nodes(space);
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = a * std::cos(2.0 * kPi * pts[i][static_cast<std::size_t>(axis)] / L);
    } else if (wtype == "random") {
      f = dirac::random_weight(space, cfg.seed, wj.value("max_mode", 3), wj.at("amplitude").get<double>());
    }
    spdlog::info("dirac: {} nodes, scheme {}", space.points(), scheme_name);
    const dirac::DiracOperator D = dirac::build_dirac(space, Samples(f.size(), 0.0), scheme);
    const dirac::DiracOperator Df = dirac::build_dirac(space, f, scheme);
    const dirac::Spectrum s0 = dirac::spectrum(D, k);
    const dirac::Spectrum sf = dirac::spectrum(Df, k);
    double iso = 0.0;
    const auto m0 = by_magnitude(s0.eigenvalues), mf = by_magnitude(sf.eigenvalues);
    for (std::size_t i = 0; i < k; ++i) iso = std::max(iso, std::abs(std::abs(m0[i]) - std::abs(mf[i])));
    double max_res = 0.0;
    for (double r : sf.residuals) max_res = std::max(max_res, r);

    checks.add("weighted_self_adjointness", self_adjoint_defect(Df, cfg.seed, trials), tol(cfg, "hermitian"));
    checks.add("eigen_residual", max_res, tol(cfg, "eigen_residual"));
    checks.add("isospectrality", iso, tol(cfg, "isospectrality"));
    if (scheme == dirac::Scheme::spectral) {
      const auto oracle = flat_oracle_abs(space, k);
      double err = 0.0;
      for (std::size_t i = 0; i < k; ++i) err = std::max(err, std::abs(std::abs(mf[i]) - oracle[i]));
      checks.add("fourier_oracle", err, tol(cfg, "isospectrality"));
      CsvWriter csv(out / "spectrum.csv", cfg, {"index", "eigenvalue", "residual", "oracle_abs"});
      for (std::size_t i = 0; i < k; ++i) {
        const auto pos = std::find(sf.eigenvalues.begin(), sf.eigenvalues.end(), mf[i]) - sf.eigenvalues.begin();
        csv.row({static_cast<double>(i), mf[i], sf.residuals[static_cast<std::size_t>(pos)], oracle[i]});
      }
    } else {
      CsvWriter csv(out / "spectrum.csv", cfg, {"index", "eigenvalue", "residual"});
      for (std::size_t i = 0; i < k; ++i) {
        const auto pos = std::find(sf.eigenvalues.begin(), sf.eigenvalues.end(), mf[i]) - sf.eigenvalues.begin();
        csv.row({static_cast<double>(i), mf[i], sf.residuals[static_cast<std::size_t>(pos)]});
      }
    }

    const double lich = dirac::lichnerowicz_residual(space, f, trials, cfg.seed, scheme);
    checks.add("lichnerowicz", lich, tol(cfg, "identity"));
    results = {{"isospectrality", num(iso)},
               {"matrix_hermitian_defect", num(sf.hermitian_defect)},
               {"max_eigen_residual", num(max_res)},
               {"lichnerowicz_residual", num(lich)}};
    for (int axis = 0; axis < n; ++axis) {
      const double ric = dirac::ricci_identity_residual(space, f, axis, trials, cfg.seed, scheme);
      checks.add("ricci_identity_axis" + std::to_string(axis), ric, tol(cfg, "identity"));
      results["ricci_identity_residual_axis" + std::to_string(axis)] = num(ric);
    }
    if (n >= 2) {
      const dirac::FriedrichCheck fc = dirac::friedrich_check(space, f, tol(cfg, "friedrich"));
      const double lp = dirac::lambda_p(space);
      checks.add("friedrich_margin", std::max(0.0, -fc.margin), tol(cfg, "friedrich"));
      checks.add("lambda_p_bound", std::max(0.0, friedrich_const * lp - fc.lhs), tol(cfg, "friedrich"));
      results["lambda_min_sq"] = num(fc.lhs);
      results["friedrich_rhs"] = num(fc.rhs);
      results["friedrich_margin"] = num(fc.margin);
      results["lambda_p"] = num(lp);
    }
  }
  j["results"] = results;
  j["checks"] = checks.items;
  write_json(out / "dirac.json", j);
  return j;
}

json run_flow(const ExperimentConfig& cfg, const fs::path& out) {
  const json& b = cfg.body;
  const radial::RadialMetric metric = family::build_metric(parse_metric(b.at("metric")));
  const double T = b.at("T").get<double>();
  const double cadence = b.at("cadence").get<double>();
  flow::FlowOptions options;
  options.cfl = b.value("cfl", 0.1);
  const flow::FlowState start = flow::initial_state(metric);
  double dt;
  if (b.contains("dt")) {
    dt = b.at("dt").get<double>();
  } else {
    // largest admissible step that divides the cadence
    const double h = flow::min_arclength_spacing(start.metric);
    dt = cadence / std::ceil(cadence / (options.cfl * h * h));
  }
  spdlog::info("flow: dt {}, T {}, cadence {}", dt, T, cadence);
  const std::vector<flow::FlowState> traj = flow::run(start, dt, T, cadence, options);
  const flow::MonotonicityReport rep = flow::monotonicity_check(traj);

  CheckList checks;
  double mf_scale = 0.0;
  for (const auto& s : traj) mf_scale = std::max(mf_scale, std::abs(s.diagnostics->m_f));
  checks.add("m_f_non_increasing", std::max(0.0, rep.max_increase), 1e-12 * mf_scale);
  checks.add("dmf_dt_vs_minus_2S", rep.max_relative_error, tol(cfg, "dmf_relative"));
  checks.add("dirichlet_vs_minus_half_S", rep.max_relative_error_dirichlet, tol(cfg, "dirichlet_relative"));
  checks.add("adm_mass_constant", rep.mass_drift, std::max(rep.mass_tolerance, 1e-12));

  CsvWriter csv(out / "flow.csv", cfg,
                {"t", "m", "m_f", "lambda_ale", "dirichlet_energy", "soliton_residual", "min_R", "extrapolation_error"});
  for (const auto& s : traj) {
    const auto& d = *s.diagnostics;
    csv.row({s.t, d.m, d.m_f, d.lambda_ale, d.dirichlet_energy, d.soliton_residual, d.min_R, d.extrapolation_error});
  }
  json mids = json::array();
  for (const auto& m : rep.midpoints) {
    mids.push_back({{"t", num(m.t)},
                    {"dmf_dt", num(m.dmf_dt)},
                    {"minus_two_s", num(m.minus_two_s)},
                    {"relative_error", num(m.relative_error)},
                    {"ddirichlet_dt", num(m.ddirichlet_dt)},
                    {"minus_half_s", num(m.minus_half_s)},
                    {"relative_error_dirichlet", num(m.relative_error_dirichlet)}});
  }
  json j = envelope(cfg);
  j["results"] = {{"dt", num(dt)},
                  {"non_increasing", rep.non_increasing},
                  {"max_increase", num(rep.max_increase)},
                  {"max_relative_error", num(rep.max_relative_error)},
                  {"max_relative_error_dirichlet", num(rep.max_relative_error_dirichlet)},
                  {"mass_drift", num(rep.mass_drift)},
                  {"mass_tolerance", num(rep.mass_tolerance)},
                  {"midpoints", mids}};
  j["checks"] = checks.items;
  write_json(out / "flow.json", j);
  return j;
}

bool is_summary_file(const fs::path& p) { return p.filename() == "summary.json"; }

}  // namespace

// ---- public -------------------------------------------------------------------

Subcommand parse_subcommand(std::string_view name) {
  for (Subcommand s : {Subcommand::mass, Subcommand::weight_solve, Subcommand::dirac, Subcommand::witten,
                       Subcommand::flow, Subcommand::report}) {
    if (subcommand_name(s) == name) return s;
  }
  throw SchemaError("unknown subcommand '" + std::string(name) + "'");
}

std::string_view subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::mass: return "mass";
    case Subcommand::weight_solve: return "weight-solve";
    case Subcommand::dirac: return "dirac";
    case Subcommand::witten: return "witten";
    case Subcommand::flow: return "flow";
    case Subcommand::report: return "report";
  }
  return "?";
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double round_sig(double x, int digits) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
  return std::strtod(buf, nullptr);
}

std::map<std::string, double> default_tolerances(Subcommand s) {
  switch (s) {
    case Subcommand::mass:
      return {{"identity_relative", 1e-3}, {"identity_error_factor", 10.0}, {"flux_relative", 1e-3}, {"positivity", 1e-6}};
    case Subcommand::weight_solve:
      return {{"rf_sup", 1e-4}, {"identity_relative", 1e-3}, {"identity_error_factor", 10.0}, {"positivity", 1e-6}};
    case Subcommand::witten:
      return {{"dirac_residual", 1e-4}, {"energy_relative", 1e-2}, {"kato", 1e-10}, {"positivity", 1e-6}};
    case Subcommand::dirac:
      return {{"hermitian", 1e-10}, {"eigen_residual", 1e-8}, {"isospectrality", 1e-8}, {"identity", 1e-6},
              {"friedrich", 1e-8}};
    case Subcommand::flow:
      return {{"dmf_relative", 0.05}, {"dirichlet_relative", 0.10}};
    case Subcommand::report:
      return {};
  }
  return {};
}

ExperimentConfig load_config(Subcommand subcommand, const json& raw, std::optional<std::uint64_t> seed) {
  if (subcommand == Subcommand::report) throw SchemaError("report takes a results directory, not a config");
  if (!raw.is_object()) throw SchemaError("config: must be a JSON object");
  if (!raw.contains("schema_version") || !raw.at("schema_version").is_number_integer() ||
      raw.at("schema_version").get<int>() != kSchemaVersion) {
    throw SchemaError("config.schema_version: must be " + std::to_string(kSchemaVersion));
  }
  if (raw.contains("seed") && !raw.at("seed").is_number_unsigned()) {
    throw SchemaError("config.seed: must be a non-negative integer");
  }
  validate_body(subcommand, raw);

  ExperimentConfig cfg;
  cfg.subcommand = subcommand;
  cfg.body = raw;
  cfg.seed = seed ? *seed : raw.value("seed", std::uint64_t{0});
  cfg.body["seed"] = cfg.seed;
  cfg.tolerances = default_tolerances(subcommand);
  if (raw.contains("tolerances")) {
    const json& t = raw.at("tolerances");
    if (!t.is_object()) throw SchemaError("config.tolerances: must be an object");
    for (const auto& [key, value] : t.items()) {
      if (!cfg.tolerances.count(key)) throw SchemaError("config.tolerances." + key + ": unknown tolerance");
      if (!value.is_number() || !(value.get<double>() > 0.0) || !std::isfinite(value.get<double>())) {
        throw SchemaError("config.tolerances." + key + ": must be a positive number");
      }
      cfg.tolerances[key] = value.get<double>();
    }
  }
  cfg.hash = fnv1a_hex(cfg.body.dump());
  return cfg;
}

family::MetricSpec parse_metric(const json& j) { return parse_metric_at(j, "metric"); }
dirac::ModelSpace parse_space(const json& j) { return parse_space_at(j, "space"); }

json run(const ExperimentConfig& config, const fs::path& out) {
  fs::create_directories(out);
  switch (config.subcommand) {
    case Subcommand::mass: return run_mass(config, out);
    case Subcommand::weight_solve: return run_weight_solve(config, out);
    case Subcommand::dirac: return run_dirac(config, out);
    case Subcommand::witten: return run_witten(config, out);
    case Subcommand::flow: return run_flow(config, out);
    case Subcommand::report: break;
  }
  throw SchemaError("report is not an experiment");
}

bool Summary::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const SummaryRow& r) { return r.pass; });
}

Summary report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw SchemaError("results directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json" && !is_summary_file(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  Summary s;
  for (const fs::path& p : files) {
    const std::string rel = fs::relative(p, dir).generic_string();
    json j;
    try {
      std::ifstream in(p, std::ios::binary);
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw SchemaError(rel + ": corrupt result file (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("schema_version") || !j.contains("checks") || !j["checks"].is_array()) {
      throw SchemaError(rel + ": not a run report");
    }
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion) {
      throw SchemaError(rel + ": schema version " + j["schema_version"].dump() + " differs from " +
                        std::to_string(kSchemaVersion));
    }
    for (const json& c : j["checks"]) {
      if (!c.is_object() || !c.contains("name") || !c["name"].is_string()) throw SchemaError(rel + ": malformed check");
      SummaryRow row;
      row.file = rel;
      row.subcommand = j.value("subcommand", "");
      row.config_hash = j.value("config_hash", "");
      row.check = c["name"].get<std::string>();
      if (c.contains("residual") && c["residual"].is_number()) row.residual = c["residual"].get<double>();
      if (c.contains("tolerance") && c["tolerance"].is_number()) row.tolerance = c["tolerance"].get<double>();
      // recomputed rather than trusted: an edited row with residual > tolerance fails
      row.pass = c.value("pass", false) && row.residual && row.tolerance && *row.residual <= *row.tolerance;
      s.rows.push_back(std::move(row));
    }
  }
  return s;
}

void write_summary(const Summary& summary, const fs::path& out) {
  fs::create_directories(out);
  std::ofstream csv(out / "summary.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write summary.csv");
  csv << "file,subcommand,config_hash,check,residual,tolerance,status\r\n";
  for (const auto& r : summary.rows) {
    csv << csv_text(r.file) << ',' << csv_text(r.subcommand) << ',' << r.config_hash << ',' << csv_text(r.check) << ','
        << (r.residual ? csv_cell(*r.residual) : "") << ',' << (r.tolerance ? csv_cell(*r.tolerance) : "") << ','
        << (r.pass ? "PASS" : "FAIL") << "\r\n";
  }
  std::ofstream txt(out / "summary.txt", std::ios::binary);
  txt << format_summary(summary);
}

std::string format_summary(const Summary& summary) {
  std::ostringstream os;
  if (summary.rows.empty()) {
    os << "no results\n";
    return os.str();
  }
  std::size_t wf = 4, wc = 5;
  for (const auto& r : summary.rows) {
    wf = std::max(wf, r.file.size());
    wc = std::max(wc, r.check.size());
  }
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %-*s  %-14s  %-14s  %s\n", static_cast<int>(wf), "file", static_cast<int>(wc),
                "check", "residual", "tolerance", "status");
  os << line;
  std::size_t failed = 0;
  for (const auto& r : summary.rows) {
    std::snprintf(line, sizeof line, "%-*s  %-*s  %-14s  %-14s  %s\n", static_cast<int>(wf), r.file.c_str(),
                  static_cast<int>(wc), r.check.c_str(), r.residual ? csv_cell(*r.residual).c_str() : "-",
                  r.tolerance ? csv_cell(*r.tolerance).c_str() : "-", r.pass ? "PASS" : "FAIL");
    os << line;
    if (!r.pass) ++failed;
  }
  os << summary.rows.size() - failed << " passed, " << failed << " failed\n";
  return os.str();
}

}  // namespace wsl::experiment
