// Acceptance suite: one PASS/FAIL line per criterion. `acceptance 3 5` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wsl/dirac.hpp"
#include "wsl/metric_family.hpp"
#include "wsl/quadrature.hpp"
#include "wsl/ricci_flow.hpp"
#include "wsl/weight_mass.hpp"
#include "wsl/witten.hpp"

using namespace wsl;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [violated: " << what << "]";
    }
  }
};

double sup_abs(const Samples& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

using dirac::SpinStructure;

dirac::ModelSpace torus(std::size_t n, SpinStructure a, SpinStructure b) {
  return {dirac::FlatTorus{{2.0 * kPi, 2.0 * kPi}, {a, b}}, n};
}

family::MetricSpec bump(double A, double eps, double center, double width, std::size_t points) {
  family::MetricSpec s;
  s.family = family::MetricSpec::Family::schwarzschild_conformal;
  s.A = A;
  s.bump = family::Bump{eps, center, width, family::BumpProfile::potential};
  s.grid.n_points = points;
  // a regular centre has nothing to resolve near 0; see the README
  if (A == 0.0) s.grid.r_min = 0.05;
  return s;
}

// 1. Weighted Lichnerowicz formula on T^2.
void lichnerowicz(Outcome& o) {
  const auto space = torus(128, SpinStructure::nontrivial, SpinStructure::trivial);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Samples f = dirac::random_weight(space, seed, 4, 0.7);
    worst = std::max(worst, dirac::lichnerowicz_residual(space, f, 2, 100 + seed));
  }
  o.require(worst <= 1e-6, "spectral residual <= 1e-6");
  std::vector<double> fd;
  for (std::size_t n : {64u, 128u, 256u}) {
    const auto s = torus(n, SpinStructure::nontrivial, SpinStructure::trivial);
    fd.push_back(dirac::lichnerowicz_residual(s, dirac::random_weight(s, 0, 4, 0.7), 2, 100, dirac::Scheme::fd2));
  }
  const double p1 = std::log2(fd[0] / fd[1]), p2 = std::log2(fd[1] / fd[2]);
  o.require(std::abs(p2 - 2.0) <= 0.2, "fd2 residual order 2 under doubling");
  o.detail << "spectral 128^2, 10 seeds: max residual " << worst << "; fd2 residuals " << fd[0] << ", " << fd[1]
           << ", " << fd[2] << " (orders " << p1 << ", " << p2 << ")";
}

// 2. Isospectrality of D and D_f on the circle.
void isospectrality(Outcome& o) {
  const std::size_t N = 512;
  const dirac::ModelSpace c{dirac::Circle{2.0 * kPi, SpinStructure::nontrivial}, N};
  // eigenvalues resolved by the 2/3 rule: |k| <= N/3
  const std::size_t band = 2 * (N / 3) + 1;
  const auto D = dirac::spectrum(dirac::build_dirac(c, Samples(N, 0.0)), N);
  for (double a : {0.1, 1.0}) {
    Samples f;
    for (const auto& x : dirac::nodes(c)) f.push_back(a * std::cos(x[0]));
    const auto Df = dirac::spectrum(dirac::build_dirac(c, f), N);
    const auto lowD = dirac::spectrum(dirac::build_dirac(c, Samples(N, 0.0)), band).eigenvalues;
    const auto lowF = dirac::spectrum(dirac::build_dirac(c, f), band).eigenvalues;
    double err = 0.0, full = 0.0;
    for (std::size_t i = 0; i < band; ++i) err = std::max(err, std::abs(lowD[i] - lowF[i]));
    for (std::size_t i = 0; i < N; ++i) full = std::max(full, std::abs(D.eigenvalues[i] - Df.eigenvalues[i]));
    o.require(err <= 1e-8, "a = " + std::to_string(a) + " pairwise <= 1e-8");
    o.detail << "a=" << a << ": " << band << " resolved eigenvalues agree to " << err
             << " (all " << N << " incl. Nyquist edge: " << full << "); ";
  }
}

// 3. Weighted Ricci identity on T^2, both directions.
void ricci_identity(Outcome& o) {
  const auto space = torus(64, SpinStructure::trivial, SpinStructure::nontrivial);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Samples f = dirac::random_weight(space, seed, 4, 0.7);
    for (int axis : {0, 1}) worst = std::max(worst, dirac::ricci_identity_residual(space, f, axis, 2, 200 + seed));
  }
  o.require(worst <= 1e-6, "residual <= 1e-6");
  o.detail << "64^2, 10 seeds x 2 axes: max residual " << worst;
}

// 4. Friedrich inequality, its lambda_P corollary and mu_1 >= lambda_P.
void friedrich(Outcome& o) {
  const SpinStructure spins[2] = {SpinStructure::trivial, SpinStructure::nontrivial};
  double torus_margin = 1e300, torus_lp = 1e300;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto space = torus(24, spins[seed % 2], spins[(seed / 2) % 2]);
    const auto fc = dirac::friedrich_check(space, dirac::random_weight(space, seed, 2, 0.5));
    torus_margin = std::min(torus_margin, fc.margin);
    if (seed < 4) torus_lp = std::min(torus_lp, fc.lhs - 0.5 * dirac::lambda_p(torus(32, spins[seed % 2], spins[seed / 2])));
  }
  o.require(torus_margin >= -1e-8, "T^2 margin >= -1e-8");
  o.require(torus_lp >= -1e-8, "T^2 lambda_P corollary");

  double s2_margin = 1e300;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const dirac::ModelSpace s2{dirac::RoundSphere{2, 1.0}, 64};
    s2_margin = std::min(s2_margin, dirac::friedrich_check(s2, dirac::SphereWeight::random(2, seed, 0.5)).margin);
  }
  o.require(s2_margin >= -1e-8, "S^2 margin >= -1e-8");

  double equality = 0.0, lp_gap = 1e300, mu_gap = 1e300;
  for (int n = 2; n <= 5; ++n) {
    for (double radius : {1.0, 2.5}) {
      const dirac::ModelSpace s{dirac::RoundSphere{n, radius}, 64};
      const auto fc = dirac::friedrich_check(s, dirac::SphereWeight::constant(n, 0.7));
      equality = std::max(equality, std::abs(fc.margin));
      const double lp = dirac::lambda_p(s);
      lp_gap = std::min(lp_gap, fc.lhs - n / (4.0 * (n - 1.0)) * lp);
      if (n >= 3) mu_gap = std::min(mu_gap, dirac::mu_1(s) - lp);
    }
  }
  o.require(equality <= 1e-10, "S^n constant f |margin| <= 1e-10");
  o.require(lp_gap >= -1e-8, "S^n lambda_P corollary");
  o.require(mu_gap >= -1e-8, "mu_1 >= lambda_P");
  o.detail << "T^2 (50 f): min margin " << torus_margin << "; S^2 (10 f): min margin " << s2_margin
           << "; S^2..S^5 constant f: max |margin| " << equality << "; lambda_P slack " << std::min(torus_lp, lp_gap)
           << "; min mu_1 - lambda_P " << mu_gap;
}

// 5. ADM mass against the closed form.
void mass_oracle(Outcome& o) {
  double worst = 0.0;
  for (double A : {0.5, 1.0, 2.0}) {
    family::MetricSpec s;
    s.family = family::MetricSpec::Family::schwarzschild_conformal;
    s.A = A;
    const double m = mass::adm_mass(family::build_metric(s)).value;
    worst = std::max(worst, std::abs(m / (32.0 * kPi * A) - 1.0));
  }
  const double flat = std::abs(mass::adm_mass(family::build_metric(family::MetricSpec{})).value);
  o.require(worst <= 1e-3, "within 0.1% of 32 pi A");
  o.require(flat <= 1e-8, "flat |m| <= 1e-8");
  o.detail << "A in {0.5,1,2}: max relative error " << worst << "; flat |m| " << flat;
}

std::vector<family::MetricSpec> bump_metrics() {
  std::vector<family::MetricSpec> v = {bump(0.5, 0.2, 2.0, 0.5, 8192), bump(1.0, 0.15, 3.0, 0.8, 8192),
                                       bump(0.2, 0.4, 1.5, 0.4, 8192), bump(0.0, 0.3, 1.5, 0.4, 8192),
                                       bump(0.5, 0.2, 2.0, 0.5, 8192)};
  v[4].chart = family::Chart::warped;
  v[4].shift = 0.3;
  return v;
}

// 6. Canonical weight: R_f = 0 and m_f = -lambda_ALE.
void canonical_weight(Outcome& o) {
  double sup_rf = 0.0, min_R = 1e300;
  int k = 0;
  for (const auto& s : bump_metrics()) {
    const auto metric = family::build_metric(s);
    const Samples R = radial::curvature(metric).R;
    min_R = std::min(min_R, *std::min_element(R.begin(), R.end()));
    const auto weight = mass::solve_weight(metric);
    const double rf = sup_abs(radial::weighted_scalar_curvature(metric, weight));
    sup_rf = std::max(sup_rf, rf);
    const auto rep = mass::mass_report(metric, weight);
    const double bound = std::max(1e-3 * std::abs(rep.weighted_mass), 10.0 * rep.extrapolation_error);
    o.require(rep.identity_residual <= bound, "identity on metric " + std::to_string(k));
    o.detail << "#" << k++ << ": |m_f + lambda_ALE| " << rep.identity_residual << " <= " << bound << "; ";
  }
  o.require(min_R >= -1e-8, "bump metrics have R >= 0");
  o.require(sup_rf <= 1e-4, "sup |R_f| <= 1e-4");
  o.detail << "sup |R_f| " << sup_rf << ", min R " << min_R;
}

// 7. Weighted Witten formula, positivity and the flat volume-form check.
void witten_formula(Outcome& o) {
  auto check = [&](const family::MetricSpec& spec, bool canonical, const char* label) {
    radial::RadialMetric metric = family::build_metric(spec);
    if (!metric.is_conformally_flat()) metric = radial::to_isothermal(metric);
    const auto weight = canonical ? mass::solve_weight(metric) : radial::WeightField::zero(metric.grid());
    const auto spinor = witten::weighted_witten_spinor(metric, weight, witten::unit_spinor(metric.dim()));
    const double energy = witten::witten_energy(metric, weight, spinor).value;
    const double mf = mass::weighted_mass(metric, weight).value;
    const double rel = std::abs(energy - mf) / std::abs(mf);
    double gap = 0.0;
    for (double g : witten::kato_gap(metric, spinor)) gap = std::min(gap, g);
    o.require(rel <= 1e-2, std::string(label) + " energy within 1%");
    o.require(gap >= -1e-10, std::string(label) + " Kato");
    o.require(mf >= -1e-6, std::string(label) + " m_f >= -1e-6");
    o.detail << label << ": rel " << rel << ", min Kato gap " << gap << ", m_f " << mf << "; ";
  };
  family::MetricSpec schw;
  schw.family = family::MetricSpec::Family::schwarzschild_conformal;
  schw.A = 1.0;
  schw.grid.n_points = 8192;
  check(schw, false, "Schwarzschild");
  const auto bumps = bump_metrics();
  check(bumps[0], true, "bump0");
  check(bumps[3], true, "bump3");
  check(bumps[4], true, "bump4(warped)");

  const auto flat = family::build_metric(family::MetricSpec{});
  Samples f(flat.grid().size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.3 * std::exp(-std::pow(flat.grid().r(i), 2));
  const auto weight = radial::WeightField::from_f(flat.grid(), f);
  const double mf = mass::weighted_mass(flat, weight).value;
  const Samples lap = radial::weighted_laplacian(flat, weight, f);
  const Samples dv = radial::volume_density(flat);
  Samples F(f.size());
  for (std::size_t i = 0; i < F.size(); ++i) F[i] = lap[i] * std::exp(-f[i]) * dv[i];
  const double vol = std::abs(integrate_radial(flat.grid(), F).value);
  o.require(std::abs(mf) <= 1e-6, "flat + gaussian |m_f| <= 1e-6");
  o.require(vol <= 1e-6, "flat + gaussian volume form <= 1e-6");
  o.detail << "flat+gaussian f: |m_f| " << std::abs(mf) << ", |int (Lap_f f) e^-f| " << vol;
}

// 8. Monotonicity of m_f along the flow.
void flow_monotonicity(Outcome& o) {
  family::MetricSpec s = bump(1.0, 0.3, 2.0, 0.5, 4096);
  s.grid.r_min = 1e-3;
  s.grid.r_max = 1e4;
  const auto start = flow::initial_state(family::build_metric(s));
  const double h = flow::min_arclength_spacing(start.metric);
  const double cadence = 0.01;
  const double dt = cadence / std::ceil(cadence / (flow::FlowOptions{}.cfl * h * h));
  const auto traj = flow::run(start, dt, 0.1, cadence);
  const auto rep = flow::monotonicity_check(traj);
  o.require(traj.size() == 11, "11 samples over t in [0, 0.1]");
  o.require(rep.non_increasing, "m_f non-increasing");
  o.require(rep.max_relative_error <= 0.05, "dm_f/dt vs -2S within 5%");
  o.require(rep.max_relative_error_dirichlet <= 0.10, "Dirichlet derivative vs -S/2 within 10%");
  o.require(rep.mass_drift <= rep.mass_tolerance, "m constant within extrapolation error");
  o.detail << "dt " << dt << ", m_f " << traj.front().diagnostics->m_f << " -> " << traj.back().diagnostics->m_f
           << ", max increase " << rep.max_increase << ", dm_f/dt rel err " << rep.max_relative_error
           << ", Dirichlet rel err " << rep.max_relative_error_dirichlet << ", mass drift " << rep.mass_drift
           << " (tolerance " << rep.mass_tolerance << ")";
}

// 9. Convergence of the weighted Bianchi residual.
void bianchi(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double min_order = 1e300;
  for (int trial = 0; trial < 5; ++trial) {
    family::MetricSpec s;
    s.family = family::MetricSpec::Family::schwarzschild_conformal;
    s.A = 0.2 + 0.8 * unit(rng);
    s.bump = family::Bump{0.05 + 0.3 * unit(rng), 1.5 + 1.5 * unit(rng), 0.4 + 0.4 * unit(rng),
                          family::BumpProfile::potential};
    s.chart = family::Chart::warped;
    s.shift = -0.5 + 1.5 * unit(rng);
    s.grid.r_min = 1e-2;
    s.grid.r_max = 1e3;
    std::vector<double> res;
    for (std::size_t N : {512u, 1024u, 2048u}) {
      s.grid.n_points = N;
      const auto metric = family::build_metric(s);
      res.push_back(sup_abs(radial::weighted_bianchi_residual(metric, mass::solve_weight(metric))));
    }
    const double order = std::min(std::log2(res[0] / res[1]), std::log2(res[1] / res[2]));
    min_order = std::min(min_order, order);
    o.detail << "#" << trial << ": " << res[0] << " -> " << res[2] << " (order " << order << "); ";
  }
  o.require(min_order >= 3.5, "observed order >= 3.5 (scheme order 4)");
  o.detail << "min order " << min_order;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"weighted Lichnerowicz on T^2", lichnerowicz},
      {"isospectrality on S^1", isospectrality},
      {"weighted Ricci identity on T^2", ricci_identity},
      {"Friedrich bound, lambda_P and mu_1", friedrich},
      {"ADM mass oracle", mass_oracle},
      {"canonical weight", canonical_weight},
      {"weighted Witten formula and positivity", witten_formula},
      {"flow monotonicity", flow_monotonicity},
      {"weighted Bianchi convergence", bianchi},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[k].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d %s: %s (%.1f s) %s\n", id, o.pass ? "PASS" : "FAIL", criteria[k].first, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
