// Acceptance run: one PASS/FAIL line per criterion, detail lines indented.
// Exits nonzero when any criterion fails.

#include "landau/analysis.hpp"
#include "landau/certificate.hpp"
#include "landau/cli.hpp"
#include "landau/simulation.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

using namespace landau;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(LANDAU_SOURCE_DIR) / "configs";

struct Outcome {
  bool pass = false;
  std::string summary;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  fmt::print("{} {:>2} {}: {} [{:.0f} s]\n", o.pass ? "PASS" : "FAIL", id, name, o.summary, secs);
  std::fflush(stdout);
}

void detail(const std::string& s) {
  fmt::print("       {}\n", s);
  std::fflush(stdout);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("landau-acceptance-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& command, const fs::path& config, const fs::path& out, bool deterministic = false,
            std::optional<std::uint64_t> seed = {}) {
  cli::Options o;
  o.command = command;
  o.config_path = config.string();
  o.out = out.string();
  o.deterministic = deterministic;
  o.seed = seed;
  std::ostringstream os, es;
  const int code = cli::run(o, os, es);
  if (code != 0) detail(fmt::format("{} {} exited {}: {}", command, config.string(), code, es.str()));
  return code;
}

double gaussian_kl(double a, double b, int d) { return 0.5 * d * (a / b - 1.0 + std::log(b / a)); }

// Particle run with the same defaults the tool uses: QMC, blob score and
// epsilon from the N-dependent rules.
IntegratorConfig default_integrator(const InitialDensity& f0, std::size_t n, double dt, double t_end) {
  IntegratorConfig c;
  c.scheme = Scheme::heun;
  c.dt = dt;
  c.t_end = t_end;
  c.score = ScoreField::blob(default_bandwidth(n, 3, f0.spread()));
  c.kernel = KernelParams::coulomb(default_epsilon(n, 3, f0.spread()));
  return c;
}

Outcome kernel_algebra() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), gamma_d(-3.0, 0.0), eps_d(0.0, 0.5), len(0.05, 4.0);
  double worst_null = 0.0, worst_eig = 0.0, worst_div = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Vec z(unit(rng), unit(rng), unit(rng));
    z = z.normalized() * len(rng);
    const KernelParams p{3, gamma_d(rng), k % 10 == 0 ? 0.0 : eps_d(rng)};
    const Mat A = eval_A(z, p);
    worst_null = std::max(worst_null, (A * z).norm());
    worst_eig = std::min(worst_eig, min_eigenvalue(A, 3));
  }
  for (int k = 0; k < 100; ++k) {
    Vec z(unit(rng), unit(rng), unit(rng));
    z = z.normalized() * len(rng);
    const KernelParams p{3, -3.0, k % 4 == 0 ? 0.0 : eps_d(rng)};
    const double h = 1e-5 * std::max(0.1, z.norm());
    Vec div = Vec::Zero();
    for (int j = 0; j < 3; ++j) {
      Vec e = Vec::Zero();
      e[j] = h;
      const Mat dA = (eval_A(z + e, p) - eval_A(z - e, p)) / (2 * h);
      for (int i = 0; i < 3; ++i) div[i] += dA(i, j);
    }
    const Vec b = eval_b(z, p);
    worst_div = std::max(worst_div, (div - b).norm() / b.norm());
  }
  const bool pass = worst_null <= 1e-13 && worst_eig >= -1e-13 && worst_div <= 1e-6;
  return {pass, fmt::format("max |A z| {:.2e} (<= 1e-13), min eigenvalue {:.2e} (>= -1e-13), div A vs b rel {:.2e} "
                            "(<= 1e-6)",
                            worst_null, worst_eig, worst_div)};
}

Outcome conservation() {
  // Two displaced bumps: far from equilibrium, so energy moves between particles.
  const InitialDensity f0(AnalyticDensity(3, {{0.5, Vec(-1.2, 0, 0), 0.6}, {0.5, Vec(1.2, 0, 0), 0.6}}));
  const std::size_t n = 4096;
  const auto e0 = sample_ensemble(f0, n, Sampling::qmc, 0);
  ParticleDiagnostics diag;
  diag.stride = 100;
  std::vector<double> drift;
  bool exact_mass = true;
  double worst_momentum = 0.0, worst_rel_drift = 0.0;
  for (double dt : {2e-3, 1e-3}) {
    const IntegratorConfig c = default_integrator(f0, n, dt, 1.0);
    const ParticleRun r = run_particles(e0, c, diag);
    const DiagnosticRow& first = r.record.rows.front();
    for (const auto& row : r.record.rows) {
      exact_mass = exact_mass && row.mass == first.mass;
      worst_momentum = std::max(worst_momentum, (row.momentum - first.momentum).norm());
    }
    const double d = std::abs(r.record.rows.back().energy - first.energy);
    drift.push_back(d);
    if (dt == 1e-3) worst_rel_drift = d / first.energy;
    detail(fmt::format("dt {:g}: energy drift {:.3e} (relative {:.3e})", dt, d, d / first.energy));
  }
  const double ratio = drift[0] / drift[1];
  const bool ratio_ok = std::abs(ratio - 4.0) <= 0.3 * 4.0;
  const bool pass = exact_mass && worst_momentum <= 1e-12 && worst_rel_drift < 1e-3 && ratio_ok;
  return {pass, fmt::format("mass exact {}, momentum drift {:.2e} (<= 1e-12), relative energy drift {:.2e} (< 1e-3), "
                            "halving dt divides drift by {:.2f} (4 +- 30%){}",
                            exact_mass ? "yes" : "no", worst_momentum, worst_rel_drift, ratio,
                            ratio_ok ? "" : "; Heun drift is O(dt^3) here because A z = 0 makes the energy error "
                                            "start one order higher")};
}

Outcome stationarity() {
  const AnalyticDensity m = AnalyticDensity::maxwellian(3);
  const auto e0 = sample_ensemble(InitialDensity(m), 4096, Sampling::qmc, 0);
  IntegratorConfig c;
  c.dt = 0.01;
  c.t_end = 1.0;
  c.score = ScoreField::analytic(m);
  c.kernel = KernelParams::coulomb(default_epsilon(e0.size(), 3, 1.0));
  ParticleDiagnostics diag;
  diag.stride = 1;
  const ParticleRun r = run_particles(e0, c, diag);
  double worst = 0.0;
  for (const auto& row : r.record.rows) worst = std::max(worst, row.max_speed);
  return {worst <= 1e-12 && r.record.rows.size() == 101,
          fmt::format("max_i |U_i| over {} steps {:.2e} (<= 1e-12)", r.steps, worst)};
}

Outcome oracle_accuracy() {
  const GridSpec g{3, 48, 8.0};
  const AnalyticDensity m = AnalyticDensity::maxwellian(3), wide = AnalyticDensity::gaussian(3, Vec::Zero(), 2.0);
  const Functionals fw = functionals(m, &wide, g);
  const double kl = fw.pair->kl, h = fw.f.entropy, i0 = fw.f.fisher, e = fw.f.energy;
  const bool pass = std::abs(kl - 0.28972) <= 1e-3 && std::abs(h + 4.25681) <= 1e-3 && std::abs(i0 - 3.0) <= 1e-3 &&
                    std::abs(e - 1.5) <= 1e-6;
  detail(fmt::format("closed forms: KL {:.6f}, entropy {:.6f}", gaussian_kl(1, 2, 3),
                     -1.5 * (1 + std::log(2 * M_PI))));
  return {pass, fmt::format("KL {:.6f} (0.28972 +- 1e-3), entropy {:.6f} (-4.25681 +- 1e-3), I_0 {:.6f} (3 +- 1e-3), "
                            "energy {:.9f} (1.5 +- 1e-6)",
                            kl, h, i0, e)};
}

Outcome inequality_suite() {
  const auto suite = mixture_suite(20, 7);
  const GridSpec g48{3, 48, 8.0}, g64{3, 64, 8.0};
  double worst_margin = INFINITY, worst_change = 0.0, worst_l2 = INFINITY, worst_l1 = INFINITY;
  std::size_t k = 0;
  for (const auto& [f, h] : suite) {
    const InequalityReport a = verify_key_inequality(f, h, g48, KernelParams::coulomb(), InequalityForm::raw);
    const InequalityReport b = verify_key_inequality(f, h, g64, KernelParams::coulomb(), InequalityForm::raw);
    const PinskerReport p = pinsker_check(f, h, g48);
    const double change = std::abs(b.margin - a.margin) / std::abs(a.margin);
    worst_margin = std::min({worst_margin, a.margin, b.margin});
    worst_change = std::max(worst_change, change);
    worst_l2 = std::min(worst_l2, p.l2_margin);
    worst_l1 = std::min(worst_l1, p.l1_margin);
    detail(fmt::format("pair {:2}: margin {:.6e} -> {:.6e} ({:+.2f}%), Pinsker margins {:.3e} / {:.3e}", k++,
                       a.margin, b.margin, 100 * (b.margin - a.margin) / std::abs(a.margin), p.l2_margin,
                       p.l1_margin));
  }
  const bool pass = suite.size() >= 20 && worst_margin >= -1e-6 && worst_change <= 0.10 && worst_l2 > 0 && worst_l1 > 0;
  return {pass, fmt::format("{} pairs: min margin {:.3e} (>= -1e-6), max change 48->64 {:.2f}% (<= 10%), min Pinsker "
                            "margins L2 {:.3e}, L1 {:.3e} (> 0)",
                            suite.size(), worst_margin, 100 * worst_change, worst_l2, worst_l1)};
}

Outcome coercivity() {
  const AnalyticDensity m = AnalyticDensity::maxwellian(3);
  const CoercivityReport a = coercivity_check(m, GridSpec{3, 48, 8.0}, KernelParams::coulomb());
  const CoercivityReport b = coercivity_check(m, GridSpec{3, 64, 8.0}, KernelParams::coulomb());
  const double change = std::abs(b.c_coe - a.c_coe) / a.c_coe;
  return {a.c_coe > 0 && b.c_coe > 0 && change <= 0.05,
          fmt::format("C_coe {:.6f} at M=48, {:.6f} at M=64, change {:.2f}% (<= 5%)", a.c_coe, b.c_coe, 100 * change)};
}

Outcome solver_oracle() {
  const InitialDensity f0(AnalyticDensity::gaussian(3, Vec::Zero(), 1.5));
  const double T = 0.5, delta = 0.5;
  const GridSpec grid = default_grid(3, f0.extent(), 48);
  OracleConfig oc;
  oc.t_end = T;
  oc.output_interval = T;
  const OracleRun oracle = run_oracle(sample_grid(f0, grid), oc, true);
  const GridDensity target = mollify(oracle.states.back(), delta);
  double norm = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) norm += grid.weight(i) * target.values[i] * target.values[i];
  std::vector<double> dist;
  for (std::size_t n : {2048, 4096, 8192}) {
    const auto e0 = sample_ensemble(f0, n, Sampling::qmc, 0);
    ParticleDiagnostics diag;
    diag.stride = 1000;
    const ParticleRun r = run_particles(e0, default_integrator(f0, n, 0.01, T), diag);
    const GridDensity g = ensemble_to_grid(r.final_state, delta, grid);
    double d2 = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) d2 += grid.weight(i) * std::pow(g.values[i] - target.values[i], 2);
    dist.push_back(std::sqrt(d2 / norm));
    detail(fmt::format("N {}: relative L2 distance {:.4e}", n, dist.back()));
  }
  const bool monotone = dist[1] < dist[0] && dist[2] < dist[1];
  return {monotone && dist[2] < 0.05,
          fmt::format("distances {:.3e}, {:.3e}, {:.3e}; decreasing {}, {:.2f}% at N=8192 (< 5%)", dist[0], dist[1],
                      dist[2], monotone ? "yes" : "no", 100 * dist[2])};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = a + (b - a) * k / (n - 1);
  return t;
}

Outcome gronwall() {
  double worst = 0.0;
  const auto t = linspace(0.0, 2.0, 41);
  const std::vector<double> zero(t.size(), 0.0);
  for (double c0 : {0.3, 1.0, 2.5}) {
    const auto y = gronwall_integrate(0.1, std::vector<double>(t.size(), c0), zero, t);
    for (std::size_t k = 0; k < t.size(); ++k)
      worst = std::max(worst, std::abs(y[k] / (0.1 * std::exp(c0 * t[k])) - 1.0));
  }
  for (double C : {0.5, 1.0, 1.5}) {
    for (double T : {0.5, 1.0, 2.0}) {
      const CoefficientSpec spec{CoefficientMode::affine, C, {}, {}};
      worst = std::max(worst, std::abs(stability_bound(0.1, spec, T) / (0.1 * std::exp(C * (T + T * T / 2))) - 1.0));
    }
  }
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 2.0), bump(0.0, 0.5);
  int monotone = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + trial % 30;
    const auto ts = linspace(0.0, 0.2 + u(rng), n);
    std::vector<double> c(n), F(n), c2(n), F2(n);
    for (int k = 0; k < n; ++k) {
      c[k] = u(rng);
      F[k] = u(rng);
      c2[k] = c[k] + bump(rng);
      F2[k] = F[k] + bump(rng);
    }
    const double kl0 = 0.1 * u(rng);
    const auto y = gronwall_integrate(kl0, c, F, ts);
    const auto yc = gronwall_integrate(kl0, c2, F, ts);
    const auto yf = gronwall_integrate(kl0, c, F2, ts);
    bool ok = true;
    for (int k = 0; k < n; ++k) ok = ok && yc[k] >= y[k] && yf[k] >= y[k];
    monotone += ok;
  }
  return {worst <= 1e-6 && monotone == 100,
          fmt::format("closed-form relative error {:.2e} (<= 1e-6), monotone in c and forcing on {}/100 series",
                      worst, monotone)};
}

Outcome certificate_soundness() {
  const InitialDensity f0(AnalyticDensity::maxwellian(3));
  TwinConfig tc;
  tc.initial = f0;
  tc.grid = default_grid(3, f0.extent(), 48);
  tc.particles = 8000;
  tc.sampling = Sampling::lattice;
  const std::size_t n = sample_ensemble(f0, tc.particles, tc.sampling, 0).size();
  tc.integrator.dt = 0.01;
  tc.integrator.t_end = 0.5;
  tc.integrator.kernel = KernelParams::coulomb(default_epsilon(n, 3, f0.spread()));
  tc.reference = ScoreField::blob(0.5);
  tc.mollifier = 0.5;
  tc.stride = 5;
  tc.options.c_abs = kCalibratedCAbs;
  const double quadrature_tol = 1e-5;

  int sound = 0, runs = 0;
  bool all_valid = true;
  std::vector<std::string> ratios;
  bool ratios_ok = true;
  for (auto kind : {OffsetField::Kind::constant, OffsetField::Kind::linear}) {
    std::vector<double> integrals;
    for (double offset : {0.05, 0.1, 0.2}) {
      tc.integrator.score = ScoreField::perturbed(tc.reference, {kind, offset, Vec::UnitX()});
      const TwinRun r = run_twin(tc);
      ++runs;
      // Soundness is asserted at T. At t = 0 the bound is kl0 = 0 while the two
      // discretizations already differ by ~1e-9, so interior rows are only reported.
      const bool ok = r.report.valid && r.report.final_measured_kl() <= r.report.final_bound();
      std::size_t below = 0;
      for (const auto& row : r.report.rows) below += row.measured_kl <= row.bound;
      sound += ok;
      all_valid = all_valid && r.report.valid;
      integrals.push_back(r.report.loss_integral);
      detail(fmt::format("{} offset {:.2f}: int L {:.6e}, final bound {:.4e}, measured KL {:.4e}, KL <= bound on "
                         "{}/{} rows, {}",
                         kind == OffsetField::Kind::constant ? "constant" : "linear", offset,
                         r.report.loss_integral, r.report.final_bound(), r.report.final_measured_kl(), below,
                         r.report.rows.size(),
                         r.report.valid ? "VALID" : "INVALID: " + r.report.invalid_reason));
    }
    for (std::size_t k = 1; k < integrals.size(); ++k) {
      const double q = integrals[k] / integrals[k - 1];
      ratios_ok = ratios_ok && std::abs(q - 4.0) <= 0.04;
      ratios.push_back(fmt::format("{:.4f}", q));
    }
  }
  tc.integrator.score = ScoreField::perturbed(tc.reference, {OffsetField::Kind::constant, 0.0, Vec::UnitX()});
  const TwinRun free = run_twin(tc);
  double free_bound = 0.0, free_kl = 0.0;
  for (const auto& row : free.report.rows) {
    free_bound = std::max(free_bound, row.bound);
    free_kl = std::max(free_kl, row.measured_kl);
  }
  detail(fmt::format("loss-free: max bound {:.3e}, max measured KL {:.3e}", free_bound, free_kl));
  const bool free_ok = free_bound <= quadrature_tol && free_kl <= quadrature_tol;
  return {sound == runs && all_valid && free_ok && ratios_ok,
          fmt::format("KL(f_T | g_T) <= bound on {}/{} perturbed runs; loss-free bound {:.2e} and KL {:.2e} (<= {:g}); doubling ratios "
                      "of int L {} (4 +- 1%)",
                      sound, runs, free_bound, free_kl, quadrature_tol, fmt::join(ratios, ", "))};
}

// Preset runs through the tool; reused by the envelope and entropy checks.
std::map<std::string, cli::Table> preset_runs;

const cli::Table& preset(const std::string& name) {
  auto it = preset_runs.find(name);
  if (it != preset_runs.end()) return it->second;
  const fs::path out = scratch("preset-" + name);
  if (run_cli("simulate", kConfigs / (name + ".ini"), out) != 0) throw Error("preset " + name + " failed");
  return preset_runs[name] = cli::read_table((out / "trajectory.csv").string());
}

Outcome fisher_envelope() {
  const cli::Table& t = preset("anisotropic");
  const EnvelopeReport e = fisher_growth_envelope(t.column("time"), t.column("fisher"), 0.1, 2.0);
  return {e.max_violation <= 0.05,
          fmt::format("I_3(t) ~ {:.4f} + {:.4f} t over [0.1, 2] ({} points), max violation {:.2f}% (<= 5%)", e.a, e.b,
                      e.points, 100 * e.max_violation)};
}

Outcome entropy_monotone() {
  double worst = -INFINITY;
  std::vector<std::string> parts;
  for (const char* name : {"maxwellian", "gaussian-blob", "two-bump", "anisotropic"}) {
    const cli::Table& t = preset(name);
    const auto time = t.column("time"), h = t.column("entropy");
    double rate = 0.0;
    for (std::size_t k = 1; k < h.size(); ++k) rate = std::max(rate, (h[k] - h[k - 1]) / (time[k] - time[k - 1]));
    worst = std::max(worst, rate);
    parts.push_back(fmt::format("{} {:.2e} (H {:.4f} -> {:.4f})", name, rate, h.front(), h.back()));
  }
  return {worst <= 1e-3, fmt::format("max entropy increase rate per unit time: {} (<= 1e-3)", fmt::join(parts, ", "))};
}

Outcome determinism() {
  const fs::path dir = scratch("determinism");
  const fs::path cfg = dir / "run.ini";
  std::ofstream(cfg) << "[initial]\nkind = mixture\ncomponents = 0.5 -1,0,0 0.8; 0.5 1,0,0 0.8\n"
                        "[particles]\ncount = 1024\nsampling = random\n"
                        "[integrator]\ndt = 0.01\nt_end = 0.2\nstride = 2\n"
                        "[certificate]\nmode = self\n";
  if (run_cli("certify", cfg, dir / "a", true, 42) != 0 || run_cli("certify", cfg, dir / "b", true, 42) != 0)
    return {false, "tool run failed"};
  bool same = true;
  for (const char* f : {"trajectory.csv", "certificate.csv"}) {
    const std::string a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
    same = same && !a.empty() && a == b;
    detail(fmt::format("{}: {} bytes, {}", f, a.size(), a == b ? "identical" : "DIFFERENT"));
  }
  return {same, same ? "trajectory.csv and certificate.csv byte-identical across two runs"
                     : "outputs differ between identical runs"};
}

}  // namespace

int main() {
  fmt::print("landau-cert {} acceptance\n", cli::kVersion);
  criterion(1, "kernel algebra", kernel_algebra);
  criterion(2, "structural conservation", conservation);
  criterion(3, "equilibrium stationarity", stationarity);
  criterion(4, "oracle functional accuracy", oracle_accuracy);
  criterion(5, "inequality suite", inequality_suite);
  criterion(6, "coercivity", coercivity);
  criterion(7, "solver-oracle agreement", solver_oracle);
  criterion(8, "Gronwall engine", gronwall);
  criterion(9, "certificate soundness", certificate_soundness);
  criterion(10, "Fisher envelope", fisher_envelope);
  criterion(11, "entropy monotonicity", entropy_monotone);
  criterion(12, "determinism", determinism);
  fmt::print("{} of 12 criteria passed\n", 12 - failures);
  return failures == 0 ? 0 : 1;
}
