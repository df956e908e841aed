#include "landau/cli.hpp"

#include "landau/config.hpp"
#include "landau/simulation.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace landau::cli {

namespace fs = std::filesystem;

namespace {

struct Column {
  std::string name;
  std::string unit;
};

const std::vector<Column>& trajectory_columns() {
  static const std::vector<Column> cols = {
      {"time", "time"},          {"mass", "1"},           {"momentum_x", "velocity"}, {"momentum_y", "velocity"},
      {"momentum_z", "velocity"}, {"energy", "velocity^2"}, {"entropy", "1"},          {"fisher", "velocity^(s-2)"},
      {"moment", "velocity^s"},  {"linf", "velocity^-d"}, {"max_speed", "velocity/time"},
      {"loss", "1/time"},        {"ratio", "1"},          {"coefficient", "1/time"},
  };
  return cols;
}

const std::vector<Column>& certificate_columns() {
  static const std::vector<Column> cols = {
      {"time", "time"},        {"loss", "1/time"},  {"ratio", "1"},       {"forcing", "1/time"},
      {"coefficient", "1/time"}, {"bound", "1"},     {"envelope", "1"},    {"measured_kl", "1"},
      {"truncated_mass", "1"},
  };
  return cols;
}

const std::vector<Column>& verify_columns() {
  static const std::vector<Column> cols = {
      {"pair", "1"},           {"lhs", "1/time"},          {"dissipation", "1/time"},   {"cross_A", "1/time"},
      {"cross_b", "1/time"},   {"remainder_A", "1/time"},  {"remainder_b", "1/time"},   {"margin_raw", "1/time"},
      {"margin_raw_refined", "1/time"}, {"literal_margin", "1/time"}, {"identity_residual", "1/time"},
      {"c_coe", "1"},          {"kl", "1"},                {"bracket", "1/time"},       {"margin_kl", "1/time"},
      {"pinsker_l2_margin", "velocity^-d"}, {"pinsker_l1_margin", "1"}, {"valid", "1"},
  };
  return cols;
}

const std::vector<Column>& diagnose_columns() {
  static const std::vector<Column> cols = {
      {"step", "1"},       {"time", "time"},        {"mass", "1"},          {"momentum_x", "velocity"},
      {"momentum_y", "velocity"}, {"momentum_z", "velocity"}, {"energy", "velocity^2"}, {"entropy", "1"},
      {"fisher", "velocity^(s-2)"}, {"moment", "velocity^s"}, {"l2", "velocity^(-d/2)"}, {"l3", "velocity^(-2d/3)"},
      {"linf", "velocity^-d"}, {"h2_5", "velocity^-d"},
  };
  return cols;
}

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

class TableWriter {
 public:
  TableWriter(const fs::path& path, const std::string& kind, const std::vector<std::string>& header,
              const std::vector<Column>& columns)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error(fmt::format("cannot write '{}'", path.string()));
    out_ << "# landau-cert " << kind << " schema " << kSchemaVersion << "\n";
    for (const auto& h : header) out_ << "# " << h << "\n";
    std::string units = "# units:";
    std::string names;
    for (std::size_t k = 0; k < columns.size(); ++k) {
      units += " " + columns[k].name + "[" + columns[k].unit + "]";
      names += (k ? "," : "") + columns[k].name;
    }
    out_ << units << "\n" << names << "\n";
    out_.flush();
  }

  void row(const std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << number(values[k]);
    out_ << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
};

std::vector<double> trajectory_values(const DiagnosticRow& r) {
  return {r.time,    r.mass,   r.momentum[0], r.momentum[1], r.momentum[2], r.energy, r.entropy,
          r.fisher,  r.moment, r.linf,        r.max_speed,   r.loss,        r.ratio,  r.coefficient};
}

struct Setup {
  Config cfg;
  std::string command;
  std::uint64_t seed = 0;
  ExecPolicy exec;
  fs::path outdir;
  InitialDensity initial;
  int dim = 3;
  double spread = 1.0;
  double extent = 1.0;

  std::vector<std::string> header() const {
    std::vector<std::string> h = {
        fmt::format("version: {}", kVersion),
        fmt::format("command: {}", command),
        fmt::format("seed: {}", seed),
        fmt::format("deterministic: {}", exec.deterministic),
        fmt::format("config_hash: {:016x}", cfg.hash()),
    };
    for (const auto& l : cfg.lines()) h.push_back("config: " + l);
    for (const auto& [k, v] : cfg.resolved()) h.push_back(fmt::format("resolved: {} = {}", k, v));
    return h;
  }
};

InitialDensity make_initial(const Config& cfg) {
  const long dim = cfg.integer("initial.dim");
  if (dim != 2 && dim != 3) throw ConfigError(fmt::format("initial.dim: must be 2 or 3, got {}", dim));
  const std::string kind = cfg.string("initial.kind");
  Vec mean = cfg.vector("initial.mean");
  if (dim == 2) mean[2] = 0.0;
  auto checked = [&](AnalyticDensity d) {
    const auto v = validate(d);
    if (!v.empty()) throw ConfigError(fmt::format("initial.{}: {}", kind == "mixture" ? "components" : "variance", v[0]));
    return InitialDensity(std::move(d));
  };
  if (kind == "gaussian") {
    const double var = cfg.real("initial.variance");
    if (!(var > 0.0)) throw ConfigError(fmt::format("initial.variance: must be > 0, got {}", var));
    return checked(AnalyticDensity::gaussian(static_cast<int>(dim), mean, var));
  }
  if (kind == "mixture")
    return checked(AnalyticDensity(static_cast<int>(dim), parse_components(cfg.string("initial.components"), dim)));
  if (kind == "anisotropic") {
    Vec var = cfg.vector("initial.variances");
    if (dim == 2) var[2] = 1.0;
    for (int k = 0; k < dim; ++k)
      if (!(var[k] > 0.0)) throw ConfigError(fmt::format("initial.variances: component {} must be > 0", k));
    return InitialDensity(AnisotropicGaussian{static_cast<int>(dim), mean, var});
  }
  throw ConfigError(fmt::format("initial.kind: unknown kind '{}' (expected gaussian, mixture or anisotropic)", kind));
}

Setup make_setup(const Options& opt, Config cfg) {
  Setup s;
  s.command = opt.command;
  if (opt.seed) cfg.set("run.seed", std::to_string(*opt.seed));
  if (opt.deterministic) cfg.set("run.deterministic", "true");
  if (opt.threads) cfg.set("run.threads", std::to_string(*opt.threads));
  s.seed = cfg.u64("run.seed");
  s.exec.deterministic = cfg.boolean("run.deterministic");
  s.exec.threads = static_cast<int>(cfg.integer("run.threads"));
  if (s.exec.threads < 1) throw ConfigError("run.threads: must be >= 1");
  s.outdir = opt.out ? *opt.out : cfg.string("run.output");
  s.initial = make_initial(cfg);
  s.dim = s.initial.dim();
  s.spread = s.initial.spread();
  s.extent = s.initial.extent();
  s.cfg = std::move(cfg);
  return s;
}

KernelParams make_kernel(Setup& s, std::size_t n) {
  KernelParams p;
  p.d = s.dim;
  p.gamma = s.cfg.real("kernel.gamma");
  if (s.cfg.is_auto("kernel.epsilon")) {
    p.epsilon = default_epsilon(n, s.dim, s.spread, s.cfg.real("kernel.epsilon_factor"));
    s.cfg.resolve("kernel.epsilon", number(p.epsilon));
  } else {
    p.epsilon = s.cfg.real("kernel.epsilon");
  }
  const auto v = validate(p);
  if (!v.empty()) throw ConfigError("kernel: " + v[0]);
  return p;
}

double score_bandwidth(Setup& s, std::size_t n) {
  if (!s.cfg.is_auto("score.bandwidth")) return s.cfg.real("score.bandwidth");
  const double bw = default_bandwidth(n, s.dim, s.spread, s.cfg.real("score.bandwidth_constant"));
  s.cfg.resolve("score.bandwidth", number(bw));
  return bw;
}

ScoreField simple_score(Setup& s, const std::string& kind, std::size_t n, const char* field) {
  if (kind == "blob") return ScoreField::blob(score_bandwidth(s, n));
  if (kind == "analytic") {
    if (!s.initial.analytic())
      throw ConfigError(fmt::format("{}: analytic score needs an isotropic initial density", field));
    return ScoreField::analytic(*s.initial.analytic());
  }
  throw ConfigError(fmt::format("{}: unknown score kind '{}' (expected blob or analytic)", field, kind));
}

struct Scores {
  ScoreField field;
  ScoreField base;
  bool perturbed = false;
};

Scores make_score(Setup& s, std::size_t n) {
  const std::string kind = s.cfg.string("score.kind");
  if (kind != "perturbed") {
    ScoreField f = simple_score(s, kind, n, "score.kind");
    return {f, f, false};
  }
  ScoreField base = simple_score(s, s.cfg.string("score.base"), n, "score.base");
  OffsetField off;
  const std::string ok = s.cfg.string("score.offset_kind");
  if (ok == "constant")
    off.kind = OffsetField::Kind::constant;
  else if (ok == "linear")
    off.kind = OffsetField::Kind::linear;
  else
    throw ConfigError(fmt::format("score.offset_kind: unknown kind '{}' (expected constant or linear)", ok));
  off.magnitude = s.cfg.real("score.offset");
  const Vec dir = s.cfg.vector("score.offset_direction");
  if (!(dir.norm() > 0.0)) throw ConfigError("score.offset_direction: must be nonzero");
  off.direction = dir.normalized();
  return {ScoreField::perturbed(base, off), base, true};
}

double kde_bandwidth(Setup& s, std::size_t n, const ScoreField& base) {
  if (!s.cfg.is_auto("diagnostics.kde_bandwidth")) return s.cfg.real("diagnostics.kde_bandwidth");
  const double bw = base.kind() == ScoreField::Kind::blob ? base.bandwidth()
                                                           : default_bandwidth(n, s.dim, s.spread, 1.0);
  s.cfg.resolve("diagnostics.kde_bandwidth", number(bw));
  return bw;
}

GridSpec diagnostics_grid(Setup& s) {
  GridSpec g;
  g.dim = s.dim;
  g.points = static_cast<int>(s.cfg.integer("diagnostics.grid_points"));
  g.half_width = s.cfg.is_auto("diagnostics.half_width") ? 6.0 * s.extent : s.cfg.real("diagnostics.half_width");
  if (g.points < 3) throw ConfigError("diagnostics.grid_points: must be >= 3");
  if (!(g.half_width > 0.0)) throw ConfigError("diagnostics.half_width: must be > 0");
  return g;
}

GridSpec oracle_grid(Setup& s) {
  GridSpec g = default_grid(s.dim, s.extent,
                            s.cfg.is_auto("oracle.grid_points") ? 0 : static_cast<int>(s.cfg.integer("oracle.grid_points")));
  if (!s.cfg.is_auto("oracle.half_width")) g.half_width = s.cfg.real("oracle.half_width");
  if (g.points < 3) throw ConfigError("oracle.grid_points: must be >= 3");
  if (!(g.half_width > 0.0)) throw ConfigError("oracle.half_width: must be > 0");
  s.cfg.resolve("oracle.grid", fmt::format("{}^{} on [-{}, {}]", g.points, g.dim, g.half_width, g.half_width));
  return g;
}

IntegratorConfig make_integrator(Setup& s, const ScoreField& score, const KernelParams& kernel) {
  IntegratorConfig c;
  c.scheme = parse_scheme(s.cfg.string("integrator.scheme"));
  c.dt = s.cfg.real("integrator.dt");
  c.t_end = s.cfg.real("integrator.t_end");
  if (!(c.dt > 0.0)) throw ConfigError(fmt::format("integrator.dt: must be > 0, got {}", c.dt));
  if (!(c.t_end >= 0.0)) throw ConfigError(fmt::format("integrator.t_end: must be >= 0, got {}", c.t_end));
  c.score = score;
  c.kernel = kernel;
  c.snapshot_stride = static_cast<int>(s.cfg.integer("integrator.snapshot_stride"));
  c.exec = s.exec;
  return c;
}

double c_abs_value(Setup& s) {
  if (!s.cfg.is_auto("certificate.c_abs")) return s.cfg.real("certificate.c_abs");
  s.cfg.resolve("certificate.c_abs", number(kCalibratedCAbs));
  return kCalibratedCAbs;
}

RatioMode certificate_mode(const Setup& s) { return parse_ratio_mode(s.cfg.string("certificate.mode")); }

std::optional<ScoreField> reference_score(Setup& s, const Scores& sc, std::size_t n, RatioMode mode) {
  std::string ref = s.cfg.string("certificate.reference");
  if (ref == "base") return sc.base;
  if (ref == "analytic") return simple_score(s, "analytic", n, "certificate.reference");
  if (ref == "blob") {
    double bw;
    if (s.cfg.is_auto("certificate.reference_bandwidth")) {
      bw = 0.5 * (sc.base.kind() == ScoreField::Kind::blob ? sc.base.bandwidth() : score_bandwidth(s, n));
      s.cfg.resolve("certificate.reference_bandwidth", number(bw));
    } else {
      bw = s.cfg.real("certificate.reference_bandwidth");
    }
    return ScoreField::blob(bw);
  }
  if (ref == "auto") {
    s.cfg.resolve("certificate.reference", mode == RatioMode::twin ? "base" : "blob");
    if (mode == RatioMode::twin) return sc.base;
    s.cfg.set("certificate.reference", "blob");
    auto out = reference_score(s, sc, n, mode);
    s.cfg.set("certificate.reference", "auto");
    return out;
  }
  throw ConfigError(fmt::format("certificate.reference: unknown '{}' (expected auto, base, analytic or blob)", ref));
}

void write_certificate(const Setup& s, const CertificateReport& r, const fs::path& path) {
  std::vector<std::string> h = s.header();
  h.push_back(fmt::format("certificate.mode: {}", to_string(r.mode)));
  h.push_back(fmt::format("certificate.kl0: {}", number(r.kl0)));
  h.push_back(fmt::format("certificate.c_abs: {}", number(r.c_abs)));
  h.push_back(fmt::format("certificate.envelope_constant: {}", number(r.envelope_constant)));
  h.push_back(fmt::format("certificate.loss_integral: {}", number(r.loss_integral)));
  h.push_back(fmt::format("certificate.max_truncated_mass: {}", number(r.max_truncated_mass)));
  h.push_back(fmt::format("certificate.status: {}", r.valid ? "VALID" : "INVALID (" + r.invalid_reason + ")"));
  for (const auto& x : r.heuristics) h.push_back("heuristic: " + x);
  TableWriter w(path, "certificate", h, certificate_columns());
  for (const auto& row : r.rows)
    w.row({row.time, row.loss, row.ratio, row.forcing, row.coefficient, row.bound, row.envelope, row.measured_kl,
           row.truncated_mass});
}

struct Simulated {
  ParticleRun run;
  std::size_t n = 0;
};

Simulated simulate_into(Setup& s, const fs::path& trajectory_path, bool certificate_columns_on, std::ostream& out) {
  const std::size_t requested = static_cast<std::size_t>(s.cfg.integer("particles.count"));
  const Sampling sampling = parse_sampling(s.cfg.string("particles.sampling"));
  const ParticleEnsemble e0 = sample_ensemble(s.initial, requested, sampling, s.seed);
  const std::size_t n = e0.size();
  if (n != requested) s.cfg.resolve("particles.count", std::to_string(n));

  const KernelParams kernel = make_kernel(s, n);
  const Scores sc = make_score(s, n);
  const IntegratorConfig integ = make_integrator(s, sc.field, kernel);

  ParticleDiagnostics diag;
  diag.kde_bandwidth = kde_bandwidth(s, n, sc.base);
  if (s.cfg.boolean("diagnostics.entropy") || certificate_columns_on) diag.grid = diagnostics_grid(s);
  diag.weight_exponent = s.cfg.real("diagnostics.weight_exponent");
  diag.stride = s.cfg.integer("integrator.stride");
  if (diag.stride < 1) throw ConfigError("integrator.stride: must be >= 1");
  const RatioMode mode = certificate_mode(s);
  if (certificate_columns_on) {
    diag.reference = reference_score(s, sc, n, mode);
    diag.self_ratio = true;
    diag.c_abs = c_abs_value(s);
  } else if (sc.perturbed) {
    diag.reference = sc.base;
  }

  TableWriter traj(trajectory_path, "trajectory", s.header(), trajectory_columns());
  std::unique_ptr<std::ofstream> snaps;
  if (integ.snapshot_stride > 0) {
    snaps = std::make_unique<std::ofstream>(s.outdir / "snapshots.jsonl", std::ios::binary);
    if (!*snaps) throw Error("cannot write snapshots.jsonl");
  }
  Simulated result;
  result.n = n;
  result.run = run_particles(
      e0, integ, diag, [&](const DiagnosticRow& row, const ParticleEnsemble&, long) { traj.row(trajectory_values(row)); },
      [&](long step, double time, const ParticleEnsemble& e) {
        for (std::size_t i = 0; i < e.size(); ++i) {
          nlohmann::ordered_json j;
          j["step"] = step;
          j["time"] = time;
          j["i"] = i;
          j["v"] = {e.velocities[0][i], e.velocities[1][i], e.velocities[2][i]};
          j["w"] = e.weights[i];
          *snaps << j.dump() << "\n";
        }
        snaps->flush();
      });
  out << fmt::format("simulate: {} particles, {} steps, wrote {}\n", n, result.run.steps, trajectory_path.string());
  return result;
}

int cmd_simulate(Setup& s, std::ostream& out) {
  simulate_into(s, s.outdir / "trajectory.csv", false, out);
  return ok;
}

int cmd_oracle(Setup& s, std::ostream& out) {
  const GridSpec grid = oracle_grid(s);
  KernelParams kernel;
  kernel.d = s.dim;
  kernel.gamma = s.cfg.real("kernel.gamma");
  kernel.epsilon = s.cfg.is_auto("kernel.epsilon") ? 0.0 : s.cfg.real("kernel.epsilon");
  s.cfg.resolve("oracle.kernel_epsilon", number(kernel.epsilon));
  const auto v = validate(kernel);
  if (!v.empty()) throw ConfigError("kernel: " + v[0]);
  OracleConfig oc;
  oc.kernel = kernel;
  oc.dt = s.cfg.real("oracle.dt");
  oc.t_end = s.cfg.real("oracle.t_end");
  oc.output_interval = s.cfg.real("oracle.output_interval");
  oc.c_stab = s.cfg.real("oracle.c_stab");
  oc.weight_exponent = s.cfg.real("diagnostics.weight_exponent");
  const GridDensity f0 = sample_grid(s.initial, grid);
  const fs::path path = s.outdir / "oracle_trajectory.csv";
  TableWriter traj(path, "trajectory", s.header(), trajectory_columns());
  const OracleRun run =
      run_oracle(f0, oc, false, [&](const DiagnosticRow& row, const GridDensity&) { traj.row(trajectory_values(row)); });
  out << fmt::format("oracle: {} rows, dt {}, clipped mass {:.3e}, wrote {}\n", run.record.rows.size(), run.dt,
                     run.clipped_mass, path.string());
  return ok;
}

int cmd_certify(Setup& s, std::ostream& out) {
  const RatioMode mode = certificate_mode(s);
  const double c_abs = c_abs_value(s);
  CertificateOptions opts;
  opts.c_abs = c_abs;
  opts.truncation_budget = s.cfg.real("certificate.truncation_budget");
  opts.assumed_ratio = s.cfg.real("certificate.assumed_ratio");
  const fs::path cert_path = s.outdir / "certificate.csv";

  if (mode == RatioMode::twin) {
    TwinConfig tc;
    tc.initial = s.initial;
    tc.grid = oracle_grid(s);
    tc.oracle_dt = s.cfg.real("oracle.dt");
    tc.c_stab = s.cfg.real("oracle.c_stab");
    tc.particles = static_cast<std::size_t>(s.cfg.integer("particles.count"));
    tc.sampling = parse_sampling(s.cfg.string("particles.sampling"));
    tc.seed = s.seed;
    const std::size_t n = sample_ensemble(s.initial, tc.particles, tc.sampling, s.seed).size();
    const KernelParams kernel = make_kernel(s, n);
    const Scores sc = make_score(s, n);
    tc.integrator = make_integrator(s, sc.field, kernel);
    tc.reference = *reference_score(s, sc, n, mode);
    tc.mollifier = s.cfg.real("certificate.mollifier");
    tc.stride = s.cfg.integer("certificate.stride");
    tc.options = opts;
    tc.kl0 = s.cfg.real("certificate.kl0");
    const TwinRun twin = run_twin(tc);
    write_certificate(s, twin.report, cert_path);
    TableWriter p(s.outdir / "twin_particles.csv", "trajectory", s.header(), trajectory_columns());
    for (const auto& r : twin.particles.rows) p.row(trajectory_values(r));
    TableWriter o(s.outdir / "twin_oracle.csv", "trajectory", s.header(), trajectory_columns());
    for (const auto& r : twin.oracle.rows) o.row(trajectory_values(r));
    out << fmt::format("certify (twin): final bound {:.6e}, measured KL {:.6e}, {}\n", twin.report.final_bound(),
                       twin.report.final_measured_kl(), twin.report.valid ? "VALID" : "INVALID");
    return ok;
  }

  CertificateInputs in;
  const std::string traj = s.cfg.string("certificate.trajectory");
  if (!traj.empty()) {
    const Table t = read_table(traj);
    in.times = t.column("time");
    in.loss = t.column("loss");
    in.ratio = t.column("ratio");
    in.coefficient = t.column("coefficient");
    s.cfg.resolve("certificate.source", traj);
  } else {
    const Simulated sim = simulate_into(s, s.outdir / "trajectory.csv", true, out);
    for (const auto& r : sim.run.record.rows) {
      in.times.push_back(r.time);
      in.loss.push_back(r.loss);
      in.ratio.push_back(r.ratio);
      in.coefficient.push_back(r.coefficient);
    }
  }
  for (std::size_t k = 0; k < in.times.size(); ++k) {
    if (!std::isfinite(in.loss[k]))
      throw ConfigError("certificate.trajectory: loss column is missing or not finite");
    if (!std::isfinite(in.coefficient[k]) || (mode == RatioMode::self && !std::isfinite(in.ratio[k])))
      throw ConfigError("certificate.trajectory: ratio/coefficient columns are missing or not finite");
  }
  if (mode == RatioMode::assumed) in.ratio.clear();
  const double kl0 = s.cfg.real("certificate.kl0");
  opts.heuristics.push_back(mode == RatioMode::self
                                ? "R(t) and c(t) compare the particle KDE at half bandwidth against the run's KDE"
                                : "R(t) is the user-assumed constant certificate.assumed_ratio");
  opts.heuristics.push_back("grad log g in the loss is a finer-bandwidth blob estimate");
  opts.heuristics.push_back(fmt::format("C_abs = {} calibrated on a Gaussian-mixture suite", c_abs));
  const CertificateReport rep = error_bound(in, mode, kl0, opts);
  write_certificate(s, rep, cert_path);
  out << fmt::format("certify ({}): final bound {:.6e}, {}\n", to_string(mode), rep.final_bound(),
                     rep.valid ? "VALID" : "INVALID");
  return ok;
}

std::vector<std::pair<AnalyticDensity, AnalyticDensity>> verify_pairs(const Config& cfg) {
  const std::string manifest = cfg.string("verify.manifest");
  if (manifest.empty())
    return mixture_suite(static_cast<std::size_t>(cfg.integer("verify.pairs")), cfg.u64("verify.seed"), 3);
  std::ifstream in(manifest);
  if (!in) throw ConfigError(fmt::format("verify.manifest: cannot open '{}'", manifest));
  std::vector<std::pair<AnalyticDensity, AnalyticDensity>> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto bar = line.find('|');
    if (bar == std::string::npos) throw ConfigError(fmt::format("verify.manifest: line '{}' has no '|'", line));
    AnalyticDensity f(3, parse_components(line.substr(0, bar), 3));
    AnalyticDensity g(3, parse_components(line.substr(bar + 1), 3));
    for (const auto* d : {&f, &g}) {
      const auto v = validate(*d);
      if (!v.empty()) throw ConfigError(fmt::format("verify.manifest: {}", v[0]));
    }
    out.emplace_back(std::move(f), std::move(g));
  }
  return out;
}

int cmd_verify(Setup& s, std::ostream& out) {
  const auto pairs = verify_pairs(s.cfg);
  const GridSpec grid{3, static_cast<int>(s.cfg.integer("verify.grid_points")), s.cfg.real("verify.half_width")};
  const long refine = s.cfg.integer("verify.refine_points");
  const double c_abs = c_abs_value(s);
  TableWriter w(s.outdir / "verify.csv", "verify", s.header(), verify_columns());
  std::size_t failures = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [f, g] = pairs[k];
    const SampledDensity fs = SampledDensity::from_analytic(f, grid);
    const SampledDensity gs = SampledDensity::from_analytic(g, grid);
    const InequalityReport raw = verify_key_inequality(fs, gs, KernelParams::coulomb(), InequalityForm::raw);
    const InequalityReport kl = verify_key_inequality(fs, gs, KernelParams::coulomb(), InequalityForm::kl, c_abs);
    double refined = NAN;
    if (refine > 0) {
      const GridSpec fine{3, static_cast<int>(refine), grid.half_width};
      refined = verify_key_inequality(f, g, fine, KernelParams::coulomb(), InequalityForm::raw).margin;
    }
    const PinskerReport p = pinsker_check(fs, gs);
    const bool valid = raw.valid && p.holds;
    if (!valid || raw.margin < 0.0) ++failures;
    w.row({static_cast<double>(k), raw.lhs, raw.dissipation, raw.cross_A, raw.cross_b, raw.remainder_A,
           raw.remainder_b, raw.margin, refined, raw.literal_margin, raw.identity_residual, raw.c_coe, kl.kl,
           kl.bracket, kl.margin, p.l2_margin, p.l1_margin, valid ? 1.0 : 0.0});
  }
  out << fmt::format("verify: {} pairs, {} with a negative raw margin or failed check\n", pairs.size(), failures);
  return ok;
}

struct Snapshot {
  long step = 0;
  double time = 0.0;
  std::vector<Vec> points;
  std::vector<double> weights;
};

std::vector<Snapshot> read_snapshots(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("diagnose.input: cannot open '{}'", path));
  std::vector<Snapshot> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(fmt::format("diagnose.input: line {}: {}", lineno, e.what()));
    }
    const long step = j.at("step").get<long>();
    if (out.empty() || out.back().step != step) out.push_back({step, j.at("time").get<double>(), {}, {}});
    const auto& v = j.at("v");
    out.back().points.emplace_back(v.at(0).get<double>(), v.at(1).get<double>(), dim == 3 ? v.at(2).get<double>() : 0.0);
    out.back().weights.push_back(j.at("w").get<double>());
  }
  return out;
}

int cmd_diagnose(Setup& s, std::ostream& out) {
  const std::string input = s.cfg.string("diagnose.input");
  if (input.empty()) throw ConfigError("diagnose.input: no snapshot file given");
  const auto snaps = read_snapshots(input, s.dim);
  const GridSpec grid = diagnostics_grid(s);
  const double s_exp = s.cfg.real("diagnostics.weight_exponent");
  TableWriter w(s.outdir / "diagnose.csv", "diagnose", s.header(), diagnose_columns());
  for (const auto& snap : snaps) {
    const ParticleEnsemble e = ParticleEnsemble::from_points(s.dim, snap.points, snap.weights);
    const double bw = s.cfg.is_auto("diagnostics.kde_bandwidth")
                          ? default_bandwidth(e.size(), s.dim, s.spread, 1.0)
                          : s.cfg.real("diagnostics.kde_bandwidth");
    const GridDensity kde = ensemble_to_grid(e, bw, grid);
    FunctionalOptions fo;
    fo.fisher_exponent = s_exp;
    fo.moment_exponent = s_exp;
    const DensityFunctionals d = density_functionals(SampledDensity::from_grid(kde), fo);
    const ConservedQuantities q = conserved_quantities(e);
    w.row({static_cast<double>(snap.step), snap.time, q.mass, q.momentum[0], q.momentum[1], q.momentum[2], q.energy,
           d.entropy, d.fisher, d.moment, d.l2, d.l3, d.linf, d.h2_5});
  }
  out << fmt::format("diagnose: {} snapshots\n", snaps.size());
  return ok;
}

}  // namespace

std::vector<double> Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError(fmt::format("table has no column '{}'", name));
  const std::size_t k = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.at(k));
  return out;
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open table '{}'", path));
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.header.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (t.columns.empty()) {
      t.columns = cells;
      continue;
    }
    if (cells.size() != t.columns.size())
      throw ConfigError(fmt::format("{}: row {} has {} cells, expected {}", path, t.rows.size(), cells.size(),
                                    t.columns.size()));
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(c == "nan" ? NAN : std::stod(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string schema_text() {
  std::string s = fmt::format("landau-cert {} (file schema {})\n\nConfiguration keys ([section] key = value):\n",
                              kVersion, kSchemaVersion);
  for (const auto& k : config_schema())
    s += fmt::format("  {:<34} {:<7} default {:<10} {}\n", k.path, k.type, k.default_value.empty() ? "''" : k.default_value,
                     k.doc);
  s += "\nEnvironment overrides: LANDAU_<SECTION>_<KEY>, e.g. LANDAU_INTEGRATOR_DT=5e-4\n";
  auto table = [&](const char* file, const std::vector<Column>& cols) {
    s += fmt::format("\n{}:\n  '# '-prefixed header (version, command, seed, config_hash, config, resolved), a units\n"
                     "  line, then comma-separated columns:\n   ",
                     file);
    for (const auto& c : cols) s += " " + c.name + "[" + c.unit + "]";
    s += "\n";
  };
  table("trajectory.csv / oracle_trajectory.csv / twin_*.csv", trajectory_columns());
  table("certificate.csv", certificate_columns());
  table("verify.csv", verify_columns());
  table("diagnose.csv", diagnose_columns());
  s += "\nsnapshots.jsonl:\n  one JSON object per particle: {\"step\", \"time\", \"i\", \"v\": [x, y, z], \"w\"}\n";
  return s;
}

int run(const Options& opt, std::ostream& out, std::ostream& err) {
  try {
    static const std::vector<std::string> commands = {"simulate", "oracle", "certify", "verify", "diagnose"};
    if (std::find(commands.begin(), commands.end(), opt.command) == commands.end())
      throw ConfigError(fmt::format("unknown subcommand '{}'", opt.command));
    Config cfg = opt.config_path.empty() ? Config::from_string("", Config::current_env())
                                         : Config::from_file(opt.config_path);
    Setup s = make_setup(opt, std::move(cfg));
    fs::create_directories(s.outdir);
    if (opt.command == "simulate") return cmd_simulate(s, out);
    if (opt.command == "oracle") return cmd_oracle(s, out);
    if (opt.command == "certify") return cmd_certify(s, out);
    if (opt.command == "verify") return cmd_verify(s, out);
    return cmd_diagnose(s, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const NumericalAbort& e) {
    err << fmt::format("numerical abort at step {}: {}\n", e.step(), e.what());
    return numerical_abort;
  } catch (const StabilityViolation& e) {
    err << fmt::format("numerical abort: {} (suggested dt {})\n", e.what(), e.suggested_dt());
    return numerical_abort;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return failure;
  }
}

}  // namespace landau::cli
