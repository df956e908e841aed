#include "landau/simulation.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace landau {

namespace {

double grid_entropy(const GridDensity& f) {
  CompensatedSum h;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    if (f.values[i] > 0.0) h.add(f.grid.weight(i) * f.values[i] * std::log(f.values[i]));
  return h.value();
}

double max_norm(const Columns& c) {
  double m = 0.0;
  for (std::size_t i = 0; i < c[0].size(); ++i)
    m = std::max(m, std::sqrt(c[0][i] * c[0][i] + c[1][i] * c[1][i] + c[2][i] * c[2][i]));
  return m;
}

long step_count(double t_end, double dt) {
  if (!(dt > 0.0)) throw ConfigError(fmt::format("integrator.dt must be > 0 (got {})", dt));
  if (t_end < 0.0) throw ConfigError(fmt::format("integrator.t_end must be >= 0 (got {})", t_end));
  return std::lround(t_end / dt);
}

}  // namespace

DiagnosticRow particle_row(const ParticleEnsemble& e, double time, const IntegratorConfig& config,
                           const ParticleDiagnostics& diag) {
  DiagnosticRow row;
  row.time = time;
  const ConservedQuantities q = conserved_quantities(e);
  row.mass = q.mass;
  row.momentum = q.momentum;
  row.energy = q.energy;

  CompensatedSum moment;
  for (std::size_t i = 0; i < e.size(); ++i) moment.add(e.weights[i] * std::pow(bracket(e.velocity(i)), diag.weight_exponent));
  row.moment = moment.value();

  const ParticleEnsemble scored = with_scores(e, config.score, config.exec);
  row.max_speed = max_norm(velocity_field(scored, config.kernel, config.exec));

  std::optional<GridDensity> kde;
  if (diag.kde_bandwidth > 0.0) {
    const Columns b = blob_score(e, diag.kde_bandwidth, config.exec);
    CompensatedSum fisher;
    for (std::size_t i = 0; i < e.size(); ++i)
      fisher.add(e.weights[i] * std::pow(bracket(e.velocity(i)), diag.weight_exponent) * column_at(b, i).squaredNorm());
    row.fisher = fisher.value();
    if (diag.grid) {
      kde = ensemble_to_grid(e, diag.kde_bandwidth, *diag.grid);
      row.entropy = grid_entropy(*kde);
      row.linf = *std::max_element(kde->values.begin(), kde->values.end());
    }
  }

  if (diag.reference) {
    const Columns ref = diag.reference->at_particles(e, config.exec);
    row.loss = score_matching_loss(e, *scored.scores, ref, conv_A_at_particles(e, config.kernel, config.exec));
  }

  if (diag.self_ratio) {
    if (!kde) throw ConfigError("self-mode ratio needs diagnostics.grid and a KDE bandwidth");
    const GridDensity fine = ensemble_to_grid(e, 0.5 * diag.kde_bandwidth, *diag.grid);
    const SampledDensity fs = SampledDensity::from_grid(fine);
    const SampledDensity gs = SampledDensity::from_grid(*kde);
    row.ratio = pair_functionals(fs, gs).sup_ratio;
    row.coefficient = measured_coefficient(fs, gs, diag.c_abs);
  }
  return row;
}

ParticleRun run_particles(const ParticleEnsemble& initial, const IntegratorConfig& config,
                          const ParticleDiagnostics& diag, const ParticleCallback& on_row,
                          const SnapshotCallback& on_snapshot) {
  const long nsteps = step_count(config.t_end, config.dt);
  const long stride = std::max(1L, diag.stride);
  ParticleRun run;
  run.record.weight_exponent = diag.weight_exponent;
  ParticleEnsemble e = initial;

  auto emit = [&](long k) {
    const DiagnosticRow row = particle_row(e, k * config.dt, config, diag);
    run.record.rows.push_back(row);
    if (on_row) on_row(row, e, k);
  };
  auto snapshot = [&](long k) {
    if (on_snapshot && config.snapshot_stride > 0 && k % config.snapshot_stride == 0) on_snapshot(k, k * config.dt, e);
  };

  emit(0);
  snapshot(0);
  for (long k = 1; k <= nsteps; ++k) {
    e = step(e, config, k);
    if (k % stride == 0 || k == nsteps) emit(k);
    snapshot(k);
  }
  run.final_state = std::move(e);
  run.steps = nsteps;
  return run;
}

DiagnosticRow grid_row(const GridDensity& f, double time, double weight_exponent) {
  FunctionalOptions opts;
  opts.fisher_exponent = weight_exponent;
  opts.moment_exponent = weight_exponent;
  const DensityFunctionals d = density_functionals(SampledDensity::from_grid(f), opts);
  DiagnosticRow row;
  row.time = time;
  row.mass = d.mass;
  row.momentum = d.momentum;
  row.energy = d.energy;
  row.entropy = d.entropy;
  row.fisher = d.fisher;
  row.moment = d.moment;
  row.linf = d.linf;
  row.max_speed = NAN;
  return row;
}

namespace {

// Advances f by `interval` in `substeps` equal steps; auto mode doubles the
// substep count when the stability bound tightens along the way.
GridDensity advance(const GridSolver& solver, GridDensity f, double interval, long& substeps, bool adaptive,
                    double& clipped) {
  for (;;) {
    try {
      GridDensity g = f;
      double local = 0.0;
      for (long s = 0; s < substeps; ++s) {
        GridStepLog log;
        g = solver.step(g, interval / substeps, &log);
        local += log.clipped_mass;
      }
      clipped += local;
      return g;
    } catch (const StabilityViolation&) {
      if (!adaptive) throw;
      substeps *= 2;
    }
  }
}

long initial_substeps(const GridSolver& solver, const GridDensity& f, double interval, double dt) {
  if (dt > 0.0) {
    const long n = std::lround(interval / dt);
    if (n < 1 || std::abs(n * dt - interval) > 1e-9 * interval)
      throw ConfigError(fmt::format("oracle.dt = {} does not divide the output interval {}", dt, interval));
    return n;
  }
  return std::max(1L, static_cast<long>(std::ceil(interval / (0.9 * solver.stable_dt(f.values)))));
}

}  // namespace

OracleRun run_oracle(const GridDensity& initial, const OracleConfig& cfg, bool keep_states,
                     const OracleCallback& on_row) {
  if (!(cfg.output_interval > 0.0)) throw ConfigError("oracle.output_interval must be > 0");
  if (cfg.t_end < 0.0) throw ConfigError("oracle.t_end must be >= 0");
  const long nout = std::lround(cfg.t_end / cfg.output_interval);
  const GridSolver solver(initial.grid, cfg.kernel, cfg.c_stab);
  OracleRun run;
  run.record.weight_exponent = cfg.weight_exponent;
  GridDensity f = initial;
  long substeps = initial_substeps(solver, f, cfg.output_interval, cfg.dt);

  auto emit = [&](long k) {
    const DiagnosticRow row = grid_row(f, k * cfg.output_interval, cfg.weight_exponent);
    run.record.rows.push_back(row);
    if (keep_states) run.states.push_back(f);
    if (on_row) on_row(row, f);
  };
  emit(0);
  for (long k = 1; k <= nout; ++k) {
    f = advance(solver, std::move(f), cfg.output_interval, substeps, cfg.dt <= 0.0, run.clipped_mass);
    emit(k);
  }
  run.dt = cfg.output_interval / substeps;
  return run;
}

TwinRun run_twin(const TwinConfig& cfg) {
  const IntegratorConfig& integ = cfg.integrator;
  const long nsteps = step_count(integ.t_end, integ.dt);
  const long stride = std::max(1L, cfg.stride);
  KernelParams exact = integ.kernel;
  exact.epsilon = 0.0;
  const GridSolver solver(cfg.grid, exact, cfg.c_stab);

  GridDensity f = sample_grid(cfg.initial, cfg.grid);
  ParticleEnsemble g = sample_ensemble(cfg.initial, cfg.particles, cfg.sampling, cfg.seed);

  TwinRun out;
  CertificateInputs in;
  double clipped = 0.0;

  auto measure = [&](long k) {
    const double t = k * integ.dt;
    const GridDensity ft = mollify(f, cfg.mollifier);
    const GridDensity gt = ensemble_to_grid(g, cfg.mollifier, cfg.grid);
    const SampledDensity fs = SampledDensity::from_grid(ft);
    const SampledDensity gs = SampledDensity::from_grid(gt);
    const PairFunctionals pf = pair_functionals(fs, gs);
    const double coeff = measured_coefficient(SampledDensity::from_grid(f), gs, cfg.options.c_abs);

    const Columns s = integ.score.at_particles(g, integ.exec);
    const Columns ref = cfg.reference.at_particles(g, integ.exec);
    const double loss = score_matching_loss(g, s, ref, conv_A_at_particles(g, integ.kernel, integ.exec));

    in.times.push_back(t);
    in.loss.push_back(loss);
    in.ratio.push_back(pf.sup_ratio);
    in.coefficient.push_back(coeff);
    in.truncated_mass.push_back(pf.truncated_mass);
    in.measured_kl.push_back(pf.kl);

    DiagnosticRow prow;
    prow.time = t;
    const ConservedQuantities q = conserved_quantities(g);
    prow.mass = q.mass;
    prow.momentum = q.momentum;
    prow.energy = q.energy;
    prow.loss = loss;
    prow.ratio = pf.sup_ratio;
    prow.coefficient = coeff;
    prow.entropy = density_functionals(gs).entropy;
    out.particles.rows.push_back(prow);
    out.oracle.rows.push_back(grid_row(f, t, out.oracle.weight_exponent));
  };

  measure(0);
  long last = 0;
  for (long k = 1; k <= nsteps; ++k) {
    g = step(g, integ, k);
    if (k % stride == 0 || k == nsteps) {
      const double interval = (k - last) * integ.dt;
      long sub = initial_substeps(solver, f, interval, cfg.oracle_dt);
      f = advance(solver, std::move(f), interval, sub, cfg.oracle_dt <= 0.0, clipped);
      last = k;
      measure(k);
    }
  }

  CertificateOptions opts = cfg.options;
  opts.heuristics.push_back(fmt::format(
      "f (grid oracle) and g (particles) are both mollified with a Gaussian of width {} before KL and R are measured",
      cfg.mollifier));
  opts.heuristics.push_back(fmt::format("grad log g in the loss is replaced by {}", cfg.reference.describe()));
  opts.heuristics.push_back(fmt::format("C_abs = {} calibrated on a Gaussian-mixture suite", opts.c_abs));
  opts.heuristics.push_back("R(t) is the sup of f/g over the grid support set {f, g > 1e-12 max}");
  if (clipped > 0.0) opts.heuristics.push_back(fmt::format("oracle clipped negative mass {:.3e}", clipped));
  out.report = error_bound(in, RatioMode::twin, cfg.kl0, opts);
  return out;
}

}  // namespace landau
