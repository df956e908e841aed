#pragma once

#include "landau/certificate.hpp"
#include "landau/oracle.hpp"
#include "landau/sampling.hpp"
#include "landau/transport.hpp"

#include <functional>
#include <optional>

namespace landau {

struct ParticleDiagnostics {
  std::optional<GridSpec> grid;  // for the mollified entropy and sup norm
  double kde_bandwidth = 0.0;    // psi_delta for entropy, sup norm and I_s; 0 skips them
  double weight_exponent = 3.0;
  long stride = 1;                          // steps between rows
  std::optional<ScoreField> reference;      // loss column against this score
  bool self_ratio = false;                  // ratio / coefficient columns from a delta/2 estimate
  double c_abs = kCalibratedCAbs;
};

/// One diagnostic row for a particle state.
DiagnosticRow particle_row(const ParticleEnsemble& ensemble, double time, const IntegratorConfig& config,
                           const ParticleDiagnostics& diagnostics);

struct ParticleRun {
  TrajectoryRecord record;
  ParticleEnsemble final_state;
  long steps = 0;
};

using ParticleCallback = std::function<void(const DiagnosticRow&, const ParticleEnsemble&, long step)>;
using SnapshotCallback = std::function<void(long step, double time, const ParticleEnsemble&)>;

/// Integrates to config.t_end in round(t_end / dt) steps, emitting a row at
/// step 0, every stride steps, and at the end.
ParticleRun run_particles(const ParticleEnsemble& initial, const IntegratorConfig& config,
                          const ParticleDiagnostics& diagnostics, const ParticleCallback& on_row = {},
                          const SnapshotCallback& on_snapshot = {});

struct OracleConfig {
  KernelParams kernel = KernelParams::coulomb();
  double dt = 0.0;          // 0 picks a stable step that divides the output interval
  double t_end = 0.0;
  double output_interval = 0.1;
  double c_stab = 0.15;
  double weight_exponent = 3.0;
};

struct OracleRun {
  TrajectoryRecord record;
  std::vector<GridDensity> states;  // one per row when requested
  double clipped_mass = 0.0;
  double dt = 0.0;
};

using OracleCallback = std::function<void(const DiagnosticRow&, const GridDensity&)>;

DiagnosticRow grid_row(const GridDensity& f, double time, double weight_exponent);

OracleRun run_oracle(const GridDensity& initial, const OracleConfig& config, bool keep_states = false,
                     const OracleCallback& on_row = {});

struct TwinConfig {
  InitialDensity initial;       // f_0 = g_0
  GridSpec grid;                // oracle and measurement grid
  double oracle_dt = 0.0;
  double c_stab = 0.15;
  std::size_t particles = 8192;
  Sampling sampling = Sampling::lattice;
  std::uint64_t seed = 0;
  IntegratorConfig integrator;  // particle dynamics for g
  ScoreField reference = ScoreField::blob(0.5);  // stands in for grad log g in the loss
  double mollifier = 0.5;       // both f and g are mollified before KL and R are measured
  long stride = 5;              // particle steps between certificate rows
  CertificateOptions options;
  double kl0 = 0.0;             // f_0 = g_0; the measured KL(0) is still reported
};

struct TwinRun {
  CertificateReport report;
  TrajectoryRecord particles;
  TrajectoryRecord oracle;
};

TwinRun run_twin(const TwinConfig& config);

}  // namespace landau
