#pragma once

#include "landau/parallel.hpp"
#include "landau/score.hpp"
#include "landau/types.hpp"

#include <string>

namespace landau {

enum class Scheme { euler, heun };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

struct IntegratorConfig {
  Scheme scheme = Scheme::heun;
  double dt = 1e-3;
  double t_end = 0.0;
  ScoreField score = ScoreField::blob(0.3);
  KernelParams kernel = KernelParams::coulomb();
  int snapshot_stride = 0;
  ExecPolicy exec;
};

/// U_i = -sum_j w_j A(v_i - v_j)(s_i - s_j); the ensemble must carry scores.
Columns velocity_field(const ParticleEnsemble& ensemble, const KernelParams& params, const ExecPolicy& policy = {});

/// Copy of the ensemble with scores evaluated from the field.
ParticleEnsemble with_scores(ParticleEnsemble ensemble, const ScoreField& score, const ExecPolicy& policy = {});

struct StepInfo {
  double max_speed = 0.0;      // max_i |U_i| over all stages
  double initial_speed = 0.0;  // max_i |U_i| at the incoming state
};

/// One explicit step. Scores are recomputed at every stage and weights are
/// untouched. Throws NumericalAbort (carrying step_index) on non-finite output.
ParticleEnsemble step(const ParticleEnsemble& ensemble, const IntegratorConfig& config, long step_index = 0,
                      StepInfo* info = nullptr);

struct ConservedQuantities {
  double mass = 0.0;
  Vec momentum = Vec::Zero();
  double energy = 0.0;
};

ConservedQuantities conserved_quantities(const ParticleEnsemble& ensemble);

/// Regularization length epsilon = factor * N^(-1/d) * scale.
double default_epsilon(std::size_t n, int d, double scale, double factor = 0.1);

}  // namespace landau
