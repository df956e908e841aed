#include "landau/transport.hpp"

#include "pair_sums.hpp"

#include <fmt/format.h>

namespace landau {

Scheme parse_scheme(const std::string& name) {
  if (name == "euler") return Scheme::euler;
  if (name == "heun") return Scheme::heun;
  throw ConfigError(fmt::format("unknown scheme '{}' (expected euler or heun)", name));
}

std::string to_string(Scheme s) { return s == Scheme::euler ? "euler" : "heun"; }

Columns velocity_field(const ParticleEnsemble& e, const KernelParams& params, const ExecPolicy& policy) {
  if (!e.scores) throw ConfigError("velocity_field: ensemble has no scores");
  Columns U = make_columns(e.size());
  if (policy.deterministic)
    detail::velocity_field_compensated(e, params, U, policy);
  else
    detail::velocity_field_fast(e, params, U, policy);
  if (e.dim == 2) std::fill(U[2].begin(), U[2].end(), 0.0);
  return U;
}

ParticleEnsemble with_scores(ParticleEnsemble e, const ScoreField& score, const ExecPolicy& policy) {
  e.scores = score.at_particles(e, policy);
  return e;
}

namespace {

double max_speed(const Columns& U) {
  double m = 0.0;
  for (std::size_t i = 0; i < U[0].size(); ++i)
    m = std::max(m, std::sqrt(U[0][i] * U[0][i] + U[1][i] * U[1][i] + U[2][i] * U[2][i]));
  return m;
}

Columns stage_field(const ParticleEnsemble& e, const IntegratorConfig& c) {
  return velocity_field(with_scores(e, c.score, c.exec), c.kernel, c.exec);
}

void check_finite(const ParticleEnsemble& e, long step_index) {
  for (int k = 0; k < 3; ++k)
    for (double x : e.velocities[k])
      if (!std::isfinite(x))
        throw NumericalAbort(fmt::format("non-finite velocity produced at step {}", step_index), step_index);
}

}  // namespace

ParticleEnsemble step(const ParticleEnsemble& e, const IntegratorConfig& c, long step_index, StepInfo* info) {
  ParticleEnsemble next = e;
  next.scores.reset();
  const std::size_t n = e.size();
  const double dt = c.dt;
  const Columns U0 = stage_field(e, c);
  const double initial_speed = max_speed(U0);
  double speed = initial_speed;
  if (c.scheme == Scheme::euler) {
    for (int k = 0; k < 3; ++k)
      for (std::size_t i = 0; i < n; ++i) next.velocities[k][i] = e.velocities[k][i] + dt * U0[k][i];
  } else {
    ParticleEnsemble mid = next;
    for (int k = 0; k < 3; ++k)
      for (std::size_t i = 0; i < n; ++i) mid.velocities[k][i] = e.velocities[k][i] + dt * U0[k][i];
    check_finite(mid, step_index);
    const Columns U1 = stage_field(mid, c);
    speed = std::max(speed, max_speed(U1));
    for (int k = 0; k < 3; ++k)
      for (std::size_t i = 0; i < n; ++i)
        next.velocities[k][i] = e.velocities[k][i] + 0.5 * dt * (U0[k][i] + U1[k][i]);
  }
  check_finite(next, step_index);
  if (info) {
    info->max_speed = speed;
    info->initial_speed = initial_speed;
  }
  return next;
}

ConservedQuantities conserved_quantities(const ParticleEnsemble& e) {
  CompensatedSum mass, energy;
  std::array<CompensatedSum, 3> mom;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double w = e.weights[i];
    mass.add(w);
    double v2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double v = e.velocities[k][i];
      mom[k].add(w * v);
      v2 += v * v;
    }
    energy.add(0.5 * w * v2);
  }
  return {mass.value(), Vec(mom[0].value(), mom[1].value(), mom[2].value()), energy.value()};
}

double default_epsilon(std::size_t n, int d, double scale, double factor) {
  return factor * std::pow(static_cast<double>(n), -1.0 / d) * scale;
}

}  // namespace landau
