#include "landau/score.hpp"

#include "pair_sums.hpp"

#include <fmt/format.h>

namespace landau {

Vec OffsetField::at(const Vec& v) const {
  if (kind == Kind::constant) return magnitude * direction;
  return magnitude * direction.dot(v) * direction;
}

ScoreField ScoreField::analytic(AnalyticDensity density) {
  ScoreField f;
  f.kind_ = Kind::analytic;
  f.density_ = std::make_shared<const AnalyticDensity>(std::move(density));
  return f;
}

ScoreField ScoreField::blob(double bandwidth) {
  if (!(bandwidth > 0.0)) throw ConfigError(fmt::format("blob bandwidth must be > 0 (got {})", bandwidth));
  ScoreField f;
  f.kind_ = Kind::blob;
  f.bandwidth_ = bandwidth;
  return f;
}

ScoreField ScoreField::perturbed(ScoreField base, OffsetField offset) {
  ScoreField f;
  f.kind_ = Kind::perturbed;
  f.base_ = std::make_shared<const ScoreField>(std::move(base));
  f.offset_ = offset;
  return f;
}

bool ScoreField::pointwise() const {
  switch (kind_) {
    case Kind::analytic: return true;
    case Kind::blob: return false;
    default: return base_->pointwise();
  }
}

Columns ScoreField::at_particles(const ParticleEnsemble& e, const ExecPolicy& policy) const {
  switch (kind_) {
    case Kind::blob: return blob_score(e, bandwidth_, policy);
    case Kind::analytic: {
      Columns s = make_columns(e.size());
      for (std::size_t i = 0; i < e.size(); ++i) set_column(s, i, density_->score(e.velocity(i)));
      return s;
    }
    default: {
      Columns s = base_->at_particles(e, policy);
      for (std::size_t i = 0; i < e.size(); ++i) {
        Vec o = offset_.at(e.velocity(i));
        if (e.dim == 2) o[2] = 0.0;
        set_column(s, i, column_at(s, i) + o);
      }
      return s;
    }
  }
}

Vec ScoreField::at(const Vec& v, const ParticleEnsemble* e) const {
  switch (kind_) {
    case Kind::analytic: return density_->score(v);
    case Kind::blob: {
      if (!e) throw ConfigError("blob score evaluation needs an ensemble");
      Columns t = make_columns(1);
      set_column(t, 0, v);
      return column_at(blob_score_at(t, *e, bandwidth_), 0);
    }
    default: {
      Vec o = offset_.at(v);
      if (e && e->dim == 2) o[2] = 0.0;
      return base_->at(v, e) + o;
    }
  }
}

std::string ScoreField::describe() const {
  switch (kind_) {
    case Kind::analytic: return fmt::format("analytic({} components)", density_->components().size());
    case Kind::blob: return fmt::format("blob(delta={})", bandwidth_);
    default:
      return fmt::format("perturbed({}, {} offset {} along ({}, {}, {}))", base_->describe(),
                         offset_.kind == OffsetField::Kind::constant ? "constant" : "linear", offset_.magnitude,
                         offset_.direction[0], offset_.direction[1], offset_.direction[2]);
  }
}

Vec analytic_score(const AnalyticDensity& density, const Vec& v) { return density.score(v); }

Columns blob_score_at(const Columns& targets, const ParticleEnsemble& e, double delta, const ExecPolicy& policy) {
  if (!(delta > 0.0)) throw ConfigError(fmt::format("blob bandwidth must be > 0 (got {})", delta));
  const std::size_t nt = targets[0].size();
  Columns num = make_columns(nt);
  std::vector<double> den(nt);
  if (policy.deterministic)
    detail::blob_sums_compensated(targets, e, delta, num, den, policy);
  else
    detail::blob_sums_fast(targets, e, delta, num, den, policy);
  Columns s = make_columns(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    if (!(den[i] > 0.0) || !std::isfinite(den[i]))
      throw Error(fmt::format("blob score: mollified density underflow at particle {}", i));
    for (int k = 0; k < e.dim; ++k) s[k][i] = num[k][i] / den[i];
  }
  return s;
}

Columns blob_score(const ParticleEnsemble& e, double delta, const ExecPolicy& policy) {
  return blob_score_at(e.velocities, e, delta, policy);
}

double default_bandwidth(std::size_t n, int d, double scale, double constant) {
  return constant * scale * std::pow(static_cast<double>(n), -1.0 / (d + 4));
}

double score_matching_loss(const ParticleEnsemble& g, const Columns& s, const Columns& ref, const MatrixField& Ag) {
  double loss = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec diff = column_at(ref, i) - column_at(s, i);
    if (g.dim == 2) diff[2] = 0.0;
    loss += g.weights[i] * diff.dot(Ag.at(i) * diff);
  }
  return std::max(loss, 0.0);
}

double score_matching_loss(const ScoreField& s, const ParticleEnsemble& g, const ScoreField* ref,
                           const KernelParams& params, const ExecPolicy& policy) {
  if (!ref) throw ConfigError("score_matching_loss: missing reference score");
  const Columns sv = s.at_particles(g, policy);
  const Columns rv = ref->at_particles(g, policy);
  return score_matching_loss(g, sv, rv, conv_A_at_particles(g, params, policy));
}

double score_matching_loss(const ScoreField& s, const GridDensity& g, const ScoreField* ref,
                           const KernelParams& params) {
  if (!ref) throw ConfigError("score_matching_loss: missing reference score");
  if (!s.pointwise() || !ref->pointwise())
    throw ConfigError("grid score_matching_loss needs pointwise score fields");
  const MatrixField Ag = conv_A_grid(g, params);
  double loss = 0.0;
  for (std::size_t i = 0; i < g.grid.size(); ++i) {
    if (g.values[i] <= 0.0) continue;
    const Vec v = g.grid.node(i);
    const Vec diff = ref->at(v) - s.at(v);
    loss += g.grid.weight(i) * g.values[i] * diff.dot(Ag.at(i) * diff);
  }
  return std::max(loss, 0.0);
}

}  // namespace landau
