#pragma once

#include "landau/kernel.hpp"
#include "landau/parallel.hpp"
#include "landau/types.hpp"

#include <memory>
#include <string>

namespace landau {

/// Deliberate score perturbation: constant (c e) or linear (c (e . v) e).
struct OffsetField {
  enum class Kind { constant, linear };
  Kind kind = Kind::constant;
  double magnitude = 0.0;
  Vec direction = Vec::UnitX();

  Vec at(const Vec& v) const;
  OffsetField scaled(double factor) const { return {kind, magnitude * factor, direction}; }
};

class ScoreField {
 public:
  enum class Kind { analytic, blob, perturbed };

  static ScoreField analytic(AnalyticDensity density);
  static ScoreField blob(double bandwidth);
  static ScoreField perturbed(ScoreField base, OffsetField offset);

  Kind kind() const { return kind_; }
  double bandwidth() const { return bandwidth_; }
  const AnalyticDensity* density() const { return density_ ? density_.get() : nullptr; }
  const ScoreField* base() const { return base_ ? base_.get() : nullptr; }
  const OffsetField& offset() const { return offset_; }
  /// True if the field can be evaluated without an ensemble.
  bool pointwise() const;

  /// Scores at the ensemble's own particles (N x d).
  Columns at_particles(const ParticleEnsemble& ensemble, const ExecPolicy& policy = {}) const;
  /// Score at an arbitrary point; blob fields need the ensemble.
  Vec at(const Vec& v, const ParticleEnsemble* ensemble = nullptr) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::analytic;
  double bandwidth_ = 0.0;
  std::shared_ptr<const AnalyticDensity> density_;
  std::shared_ptr<const ScoreField> base_;
  OffsetField offset_;
};

Vec analytic_score(const AnalyticDensity& density, const Vec& v);

/// s_i = grad log(psi_delta * f_hat)(v_i) with an isotropic Gaussian mollifier.
Columns blob_score(const ParticleEnsemble& ensemble, double delta, const ExecPolicy& policy = {});
/// Same estimator evaluated at arbitrary target points.
Columns blob_score_at(const Columns& targets, const ParticleEnsemble& ensemble, double delta,
                      const ExecPolicy& policy = {});

/// delta = constant * scale * N^(-1/(d+4)).
double default_bandwidth(std::size_t n, int d, double scale, double constant = 1.0);

/// sum_i w_i (ref_i - s_i)^T (A * g)(v_i) (ref_i - s_i) over the ensemble.
/// Throws ConfigError when ref is null.
double score_matching_loss(const ScoreField& s, const ParticleEnsemble& g, const ScoreField* ref,
                           const KernelParams& params, const ExecPolicy& policy = {});

/// Same loss from precomputed scores and (A * g) at the particles.
double score_matching_loss(const ParticleEnsemble& g, const Columns& s, const Columns& ref, const MatrixField& Ag);

/// Trapezoid quadrature of (ref - s)^T (A * g)(ref - s) g over a grid. Both
/// fields must be pointwise (analytic, or perturbations of one).
double score_matching_loss(const ScoreField& s, const GridDensity& g, const ScoreField* ref,
                           const KernelParams& params);

}  // namespace landau
