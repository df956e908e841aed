#pragma once

#include "landau/types.hpp"

#include <cstdint>
#include <string>
#include <variant>

namespace landau {

/// Gaussian with diagonal covariance; used only as an initial condition.
struct AnisotropicGaussian {
  int dim = 3;
  Vec mean = Vec::Zero();
  Vec variances = Vec::Ones();

  double density(const Vec& v) const;
};

/// Initial velocity distribution: an isotropic analytic density or an
/// axis-aligned anisotropic Gaussian.
class InitialDensity {
 public:
  InitialDensity() = default;
  InitialDensity(AnalyticDensity d) : impl_(std::move(d)) {}
  InitialDensity(AnisotropicGaussian g) : impl_(std::move(g)) {}

  int dim() const;
  double density(const Vec& v) const;
  /// Largest |mean| component plus largest standard deviation.
  double extent() const;
  /// Root-mean-square per-axis standard deviation about the mean.
  double spread() const;
  const AnalyticDensity* analytic() const { return std::get_if<AnalyticDensity>(&impl_); }
  const AnisotropicGaussian* anisotropic() const { return std::get_if<AnisotropicGaussian>(&impl_); }

 private:
  std::variant<AnalyticDensity, AnisotropicGaussian> impl_;
};

enum class Sampling { random, qmc, lattice };

Sampling parse_sampling(const std::string& name);
std::string to_string(Sampling s);

/// N equal-weight samples (random, randomly shifted Sobol) or a weighted
/// cell-centered lattice quadrature ensemble (lattice; N is rounded to a
/// perfect d-th power and zero-weight nodes are dropped).
ParticleEnsemble sample_ensemble(const InitialDensity& density, std::size_t n, Sampling sampling,
                                 std::uint64_t seed);

/// Samples density values on every node of a grid.
GridDensity sample_grid(const InitialDensity& density, const GridSpec& grid, double mass_tolerance = 1e-3);

}  // namespace landau
