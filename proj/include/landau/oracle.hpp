#pragma once

#include "landau/kernel.hpp"
#include "landau/sampling.hpp"
#include "landau/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace landau {

/// Density values on a grid together with gradient, score and squared
/// Frobenius norm of the Hessian at every node. Exact for analytic densities,
/// second-order central differences for grid data.
struct SampledDensity {
  GridSpec grid;
  std::vector<double> values;
  Columns gradient;
  Columns score;                  // zero where values <= floor
  std::vector<double> hessian_sq;  // |grad^2 f|_F^2
  double floor = 0.0;              // support threshold used for the score

  static SampledDensity from_analytic(const AnalyticDensity& density, const GridSpec& grid,
                                      double floor_rel = 1e-12);
  static SampledDensity from_grid(const GridDensity& density, double floor_rel = 1e-12);

  GridDensity as_grid() const { return GridDensity{grid, values}; }
};

struct FunctionalOptions {
  double fisher_exponent = 0.0;  // s in I_s
  double moment_exponent = 3.0;  // s in int <v>^s f
  double floor_rel = 1e-12;      // support set {f > floor_rel * max f}
};

struct DensityFunctionals {
  double mass = 0.0;
  Vec momentum = Vec::Zero();
  double energy = 0.0;
  double entropy = 0.0;  // int f log f
  double moment = 0.0;   // int <v>^s f
  double fisher = 0.0;   // I_s
  double l1 = 0.0, l2 = 0.0, l3 = 0.0, linf = 0.0;
  double weighted_l1 = 0.0;      // || f <v>^3 ||_1
  double weighted_l2 = 0.0;      // || f <v>^3 ||_2
  double weighted_fisher = 0.0;  // || f <v>^3 |grad log f|^2 ||_1
  double h2_5 = 0.0;             // squared weighted Sobolev norm, weight <v>^10
};

struct PairFunctionals {
  double kl = 0.0;          // int f log(f/g) on the support set
  double l2_sq = 0.0;       // int |f - g|^2
  double l1 = 0.0;          // int |f - g|
  double sup_ratio = 0.0;   // max f/g on the support set
  double truncated_mass = 0.0;  // f-mass outside the support set
  std::size_t truncated_nodes = 0;
};

struct Functionals {
  DensityFunctionals f;
  std::optional<DensityFunctionals> g;
  std::optional<PairFunctionals> pair;
};

DensityFunctionals density_functionals(const SampledDensity& f, const FunctionalOptions& options = {});
PairFunctionals pair_functionals(const SampledDensity& f, const SampledDensity& g,
                                 const FunctionalOptions& options = {});
Functionals functionals(const SampledDensity& f, const SampledDensity* g, const FunctionalOptions& options = {});
Functionals functionals(const AnalyticDensity& f, const AnalyticDensity* g, const GridSpec& grid,
                        const FunctionalOptions& options = {});

/// dt refused by the explicit grid step; carries the largest admissible dt.
class StabilityViolation : public Error {
 public:
  StabilityViolation(const std::string& what, double suggested_dt) : Error(what), suggested_dt_(suggested_dt) {}
  double suggested_dt() const { return suggested_dt_; }

 private:
  double suggested_dt_;
};

struct GridStepLog {
  double clipped_mass = 0.0;
  std::size_t clipped_nodes = 0;
};

/// Conservative finite-volume discretization of
///   d_t f = div((A * f) grad f - (b * f) f)
/// with zero flux through the box boundary. Boundary nodes own half cells, so
/// the trapezoid integral of the right-hand side telescopes to zero.
class GridSolver {
 public:
  GridSolver(const GridSpec& grid, const KernelParams& params, double c_stab = 0.15,
             ConvolutionMethod method = ConvolutionMethod::fft);

  const GridSpec& grid() const { return convolver_.grid(); }
  const GridConvolver& convolver() const { return convolver_; }

  std::vector<double> rhs(const std::vector<double>& values) const;
  /// c_stab h^2 / max ||(A * f)||.
  double stable_dt(const std::vector<double>& values) const;
  /// Explicit Heun step. Negative values are clipped to zero and logged, and
  /// the remaining values rescaled so mass is unchanged.
  GridDensity step(const GridDensity& f, double dt, GridStepLog* log = nullptr) const;

 private:
  std::vector<double> rhs_with(const std::vector<double>& values, const MatrixField& A, const VectorField& b) const;

  GridConvolver convolver_;
  double c_stab_;
};

std::vector<double> grid_rhs(const GridDensity& f, const KernelParams& params);
GridDensity grid_step(const GridDensity& f, double dt, const KernelParams& params, GridStepLog* log = nullptr);

/// Kernel density estimate psi_delta * f_hat sampled on the grid and
/// renormalized to unit trapezoid mass.
GridDensity ensemble_to_grid(const ParticleEnsemble& ensemble, double delta, const GridSpec& grid);

/// psi_delta * f for grid data (separable trapezoid convolution), renormalized.
GridDensity mollify(const GridDensity& f, double delta);

/// Box half-width 6 * extent and the default resolution for the dimension.
GridSpec default_grid(int dim, double extent, int points = 0);

}  // namespace landau
