#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace landau {

// Points and matrices always carry three components; for d = 2 the third
// component (and third row/column) is zero.
using Vec = Eigen::Vector3d;
using Mat = Eigen::Matrix3d;

/// Component-major storage for N d-vectors: columns[k][i] is component k of item i.
using Columns = std::array<std::vector<double>, 3>;

Columns make_columns(std::size_t n);
inline Vec column_at(const Columns& c, std::size_t i) { return {c[0][i], c[1][i], c[2][i]}; }
inline void set_column(Columns& c, std::size_t i, const Vec& v) {
  c[0][i] = v[0];
  c[1][i] = v[1];
  c[2][i] = v[2];
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Kernel evaluated at z = 0 with no regularization.
class SingularEvaluation : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Run aborted because the state became non-finite or a scheme limit was hit.
class NumericalAbort : public Error {
 public:
  NumericalAbort(const std::string& what, long step) : Error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// Japanese bracket <v> = sqrt(1 + |v|^2).
inline double bracket(const Vec& v) { return std::sqrt(1.0 + v.squaredNorm()); }

struct KernelParams {
  int d = 3;
  double gamma = -3.0;
  double epsilon = 0.0;

  static KernelParams coulomb(double epsilon = 0.0) { return {3, -3.0, epsilon}; }
  bool is_coulomb() const { return d == 3 && gamma == -3.0; }
};

struct ParticleEnsemble {
  int dim = 3;
  Columns velocities;
  std::vector<double> weights;
  std::optional<Columns> scores;

  std::size_t size() const { return weights.size(); }
  Vec velocity(std::size_t i) const { return column_at(velocities, i); }
  Vec score(std::size_t i) const { return column_at(*scores, i); }

  static ParticleEnsemble from_points(int dim, const std::vector<Vec>& points,
                                      std::vector<double> weights = {});
};

/// Uniform tensor grid on [-L, L]^d with M points per axis, row-major with the
/// last axis fastest.
struct GridSpec {
  int dim = 3;
  int points = 48;
  double half_width = 6.0;

  double spacing() const { return 2.0 * half_width / (points - 1); }
  std::size_t size() const;
  std::array<int, 3> index(std::size_t flat) const;
  std::size_t flat(const std::array<int, 3>& idx) const;
  Vec node(std::size_t flat) const;
  /// Trapezoid quadrature weight (includes h^d).
  double weight(std::size_t flat) const;
  double cell_volume() const { return std::pow(spacing(), dim); }
  /// Trapezoid fraction of the node: product of 1/2 factors at boundary planes.
  double trapezoid_fraction(std::size_t flat) const;
};

struct GridDensity {
  GridSpec grid;
  std::vector<double> values;
  double mass_tolerance = 1e-3;

  double mass() const;
};

struct GaussianComponent {
  double weight = 1.0;
  Vec mean = Vec::Zero();
  double variance = 1.0;
};

/// Isotropic Gaussian or Gaussian mixture with exact score, gradient and Hessian.
class AnalyticDensity {
 public:
  AnalyticDensity() = default;
  AnalyticDensity(int dim, std::vector<GaussianComponent> components);

  static AnalyticDensity gaussian(int dim, const Vec& mean, double variance);
  static AnalyticDensity maxwellian(int dim, double variance = 1.0) {
    return gaussian(dim, Vec::Zero(), variance);
  }

  int dim() const { return dim_; }
  const std::vector<GaussianComponent>& components() const { return components_; }
  bool is_single_gaussian() const { return components_.size() == 1; }

  double density(const Vec& v) const;
  double log_density(const Vec& v) const;
  /// Throws Error when the density underflows at v.
  Vec score(const Vec& v) const;
  Vec gradient(const Vec& v) const;
  Mat hessian(const Vec& v) const;
  /// Largest per-axis standard deviation plus the largest |mean| component.
  double extent() const;

 private:
  double component_log(const GaussianComponent& c, const Vec& v) const;

  int dim_ = 3;
  std::vector<GaussianComponent> components_;
};

struct DiagnosticRow {
  double time = 0.0;
  double mass = 0.0;
  Vec momentum = Vec::Zero();
  double energy = 0.0;
  double entropy = NAN;    // mollified entropy of particle states
  double fisher = NAN;     // weighted Fisher information I_s
  double moment = NAN;     // int <v>^s f
  double linf = NAN;       // sup of the (mollified) density
  double max_speed = 0.0;  // max_i |U_i|
  double loss = NAN;       // score-matching loss when certifying
  double ratio = NAN;      // sup-ratio estimate (self mode)
  double coefficient = NAN;
};

struct TrajectoryRecord {
  double weight_exponent = 3.0;  // s in I_s and the moment column
  std::vector<DiagnosticRow> rows;

  std::vector<double> times() const;
};

std::vector<std::string> validate(const KernelParams& params);
std::vector<std::string> validate(const ParticleEnsemble& ensemble);
std::vector<std::string> validate(const GridDensity& grid);
std::vector<std::string> validate(const AnalyticDensity& density);
std::vector<std::string> validate(const TrajectoryRecord& record);

/// Divides weights by their sum.
ParticleEnsemble renormalized(ParticleEnsemble ensemble);

}  // namespace landau
