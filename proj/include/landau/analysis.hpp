#pragma once

#include "landau/oracle.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace landau {

/// KL-form constant: calibrate_c_abs over mixture_suite(40, 11) on a 48^3 grid
/// of half width 8 gives 0.0269, rounded up here. test_analysis recomputes it.
inline constexpr double kCalibratedCAbs = 0.03;

enum class InequalityForm { raw, kl };

struct InequalityReport {
  InequalityForm form = InequalityForm::raw;
  // lhs = int f (U[f] - U[g]) . grad log(f/g)
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs, never clamped

  double dissipation = 0.0;  // int f |grad log(f/g)|^2_{A*g}
  double cross_A = 0.0;      // -int f grad log(f/g) . (A*(f-g)) grad log f
  double cross_b = 0.0;      //  int f grad log(f/g) . b*(f-g)
  double remainder_A = 0.0;  // (1/C_coe) int f <v>^-gamma ||A*(f-g)||^2 |grad log f|^2
  double remainder_b = 0.0;  // (1/C_coe) int f <v>^-gamma |b*(f-g)|^2
  /// |lhs - (-dissipation + cross_A + cross_b)|: the exact expansion of lhs.
  double identity_residual = 0.0;

  double c_coe = 0.0;
  /// Margin with the remainders multiplied by C_coe instead of divided by it.
  double literal_margin = 0.0;

  // kl form
  double kl = 0.0;
  double bracket = 0.0;  // (|f|_inf + |g|_inf)(|f<v>^3|grad log f|^2|_1 + |f<v>^3|_2) + |f<v>^3|_1
  double c_abs = 0.0;

  GridSpec grid;
  std::size_t support_nodes = 0;
  double truncated_mass = 0.0;  // f-mass outside the support set
  bool valid = true;
  std::string diagnostics;
};

InequalityReport verify_key_inequality(const SampledDensity& f, const SampledDensity& g, const KernelParams& params,
                                       InequalityForm form, double c_abs = 1.0, double floor_rel = 1e-12);
InequalityReport verify_key_inequality(const AnalyticDensity& f, const AnalyticDensity& g, const GridSpec& grid,
                                       const KernelParams& params, InequalityForm form, double c_abs = 1.0);
InequalityReport verify_key_inequality(const GridDensity& f, const GridDensity& g, const KernelParams& params,
                                       InequalityForm form, double c_abs = 1.0);

struct PinskerReport {
  double l2_sq = 0.0;  // int |f - g|^2
  double l1 = 0.0;     // int |f - g|
  double kl = 0.0;
  double linf_f = 0.0, linf_g = 0.0;
  double l2_bound = 0.0;  // 2 (|f|_inf + |g|_inf) KL
  double l1_bound = 0.0;  // sqrt(2 KL)
  double l2_margin = 0.0;
  double l1_margin = 0.0;
  bool holds = true;
};

PinskerReport pinsker_check(const SampledDensity& f, const SampledDensity& g, double tol = 1e-10);
PinskerReport pinsker_check(const AnalyticDensity& f, const AnalyticDensity& g, const GridSpec& grid,
                            double tol = 1e-10);

struct CoercivityReport {
  double c_coe = 0.0;  // min lambda_min((A*g)(v)) <v>^-gamma
  Vec argmin = Vec::Zero();
  double lambda_at_argmin = 0.0;
  std::size_t points = 0;
  bool valid = false;  // false when the estimate is not positive
};

/// Minimum over the grid nodes where g exceeds floor_rel * max g.
CoercivityReport coercivity_check(const GridDensity& g, const KernelParams& params, double floor_rel = 1e-12);
CoercivityReport coercivity_check(const AnalyticDensity& g, const GridSpec& grid, const KernelParams& params,
                                  double floor_rel = 1e-12);
/// Minimum over explicit points; (A*g) by direct grid quadrature.
CoercivityReport coercivity_check(const GridDensity& g, const KernelParams& params, const std::vector<Vec>& points);

struct EnvelopeReport {
  double a = 0.0, b = 0.0;  // I_s(t) ~ a + b t
  double t_burn = 0.0;
  std::size_t points = 0;
  double max_violation = 0.0;      // max (I - (a + b t))_+ / (a + b t) over the window
  double max_violation_abs = 0.0;  // same, unnormalized
  double worst_time = 0.0;
};

/// Least-squares affine fit over the samples with t_burn <= t <= t_max.
EnvelopeReport fisher_growth_envelope(const std::vector<double>& times, const std::vector<double>& values,
                                      double t_burn = 0.0,
                                      double t_max = std::numeric_limits<double>::infinity());
/// Uses the fisher column; s must equal the record's weight exponent.
EnvelopeReport fisher_growth_envelope(const TrajectoryRecord& record, double s, double t_burn = 0.0,
                                      double t_max = std::numeric_limits<double>::infinity());

/// Seeded isotropic Gaussian / two-component mixture pairs.
std::vector<std::pair<AnalyticDensity, AnalyticDensity>> mixture_suite(std::size_t pairs, std::uint64_t seed,
                                                                       int dim = 3);

struct CalibrationReport {
  double c_abs = 0.0;
  std::vector<double> ratios;  // (lhs + D/2) / (KL * bracket) per pair
};

/// Smallest C_abs >= 0 with a nonnegative KL-form margin on every pair.
CalibrationReport calibrate_c_abs(const std::vector<std::pair<AnalyticDensity, AnalyticDensity>>& suite,
                                  const GridSpec& grid);

/// The KL-form bracket from functionals of f and g (d = 3 weights).
double kl_bracket(const DensityFunctionals& f, const DensityFunctionals& g);

}  // namespace landau
