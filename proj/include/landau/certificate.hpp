#pragma once

#include "landau/analysis.hpp"

#include <string>
#include <vector>

namespace landau {

/// Solves y' = c(t) y + F(t), y(t_0) = kl0, with c and F piecewise linear
/// between the given times. The integrating factor is exact on each interval;
/// the forcing integral uses adaptive Gauss-Kronrod quadrature.
std::vector<double> gronwall_integrate(double kl0, const std::vector<double>& c, const std::vector<double>& forcing,
                                       const std::vector<double>& times);

enum class CoefficientMode { affine, measured };

struct CoefficientSpec {
  CoefficientMode mode = CoefficientMode::affine;
  double C = 1.0;                   // affine: c(t) = C (1 + t)
  std::vector<double> times;        // measured: c(t) samples
  std::vector<double> values;
};

/// Forcing-free Gronwall bound on KL(f_T | g_T).
double stability_bound(double kl0, const CoefficientSpec& coefficients, double T);

/// c(t) = C_abs * bracket(f, g) from the functionals of both densities.
double measured_coefficient(const SampledDensity& f, const SampledDensity& g, double c_abs);

enum class RatioMode { twin, self, assumed };
std::string to_string(RatioMode mode);
RatioMode parse_ratio_mode(const std::string& name);

struct CertificateInputs {
  std::vector<double> times;
  std::vector<double> loss;            // L(s_t, g_t, A*g_t)
  std::vector<double> ratio;           // R(t); ignored in assumed mode
  std::vector<double> coefficient;     // c(t)
  std::vector<double> truncated_mass;  // per time; may be empty
  std::vector<double> measured_kl;     // twin mode only; may be empty
};

struct CertificateOptions {
  double c_abs = kCalibratedCAbs;
  double assumed_ratio = 1.0;        // assumed mode
  double truncation_budget = 1e-3;   // max f-mass dropped by the support set
  std::vector<std::string> heuristics;
};

struct CertificateRow {
  double time = 0.0;
  double loss = 0.0;
  double ratio = 0.0;
  double forcing = 0.0;      // 2 R L
  double coefficient = 0.0;  // c(t)
  double bound = 0.0;        // sharp integrating-factor solution
  double envelope = 0.0;     // C_env e^{t^2} (kl0 / 2 + int_0^t R L)
  double measured_kl = NAN;
  double truncated_mass = 0.0;
};

struct CertificateReport {
  RatioMode mode = RatioMode::twin;
  double kl0 = 0.0;
  double c_abs = 0.0;
  double envelope_constant = 0.0;  // C_env
  double loss_integral = 0.0;      // int_0^T L
  double truncation_budget = 0.0;
  double max_truncated_mass = 0.0;
  bool valid = true;
  std::string invalid_reason;
  std::vector<std::string> heuristics;
  std::vector<CertificateRow> rows;

  double final_bound() const { return rows.empty() ? 0.0 : rows.back().bound; }
  double final_measured_kl() const { return rows.empty() ? NAN : rows.back().measured_kl; }
};

/// Certificate from a loss series. twin/self modes read R(t) from the inputs,
/// assumed mode uses options.assumed_ratio.
CertificateReport error_bound(const CertificateInputs& inputs, RatioMode mode, double kl0,
                              const CertificateOptions& options = {});

}  // namespace landau
