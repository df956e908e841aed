#include "landau/certificate.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include <algorithm>

namespace landau {

namespace {

void check_series(const std::vector<double>& s, const std::vector<double>& times, const char* name) {
  if (s.size() != times.size())
    throw Error(fmt::format("gronwall_integrate: {} has {} samples for {} times", name, s.size(), times.size()));
  for (std::size_t k = 0; k < s.size(); ++k)
    if (!(s[k] >= 0.0) || !std::isfinite(s[k]))
      throw Error(fmt::format("gronwall_integrate: {}[{}] = {} must be finite and >= 0", name, k, s[k]));
}

}  // namespace

std::vector<double> gronwall_integrate(double kl0, const std::vector<double>& c, const std::vector<double>& forcing,
                                       const std::vector<double>& times) {
  if (!(kl0 >= 0.0) || !std::isfinite(kl0)) throw Error(fmt::format("gronwall_integrate: kl0 = {} must be >= 0", kl0));
  if (times.empty()) throw Error("gronwall_integrate: empty time series");
  check_series(c, times, "coefficient");
  check_series(forcing, times, "forcing");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw Error(fmt::format("gronwall_integrate: times not increasing at {}", k));

  std::vector<double> y(times.size());
  y[0] = kl0;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double h = times[k + 1] - times[k];
    const double c0 = c[k], dc = c[k + 1] - c[k];
    const double f0 = forcing[k], df = forcing[k + 1] - forcing[k];
    // Phi(s) = int_0^s c; y(h) = e^{Phi(h)} y0 + int_0^h e^{Phi(h) - Phi(s)} F(s) ds
    auto phi = [&](double s) { return c0 * s + 0.5 * dc * s * s / h; };
    const double ph = phi(h);
    double forced = 0.0;
    if (f0 != 0.0 || df != 0.0) {
      auto integrand = [&](double s) { return std::exp(ph - phi(s)) * (f0 + df * s / h); };
      forced = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, h, 6, 1e-12);
    }
    y[k + 1] = std::exp(ph) * y[k] + forced;
  }
  return y;
}

double stability_bound(double kl0, const CoefficientSpec& spec, double T) {
  if (T < 0.0) throw Error("stability_bound: T must be >= 0");
  if (T == 0.0) {
    if (!(kl0 >= 0.0)) throw Error("stability_bound: kl0 must be >= 0");
    return kl0;
  }
  std::vector<double> times, c;
  if (spec.mode == CoefficientMode::affine) {
    // c is linear in t, so a single interval is exact
    times = {0.0, T};
    c = {spec.C, spec.C * (1.0 + T)};
  } else {
    if (spec.times.size() != spec.values.size() || spec.times.empty())
      throw Error("stability_bound: measured coefficients need aligned times and values");
    if (spec.times.front() > 0.0 || spec.times.back() < T)
      throw Error(fmt::format("stability_bound: measured coefficients cover [{}, {}], not [0, {}]", spec.times.front(),
                              spec.times.back(), T));
    for (std::size_t k = 0; k < spec.times.size() && spec.times[k] < T; ++k) {
      times.push_back(spec.times[k]);
      c.push_back(spec.values[k]);
    }
    // close the last interval at T by linear interpolation
    const auto it = std::lower_bound(spec.times.begin(), spec.times.end(), T);
    const std::size_t j = static_cast<std::size_t>(it - spec.times.begin());
    double cT = spec.values[j];
    if (spec.times[j] != T) {
      const double a = (T - spec.times[j - 1]) / (spec.times[j] - spec.times[j - 1]);
      cT = (1.0 - a) * spec.values[j - 1] + a * spec.values[j];
    }
    times.push_back(T);
    c.push_back(cT);
  }
  const std::vector<double> zero(times.size(), 0.0);
  return gronwall_integrate(kl0, c, zero, times).back();
}

double measured_coefficient(const SampledDensity& f, const SampledDensity& g, double c_abs) {
  return c_abs * kl_bracket(density_functionals(f), density_functionals(g));
}

std::string to_string(RatioMode mode) {
  switch (mode) {
    case RatioMode::twin: return "twin";
    case RatioMode::self: return "self";
    default: return "assumed_ratio";
  }
}

RatioMode parse_ratio_mode(const std::string& name) {
  if (name == "twin") return RatioMode::twin;
  if (name == "self") return RatioMode::self;
  if (name == "assumed_ratio" || name == "assumed") return RatioMode::assumed;
  throw ConfigError(fmt::format("unknown certificate mode '{}' (expected twin, self or assumed_ratio)", name));
}

CertificateReport error_bound(const CertificateInputs& in, RatioMode mode, double kl0, const CertificateOptions& opt) {
  const std::size_t n = in.times.size();
  if (n == 0) throw Error("error_bound: empty time series");
  if (in.loss.size() != n) throw Error("error_bound: missing loss series");
  if (in.coefficient.size() != n) throw Error("error_bound: coefficient series does not match the times");
  if (mode != RatioMode::assumed && in.ratio.size() != n) throw Error("error_bound: ratio series does not match the times");

  CertificateReport r;
  r.mode = mode;
  r.kl0 = kl0;
  r.c_abs = opt.c_abs;
  r.truncation_budget = opt.truncation_budget;
  r.heuristics = opt.heuristics;
  r.rows.resize(n);

  std::vector<double> forcing(n);
  for (std::size_t k = 0; k < n; ++k) {
    CertificateRow& row = r.rows[k];
    row.time = in.times[k];
    row.loss = in.loss[k];
    row.ratio = mode == RatioMode::assumed ? opt.assumed_ratio : in.ratio[k];
    row.forcing = forcing[k] = 2.0 * row.ratio * row.loss;
    row.coefficient = in.coefficient[k];
    if (!in.truncated_mass.empty()) row.truncated_mass = in.truncated_mass[k];
    if (!in.measured_kl.empty()) row.measured_kl = in.measured_kl[k];
    r.max_truncated_mass = std::max(r.max_truncated_mass, row.truncated_mass);
  }
  const std::vector<double> bound = gronwall_integrate(kl0, in.coefficient, forcing, in.times);

  // Envelope C_env e^{t^2} (kl0/2 + int R L), C_env = 2 max_k e^{int_0^{t_k} c - t_k^2},
  // dominates e^{int c}(kl0 + 2 int R L) and hence the sharp solution.
  std::vector<double> int_c(n, 0.0), int_rl(n, 0.0), int_l(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double h = in.times[k] - in.times[k - 1];
    int_c[k] = int_c[k - 1] + 0.5 * h * (in.coefficient[k] + in.coefficient[k - 1]);
    int_rl[k] = int_rl[k - 1] + 0.25 * h * (forcing[k] + forcing[k - 1]);
    int_l[k] = int_l[k - 1] + 0.5 * h * (in.loss[k] + in.loss[k - 1]);
  }
  double cmax = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = in.times[k] - in.times[0];
    cmax = std::max(cmax, std::exp(int_c[k] - t * t));
  }
  r.envelope_constant = 2.0 * cmax;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = in.times[k] - in.times[0];
    r.rows[k].bound = bound[k];
    r.rows[k].envelope = r.envelope_constant * std::exp(t * t) * (0.5 * kl0 + int_rl[k]);
  }
  r.loss_integral = int_l.back();

  if (r.max_truncated_mass > opt.truncation_budget) {
    r.valid = false;
    r.invalid_reason = fmt::format("ratio support set drops f-mass {:.3e} > budget {:.3e}", r.max_truncated_mass,
                                   opt.truncation_budget);
  }
  return r;
}

}  // namespace landau
