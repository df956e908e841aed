#include "landau/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <random>

namespace landau {

double kl_bracket(const DensityFunctionals& f, const DensityFunctionals& g) {
  return (f.linf + g.linf) * (f.weighted_fisher + f.weighted_l2) + f.weighted_l1;
}

namespace {

double lambda_weighted(const Mat& Ag, const Vec& v, const KernelParams& p) {
  return min_eigenvalue(Ag, p.d) * std::pow(bracket(v), -p.gamma);
}

}  // namespace

InequalityReport verify_key_inequality(const SampledDensity& f, const SampledDensity& g, const KernelParams& params,
                                       InequalityForm form, double c_abs, double floor_rel) {
  if (f.grid.size() != g.grid.size() || f.grid.points != g.grid.points)
    throw Error("verify_key_inequality: f and g must share a grid");
  if (form == InequalityForm::kl && !params.is_coulomb())
    throw ConfigError("verify_key_inequality: kl form requires d = 3, gamma = -3");

  InequalityReport r;
  r.form = form;
  r.grid = f.grid;
  r.c_abs = c_abs;
  const GridSpec& grid = f.grid;
  const std::size_t n = grid.size();

  GridConvolver conv(grid, params);
  MatrixField Af, Ag;
  VectorField bf, bg;
  conv.conv_both(f.values, Af, bf);
  conv.conv_both(g.values, Ag, bg);

  const double ff = floor_rel * *std::max_element(f.values.begin(), f.values.end());
  const double gf = floor_rel * *std::max_element(g.values.begin(), g.values.end());
  std::vector<char> support(n, 0);
  double cmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (f.values[i] > ff && g.values[i] > gf) {
      support[i] = 1;
      ++r.support_nodes;
      cmin = std::min(cmin, lambda_weighted(Ag.at(i), grid.node(i), params));
    } else {
      r.truncated_mass += grid.weight(i) * f.values[i];
    }
  }
  r.c_coe = cmin;
  if (!(cmin > 0.0)) {
    r.valid = false;
    r.diagnostics = fmt::format("coercivity estimate {} is not positive on the support set", cmin);
  }

  CompensatedSum lhs, D, cA, cb, RA, Rb;
  for (std::size_t i = 0; i < n; ++i) {
    if (!support[i]) continue;
    const double w = grid.weight(i) * f.values[i];
    const Vec v = grid.node(i);
    const Vec sf = column_at(f.score, i);
    const Vec sg = column_at(g.score, i);
    const Vec ds = sf - sg;
    const Mat af = Af.at(i), ag = Ag.at(i);
    const Mat ad = af - ag;
    const Vec bd = bf.at(i) - bg.at(i);
    const Vec Uf = -af * sf + bf.at(i);
    const Vec Ug = -ag * sg + bg.at(i);
    const double weight = std::pow(bracket(v), -params.gamma);
    const double nad = spectral_norm(ad, params.d);
    lhs.add(w * (Uf - Ug).dot(ds));
    D.add(w * ds.dot(ag * ds));
    cA.add(-w * ds.dot(ad * sf));
    cb.add(w * ds.dot(bd));
    RA.add(w * weight * nad * nad * sf.squaredNorm());
    Rb.add(w * weight * bd.squaredNorm());
  }
  r.lhs = lhs.value();
  r.dissipation = D.value();
  r.cross_A = cA.value();
  r.cross_b = cb.value();
  const double rem = RA.value() + Rb.value();
  r.remainder_A = r.valid ? RA.value() / cmin : 0.0;
  r.remainder_b = r.valid ? Rb.value() / cmin : 0.0;
  r.identity_residual = std::abs(r.lhs - (-r.dissipation + r.cross_A + r.cross_b));
  r.literal_margin = -0.5 * r.dissipation + (r.valid ? cmin * rem : 0.0) - r.lhs;

  if (form == InequalityForm::raw) {
    r.rhs = -0.5 * r.dissipation + r.remainder_A + r.remainder_b;
  } else {
    FunctionalOptions opts;
    opts.floor_rel = floor_rel;
    r.kl = pair_functionals(f, g, opts).kl;
    r.bracket = kl_bracket(density_functionals(f, opts), density_functionals(g, opts));
    r.rhs = -0.5 * r.dissipation + c_abs * r.kl * r.bracket;
  }
  r.margin = r.rhs - r.lhs;
  return r;
}

InequalityReport verify_key_inequality(const AnalyticDensity& f, const AnalyticDensity& g, const GridSpec& grid,
                                       const KernelParams& params, InequalityForm form, double c_abs) {
  return verify_key_inequality(SampledDensity::from_analytic(f, grid), SampledDensity::from_analytic(g, grid), params,
                               form, c_abs);
}

InequalityReport verify_key_inequality(const GridDensity& f, const GridDensity& g, const KernelParams& params,
                                       InequalityForm form, double c_abs) {
  return verify_key_inequality(SampledDensity::from_grid(f), SampledDensity::from_grid(g), params, form, c_abs);
}

PinskerReport pinsker_check(const SampledDensity& f, const SampledDensity& g, double tol) {
  PinskerReport r;
  const PairFunctionals p = pair_functionals(f, g);
  r.l2_sq = p.l2_sq;
  r.l1 = p.l1;
  r.kl = p.kl;
  r.linf_f = *std::max_element(f.values.begin(), f.values.end());
  r.linf_g = *std::max_element(g.values.begin(), g.values.end());
  r.l2_bound = 2.0 * (r.linf_f + r.linf_g) * std::max(r.kl, 0.0);
  r.l1_bound = std::sqrt(2.0 * std::max(r.kl, 0.0));
  r.l2_margin = r.l2_bound - r.l2_sq;
  r.l1_margin = r.l1_bound - r.l1;
  r.holds = r.l2_margin >= -tol && r.l1_margin >= -tol;
  return r;
}

PinskerReport pinsker_check(const AnalyticDensity& f, const AnalyticDensity& g, const GridSpec& grid, double tol) {
  return pinsker_check(SampledDensity::from_analytic(f, grid), SampledDensity::from_analytic(g, grid), tol);
}

CoercivityReport coercivity_check(const GridDensity& g, const KernelParams& params, double floor_rel) {
  const MatrixField A = GridConvolver(g.grid, params).conv_A(g.values);
  const double floor = floor_rel * *std::max_element(g.values.begin(), g.values.end());
  CoercivityReport r;
  r.c_coe = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.grid.size(); ++i) {
    if (!(g.values[i] > floor)) continue;
    ++r.points;
    const Vec v = g.grid.node(i);
    const double lam = min_eigenvalue(A.at(i), params.d);
    const double c = lam * std::pow(bracket(v), -params.gamma);
    if (c < r.c_coe) {
      r.c_coe = c;
      r.argmin = v;
      r.lambda_at_argmin = lam;
    }
  }
  r.valid = r.points > 0 && r.c_coe > 0.0;
  return r;
}

CoercivityReport coercivity_check(const AnalyticDensity& g, const GridSpec& grid, const KernelParams& params,
                                  double floor_rel) {
  return coercivity_check(SampledDensity::from_analytic(g, grid).as_grid(), params, floor_rel);
}

CoercivityReport coercivity_check(const GridDensity& g, const KernelParams& params, const std::vector<Vec>& points) {
  const GridConvolver conv(g.grid, params, ConvolutionMethod::direct);
  CoercivityReport r;
  r.c_coe = std::numeric_limits<double>::infinity();
  for (const Vec& v : points) {
    ++r.points;
    const double lam = min_eigenvalue(conv.conv_A_at(v, g.values), params.d);
    const double c = lam * std::pow(bracket(v), -params.gamma);
    if (c < r.c_coe) {
      r.c_coe = c;
      r.argmin = v;
      r.lambda_at_argmin = lam;
    }
  }
  r.valid = r.points > 0 && r.c_coe > 0.0;
  return r;
}

EnvelopeReport fisher_growth_envelope(const std::vector<double>& times, const std::vector<double>& values,
                                      double t_burn, double t_max) {
  if (times.size() != values.size()) throw Error("fisher_growth_envelope: times and values differ in length");
  std::vector<double> t, y;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] >= t_burn && times[k] <= t_max && std::isfinite(values[k])) {
      t.push_back(times[k]);
      y.push_back(values[k]);
    }
  if (t.size() < 3)
    throw Error(fmt::format("fisher_growth_envelope: need at least 3 points in the window, got {}", t.size()));

  EnvelopeReport r;
  r.t_burn = t_burn;
  r.points = t.size();
  const double n = static_cast<double>(t.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) mt += t[k], my += y[k];
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    stt += (t[k] - mt) * (t[k] - mt);
    sty += (t[k] - mt) * (y[k] - my);
  }
  r.b = stt > 0.0 ? sty / stt : 0.0;
  r.a = my - r.b * mt;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double env = r.a + r.b * t[k];
    const double over = y[k] - env;
    // relative to the envelope; 1e-15 guards an identically zero series
    const double rel = over / std::max(std::abs(env), 1e-15);
    if (over > r.max_violation_abs) r.max_violation_abs = over;
    if (rel > r.max_violation) {
      r.max_violation = rel;
      r.worst_time = t[k];
    }
  }
  return r;
}

EnvelopeReport fisher_growth_envelope(const TrajectoryRecord& record, double s, double t_burn, double t_max) {
  if (s != record.weight_exponent)
    throw ConfigError(fmt::format("fisher_growth_envelope: record tracks I_{} but I_{} was requested",
                                  record.weight_exponent, s));
  std::vector<double> values;
  for (const auto& row : record.rows) values.push_back(row.fisher);
  return fisher_growth_envelope(record.times(), values, t_burn, t_max);
}

std::vector<std::pair<AnalyticDensity, AnalyticDensity>> mixture_suite(std::size_t pairs, std::uint64_t seed,
                                                                       int dim) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mean(-1.0, 1.0), var(0.6, 1.6), frac(0.25, 0.75);
  auto draw = [&] {
    const int comps = rng() % 2 == 0 ? 1 : 2;
    std::vector<GaussianComponent> c(comps);
    const double w0 = comps == 1 ? 1.0 : frac(rng);
    for (int k = 0; k < comps; ++k) {
      c[k].weight = k == 0 ? w0 : 1.0 - w0;
      for (int a = 0; a < dim; ++a) c[k].mean[a] = mean(rng);
      c[k].variance = var(rng);
    }
    return AnalyticDensity(dim, std::move(c));
  };
  std::vector<std::pair<AnalyticDensity, AnalyticDensity>> out;
  out.reserve(pairs);
  for (std::size_t k = 0; k < pairs; ++k) {
    AnalyticDensity f = draw();
    AnalyticDensity g = draw();
    out.emplace_back(std::move(f), std::move(g));
  }
  return out;
}

CalibrationReport calibrate_c_abs(const std::vector<std::pair<AnalyticDensity, AnalyticDensity>>& suite,
                                  const GridSpec& grid) {
  CalibrationReport r;
  for (const auto& [f, g] : suite) {
    const InequalityReport rep = verify_key_inequality(f, g, grid, KernelParams::coulomb(), InequalityForm::kl, 0.0);
    const double excess = rep.lhs + 0.5 * rep.dissipation;
    const double denom = rep.kl * rep.bracket;
    const double ratio = denom > 0.0 ? excess / denom : (excess > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    r.ratios.push_back(ratio);
    r.c_abs = std::max(r.c_abs, ratio);
  }
  return r;
}

}  // namespace landau
