#include "landau/oracle.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace landau {

namespace {

std::size_t axis_stride(const GridSpec& g, int axis) {
  std::size_t s = 1;
  for (int k = axis + 1; k < g.dim; ++k) s *= g.points;
  return s;
}

// Second-order central differences, one-sided second order at the boundary.
std::vector<double> derivative(const std::vector<double>& f, const GridSpec& g, int axis) {
  const std::size_t n = g.size();
  const std::size_t stride = axis_stride(g, axis);
  const int M = g.points;
  const double inv2h = 0.5 / g.spacing();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int ik = static_cast<int>((i / stride) % M);
    if (ik == 0)
      out[i] = (-3.0 * f[i] + 4.0 * f[i + stride] - f[i + 2 * stride]) * inv2h;
    else if (ik == M - 1)
      out[i] = (3.0 * f[i] - 4.0 * f[i - stride] + f[i - 2 * stride]) * inv2h;
    else
      out[i] = (f[i + stride] - f[i - stride]) * inv2h;
  }
  return out;
}

int comp_index(int k, int l) {
  if (k == l) return k;
  if (k > l) std::swap(k, l);
  if (k == 0) return l == 1 ? 3 : 4;
  return 5;
}

double support_floor(const std::vector<double>& v, double floor_rel) {
  return floor_rel * *std::max_element(v.begin(), v.end());
}

}  // namespace

SampledDensity SampledDensity::from_analytic(const AnalyticDensity& density, const GridSpec& grid,
                                             double floor_rel) {
  SampledDensity s;
  s.grid = grid;
  const std::size_t n = grid.size();
  s.values.resize(n);
  s.gradient = make_columns(n);
  s.score = make_columns(n);
  s.hessian_sq.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec v = grid.node(i);
    s.values[i] = density.density(v);
    set_column(s.gradient, i, density.gradient(v));
    s.hessian_sq[i] = density.hessian(v).squaredNorm();
  }
  s.floor = support_floor(s.values, floor_rel);
  for (std::size_t i = 0; i < n; ++i)
    if (s.values[i] > 0.0) set_column(s.score, i, density.score(grid.node(i)));
  return s;
}

SampledDensity SampledDensity::from_grid(const GridDensity& density, double floor_rel) {
  SampledDensity s;
  s.grid = density.grid;
  s.values = density.values;
  const GridSpec& g = density.grid;
  const std::size_t n = g.size();
  s.gradient = make_columns(n);
  s.score = make_columns(n);
  s.hessian_sq.assign(n, 0.0);
  for (int k = 0; k < g.dim; ++k) s.gradient[k] = derivative(s.values, g, k);
  for (int k = 0; k < g.dim; ++k)
    for (int l = 0; l < g.dim; ++l) {
      const auto hkl = derivative(s.gradient[k], g, l);
      for (std::size_t i = 0; i < n; ++i) s.hessian_sq[i] += hkl[i] * hkl[i];
    }
  s.floor = support_floor(s.values, floor_rel);
  for (std::size_t i = 0; i < n; ++i)
    if (s.values[i] > s.floor)
      for (int k = 0; k < g.dim; ++k) s.score[k][i] = s.gradient[k][i] / s.values[i];
  return s;
}

DensityFunctionals density_functionals(const SampledDensity& f, const FunctionalOptions& o) {
  DensityFunctionals r;
  const GridSpec& g = f.grid;
  double l2 = 0.0, l3 = 0.0, wl2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = g.weight(i);
    const double fi = f.values[i];
    const Vec v = g.node(i);
    const double br = bracket(v);
    const double br3 = br * br * br;
    const double s2 = column_at(f.score, i).squaredNorm();
    r.mass += w * fi;
    r.momentum += w * fi * v;
    r.energy += 0.5 * w * fi * v.squaredNorm();
    if (fi > 0.0) r.entropy += w * fi * std::log(fi);
    r.moment += w * fi * std::pow(br, o.moment_exponent);
    r.fisher += w * fi * std::pow(br, o.fisher_exponent) * s2;
    r.l1 += w * std::abs(fi);
    l2 += w * fi * fi;
    l3 += w * std::abs(fi) * fi * fi;
    r.linf = std::max(r.linf, std::abs(fi));
    r.weighted_l1 += w * std::abs(fi) * br3;
    wl2 += w * fi * fi * br3 * br3;
    r.weighted_fisher += w * fi * br3 * s2;
    const double br10 = std::pow(br, 10.0);
    r.h2_5 += w * br10 * (f.hessian_sq[i] + column_at(f.gradient, i).squaredNorm() + fi * fi);
  }
  r.l2 = std::sqrt(l2);
  r.l3 = std::cbrt(l3);
  r.weighted_l2 = std::sqrt(wl2);
  return r;
}

PairFunctionals pair_functionals(const SampledDensity& f, const SampledDensity& g, const FunctionalOptions& o) {
  if (f.grid.size() != g.grid.size()) throw Error("pair_functionals: grids differ");
  PairFunctionals r;
  const GridSpec& grid = f.grid;
  const double ff = support_floor(f.values, o.floor_rel);
  const double gf = support_floor(g.values, o.floor_rel);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = grid.weight(i);
    const double fi = f.values[i], gi = g.values[i];
    const double d = fi - gi;
    r.l2_sq += w * d * d;
    r.l1 += w * std::abs(d);
    if (fi > ff && gi > gf) {
      r.kl += w * fi * std::log(fi / gi);
      r.sup_ratio = std::max(r.sup_ratio, fi / gi);
    } else if (fi > 0.0) {
      r.truncated_mass += w * fi;
      ++r.truncated_nodes;
    }
  }
  return r;
}

Functionals functionals(const SampledDensity& f, const SampledDensity* g, const FunctionalOptions& o) {
  Functionals r;
  r.f = density_functionals(f, o);
  if (g) {
    r.g = density_functionals(*g, o);
    r.pair = pair_functionals(f, *g, o);
  }
  return r;
}

Functionals functionals(const AnalyticDensity& f, const AnalyticDensity* g, const GridSpec& grid,
                        const FunctionalOptions& o) {
  const SampledDensity fs = SampledDensity::from_analytic(f, grid, o.floor_rel);
  if (!g) return functionals(fs, nullptr, o);
  const SampledDensity gs = SampledDensity::from_analytic(*g, grid, o.floor_rel);
  return functionals(fs, &gs, o);
}

GridSolver::GridSolver(const GridSpec& grid, const KernelParams& params, double c_stab, ConvolutionMethod method)
    : convolver_(grid, params, method), c_stab_(c_stab) {}

std::vector<double> GridSolver::rhs_with(const std::vector<double>& f, const MatrixField& A,
                                         const VectorField& b) const {
  const GridSpec& g = grid();
  const std::size_t n = g.size();
  const int d = g.dim;
  const int M = g.points;
  const double h = g.spacing();
  std::array<std::vector<double>, 3> grad;
  for (int l = 0; l < d; ++l) grad[l] = derivative(f, g, l);

  std::vector<double> out(n, 0.0);
  for (int k = 0; k < d; ++k) {
    const std::size_t stride = axis_stride(g, k);
    for (std::size_t i = 0; i < n; ++i) {
      const int ik = static_cast<int>((i / stride) % M);
      if (ik == M - 1) continue;
      const std::size_t j = i + stride;
      double flux = 0.0;
      for (int l = 0; l < d; ++l) {
        const int c = comp_index(k, l);
        const double akl = 0.5 * (A.comps[c][i] + A.comps[c][j]);
        const double dl = l == k ? (f[j] - f[i]) / h : 0.5 * (grad[l][i] + grad[l][j]);
        flux += akl * dl;
      }
      flux -= 0.5 * (b.comps[k][i] + b.comps[k][j]) * 0.5 * (f[i] + f[j]);
      const double tau_i = ik == 0 ? 0.5 : 1.0;
      const double tau_j = ik + 1 == M - 1 ? 0.5 : 1.0;
      out[i] += flux / (h * tau_i);
      out[j] -= flux / (h * tau_j);
    }
  }
  return out;
}

std::vector<double> GridSolver::rhs(const std::vector<double>& values) const {
  MatrixField A;
  VectorField b;
  convolver_.conv_both(values, A, b);
  return rhs_with(values, A, b);
}

double GridSolver::stable_dt(const std::vector<double>& values) const {
  const MatrixField A = convolver_.conv_A(values);
  double mx = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) mx = std::max(mx, spectral_norm(A.at(i), grid().dim));
  const double h = grid().spacing();
  return mx > 0.0 ? c_stab_ * h * h / mx : std::numeric_limits<double>::infinity();
}

GridDensity GridSolver::step(const GridDensity& f, double dt, GridStepLog* log) const {
  if (dt == 0.0) return f;
  MatrixField A;
  VectorField b;
  convolver_.conv_both(f.values, A, b);
  double mx = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) mx = std::max(mx, spectral_norm(A.at(i), grid().dim));
  const double h = grid().spacing();
  const double limit = mx > 0.0 ? c_stab_ * h * h / mx : std::numeric_limits<double>::infinity();
  if (dt > limit)
    throw StabilityViolation(fmt::format("grid step dt = {} exceeds stability bound {}", dt, limit), limit);

  const std::size_t n = f.values.size();
  const auto k0 = rhs_with(f.values, A, b);
  std::vector<double> mid(n);
  for (std::size_t i = 0; i < n; ++i) mid[i] = f.values[i] + dt * k0[i];
  const auto k1 = rhs(mid);
  GridDensity out = f;
  GridStepLog local;
  for (std::size_t i = 0; i < n; ++i) {
    double v = f.values[i] + 0.5 * dt * (k0[i] + k1[i]);
    if (!std::isfinite(v)) throw NumericalAbort("grid step produced a non-finite value", 0);
    if (v < 0.0) {
      local.clipped_mass += -v * f.grid.weight(i);
      ++local.clipped_nodes;
      v = 0.0;
    }
    out.values[i] = v;
  }
  if (local.clipped_nodes > 0) {
    // Clipping adds mass; take it back proportionally so the step stays conservative.
    const double scale = f.mass() / out.mass();
    for (auto& v : out.values) v *= scale;
  }
  if (log) *log = local;
  return out;
}

std::vector<double> grid_rhs(const GridDensity& f, const KernelParams& params) {
  return GridSolver(f.grid, params).rhs(f.values);
}

GridDensity grid_step(const GridDensity& f, double dt, const KernelParams& params, GridStepLog* log) {
  return GridSolver(f.grid, params).step(f, dt, log);
}

namespace {

void renormalize(GridDensity& g) {
  const double m = g.mass();
  if (m > 0.0)
    for (auto& v : g.values) v /= m;
}

}  // namespace

GridDensity ensemble_to_grid(const ParticleEnsemble& e, double delta, const GridSpec& grid) {
  if (!(delta > 0.0)) throw ConfigError("ensemble_to_grid: bandwidth must be > 0");
  GridDensity out{grid, std::vector<double>(grid.size(), 0.0)};
  const int d = grid.dim;
  const int M = grid.points;
  const double h = grid.spacing();
  const double L = grid.half_width;
  const double cut = 8.0 * delta;
  const double norm = std::pow(2.0 * M_PI * delta * delta, -0.5 * d);
  const double inv2d2 = 0.5 / (delta * delta);
  std::array<std::vector<double>, 3> axis_w;
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (std::size_t p = 0; p < e.size(); ++p) {
    bool empty = false;
    for (int k = 0; k < d; ++k) {
      const double x = e.velocities[k][p];
      lo[k] = std::max(0, static_cast<int>(std::ceil((x - cut + L) / h)));
      hi[k] = std::min(M - 1, static_cast<int>(std::floor((x + cut + L) / h)));
      if (lo[k] > hi[k]) {
        empty = true;
        break;
      }
      axis_w[k].resize(hi[k] - lo[k] + 1);
      for (int i = lo[k]; i <= hi[k]; ++i) {
        const double z = -L + i * h - x;
        axis_w[k][i - lo[k]] = std::exp(-z * z * inv2d2);
      }
    }
    if (empty) continue;
    const double wp = e.weights[p] * norm;
    if (d == 2) {
      for (int i = lo[0]; i <= hi[0]; ++i)
        for (int j = lo[1]; j <= hi[1]; ++j)
          out.values[static_cast<std::size_t>(i) * M + j] += wp * axis_w[0][i - lo[0]] * axis_w[1][j - lo[1]];
    } else {
      for (int i = lo[0]; i <= hi[0]; ++i) {
        const double wi = wp * axis_w[0][i - lo[0]];
        for (int j = lo[1]; j <= hi[1]; ++j) {
          const double wij = wi * axis_w[1][j - lo[1]];
          double* row = &out.values[(static_cast<std::size_t>(i) * M + j) * M];
          for (int k = lo[2]; k <= hi[2]; ++k) row[k] += wij * axis_w[2][k - lo[2]];
        }
      }
    }
  }
  renormalize(out);
  return out;
}

GridDensity mollify(const GridDensity& f, double delta) {
  if (!(delta > 0.0)) throw ConfigError("mollify: bandwidth must be > 0");
  const GridSpec& g = f.grid;
  const int M = g.points;
  const double h = g.spacing();
  const double norm = 1.0 / std::sqrt(2.0 * M_PI * delta * delta);
  std::vector<double> K(static_cast<std::size_t>(M) * M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      const double z = (i - j) * h;
      const double tau = (j == 0 || j == M - 1) ? 0.5 : 1.0;
      K[static_cast<std::size_t>(i) * M + j] = h * tau * norm * std::exp(-0.5 * z * z / (delta * delta));
    }
  std::vector<double> cur = f.values, next(cur.size());
  for (int axis = 0; axis < g.dim; ++axis) {
    const std::size_t stride = axis_stride(g, axis);
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t base = 0; base < cur.size(); ++base) {
      if ((base / stride) % M != 0) continue;  // first node of each line
      for (int i = 0; i < M; ++i) {
        double acc = 0.0;
        for (int j = 0; j < M; ++j) acc += K[static_cast<std::size_t>(i) * M + j] * cur[base + j * stride];
        next[base + i * stride] = acc;
      }
    }
    std::swap(cur, next);
  }
  GridDensity out{g, std::move(cur), f.mass_tolerance};
  renormalize(out);
  return out;
}

GridSpec default_grid(int dim, double extent, int points) {
  if (points <= 0) points = dim == 3 ? 48 : 128;
  return GridSpec{dim, points, 6.0 * extent};
}

}  // namespace landau
