#include "landau/types.hpp"

#include "landau/parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <numeric>

namespace landau {

Columns make_columns(std::size_t n) {
  return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
}

ParticleEnsemble ParticleEnsemble::from_points(int dim, const std::vector<Vec>& points,
                                               std::vector<double> weights) {
  ParticleEnsemble e;
  e.dim = dim;
  e.velocities = make_columns(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    Vec p = points[i];
    if (dim == 2) p[2] = 0.0;
    set_column(e.velocities, i, p);
  }
  if (weights.empty()) weights.assign(points.size(), 1.0 / static_cast<double>(points.size()));
  e.weights = std::move(weights);
  return e;
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int k = 0; k < dim; ++k) n *= static_cast<std::size_t>(points);
  return n;
}

std::array<int, 3> GridSpec::index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int k = dim - 1; k >= 0; --k) {
    idx[k] = static_cast<int>(flat % points);
    flat /= points;
  }
  return idx;
}

std::size_t GridSpec::flat(const std::array<int, 3>& idx) const {
  std::size_t f = 0;
  for (int k = 0; k < dim; ++k) f = f * points + idx[k];
  return f;
}

Vec GridSpec::node(std::size_t flat_index) const {
  const auto idx = index(flat_index);
  const double h = spacing();
  Vec v = Vec::Zero();
  for (int k = 0; k < dim; ++k) v[k] = -half_width + h * idx[k];
  return v;
}

double GridSpec::trapezoid_fraction(std::size_t flat_index) const {
  const auto idx = index(flat_index);
  double f = 1.0;
  for (int k = 0; k < dim; ++k)
    if (idx[k] == 0 || idx[k] == points - 1) f *= 0.5;
  return f;
}

double GridSpec::weight(std::size_t flat_index) const {
  return trapezoid_fraction(flat_index) * cell_volume();
}

double GridDensity::mass() const {
  CompensatedSum m;
  for (std::size_t i = 0; i < values.size(); ++i) m.add(grid.weight(i) * values[i]);
  return m.value();
}

AnalyticDensity::AnalyticDensity(int dim, std::vector<GaussianComponent> components)
    : dim_(dim), components_(std::move(components)) {
  if (dim_ == 2)
    for (auto& c : components_) c.mean[2] = 0.0;
}

AnalyticDensity AnalyticDensity::gaussian(int dim, const Vec& mean, double variance) {
  return AnalyticDensity(dim, {GaussianComponent{1.0, mean, variance}});
}

double AnalyticDensity::component_log(const GaussianComponent& c, const Vec& v) const {
  const double r2 = (v - c.mean).head(dim_).squaredNorm();
  return std::log(c.weight) - 0.5 * dim_ * std::log(2.0 * M_PI * c.variance) -
         0.5 * r2 / c.variance;
}

double AnalyticDensity::log_density(const Vec& v) const {
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& c : components_)
    if (c.weight > 0) mx = std::max(mx, component_log(c, v));
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (const auto& c : components_)
    if (c.weight > 0) s += std::exp(component_log(c, v) - mx);
  return mx + std::log(s);
}

double AnalyticDensity::density(const Vec& v) const { return std::exp(log_density(v)); }

Vec AnalyticDensity::score(const Vec& v) const {
  if (density(v) <= 0.0)
    throw Error(fmt::format("analytic score: density underflow at ({}, {}, {})", v[0], v[1], v[2]));
  // Responsibilities via log-sum-exp.
  const double lse = log_density(v);
  Vec s = Vec::Zero();
  for (const auto& c : components_) {
    if (c.weight <= 0) continue;
    const double r = std::exp(component_log(c, v) - lse);
    s += r * (c.mean - v) / c.variance;
  }
  if (dim_ == 2) s[2] = 0.0;
  return s;
}

Vec AnalyticDensity::gradient(const Vec& v) const {
  Vec g = Vec::Zero();
  for (const auto& c : components_) {
    if (c.weight <= 0) continue;
    g += std::exp(component_log(c, v)) * (c.mean - v) / c.variance;
  }
  if (dim_ == 2) g[2] = 0.0;
  return g;
}

Mat AnalyticDensity::hessian(const Vec& v) const {
  Mat H = Mat::Zero();
  Mat id = Mat::Zero();
  for (int k = 0; k < dim_; ++k) id(k, k) = 1.0;
  for (const auto& c : components_) {
    if (c.weight <= 0) continue;
    Vec z = v - c.mean;
    if (dim_ == 2) z[2] = 0.0;
    const double n = std::exp(component_log(c, v));
    H += n * (z * z.transpose() / (c.variance * c.variance) - id / c.variance);
  }
  return H;
}

double AnalyticDensity::extent() const {
  double e = 0.0;
  for (const auto& c : components_)
    e = std::max(e, c.mean.head(dim_).cwiseAbs().maxCoeff() + std::sqrt(c.variance));
  return e;
}

std::vector<double> TrajectoryRecord::times() const {
  std::vector<double> t;
  t.reserve(rows.size());
  for (const auto& r : rows) t.push_back(r.time);
  return t;
}

std::vector<std::string> validate(const KernelParams& p) {
  std::vector<std::string> out;
  if (p.d != 2 && p.d != 3) out.push_back(fmt::format("d = {} not in {{2, 3}}", p.d));
  if (!(p.gamma <= 0.0)) out.push_back(fmt::format("gamma = {} must be <= 0", p.gamma));
  if (!(p.epsilon >= 0.0)) out.push_back(fmt::format("epsilon = {} must be >= 0", p.epsilon));
  return out;
}

std::vector<std::string> validate(const ParticleEnsemble& e) {
  std::vector<std::string> out;
  const std::size_t n = e.weights.size();
  if (e.dim != 2 && e.dim != 3) out.push_back(fmt::format("dim = {} not in {{2, 3}}", e.dim));
  if (n == 0) out.push_back("N >= 1 violated: ensemble is empty");
  for (int k = 0; k < 3; ++k)
    if (e.velocities[k].size() != n)
      out.push_back(fmt::format("velocities column {} has {} entries, expected {}", k,
                                e.velocities[k].size(), n));
  if (!out.empty()) return out;

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(e.weights[i] > 0.0)) {
      out.push_back(fmt::format("weights > 0 violated at index {} (w = {})", i, e.weights[i]));
      break;
    }
    sum += e.weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) out.push_back(fmt::format("weights sum {:.12g} != 1", sum));
  for (std::size_t i = 0; i < n; ++i) {
    bool finite = true;
    for (int k = 0; k < e.dim; ++k) finite = finite && std::isfinite(e.velocities[k][i]);
    if (!finite) {
      out.push_back(fmt::format("velocities finite violated at index {}", i));
      break;
    }
  }
  if (e.dim == 2) {
    for (std::size_t i = 0; i < n; ++i)
      if (e.velocities[2][i] != 0.0) {
        out.push_back(fmt::format("velocities third component nonzero for d = 2 at index {}", i));
        break;
      }
  }
  if (e.scores) {
    for (int k = 0; k < 3; ++k)
      if ((*e.scores)[k].size() != n)
        out.push_back(fmt::format("scores column {} has wrong length", k));
  }
  return out;
}

std::vector<std::string> validate(const GridDensity& g) {
  std::vector<std::string> out;
  if (g.grid.dim != 2 && g.grid.dim != 3) out.push_back(fmt::format("dim = {} not in {{2, 3}}", g.grid.dim));
  if (g.grid.points < 2) out.push_back(fmt::format("points_per_axis = {} must be >= 2", g.grid.points));
  if (!(g.grid.half_width > 0)) out.push_back(fmt::format("half_width = {} must be > 0", g.grid.half_width));
  if (!out.empty()) return out;
  if (g.values.size() != g.grid.size()) {
    out.push_back(fmt::format("values has {} entries, expected M^d = {}", g.values.size(), g.grid.size()));
    return out;
  }
  for (std::size_t i = 0; i < g.values.size(); ++i)
    if (!(g.values[i] >= 0.0)) {
      out.push_back(fmt::format("values >= 0 violated at index {} (value {})", i, g.values[i]));
      break;
    }
  const double m = g.mass();
  if (std::abs(m - 1.0) > g.mass_tolerance)
    out.push_back(fmt::format("mass {} outside [1 - {}, 1 + {}]", m, g.mass_tolerance, g.mass_tolerance));
  return out;
}

std::vector<std::string> validate(const AnalyticDensity& a) {
  std::vector<std::string> out;
  if (a.dim() != 2 && a.dim() != 3) out.push_back(fmt::format("dim = {} not in {{2, 3}}", a.dim()));
  if (a.components().empty()) out.push_back("components must be nonempty");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.components().size(); ++i) {
    const auto& c = a.components()[i];
    if (!(c.weight >= 0)) out.push_back(fmt::format("component {} weight {} < 0", i, c.weight));
    if (!(c.variance > 0)) out.push_back(fmt::format("component {} variance {} must be > 0", i, c.variance));
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-12) out.push_back(fmt::format("component weights sum {:.12g} != 1", sum));
  return out;
}

std::vector<std::string> validate(const TrajectoryRecord& r) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    if (!(r.rows[i].time > r.rows[i - 1].time)) {
      out.push_back(fmt::format("times strictly increasing violated at row {}", i));
      break;
    }
  return out;
}

ParticleEnsemble renormalized(ParticleEnsemble e) {
  const double sum = std::accumulate(e.weights.begin(), e.weights.end(), 0.0);
  for (auto& w : e.weights) w /= sum;
  return e;
}

}  // namespace landau
