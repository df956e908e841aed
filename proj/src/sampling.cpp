#include "landau/sampling.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/random/sobol.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <random>

namespace landau {

double AnisotropicGaussian::density(const Vec& v) const {
  double e = 0.0, norm = 1.0;
  for (int k = 0; k < dim; ++k) {
    const double z = v[k] - mean[k];
    e += z * z / variances[k];
    norm *= 2.0 * M_PI * variances[k];
  }
  return std::exp(-0.5 * e) / std::sqrt(norm);
}

int InitialDensity::dim() const {
  return std::visit([](const auto& d) -> int {
    if constexpr (std::is_same_v<std::decay_t<decltype(d)>, AnalyticDensity>)
      return d.dim();
    else
      return d.dim;
  }, impl_);
}

double InitialDensity::density(const Vec& v) const {
  return std::visit([&](const auto& d) { return d.density(v); }, impl_);
}

double InitialDensity::extent() const {
  if (const auto* a = analytic()) return a->extent();
  const auto& g = *anisotropic();
  return g.mean.head(g.dim).cwiseAbs().maxCoeff() + std::sqrt(g.variances.head(g.dim).maxCoeff());
}

double InitialDensity::spread() const {
  if (const auto* g = anisotropic()) return std::sqrt(g->variances.head(g->dim).mean());
  const auto& a = *analytic();
  // Per-axis second central moment of the mixture.
  Vec mean = Vec::Zero();
  for (const auto& c : a.components()) mean += c.weight * c.mean;
  double m2 = 0.0;
  for (const auto& c : a.components())
    m2 += c.weight * (c.variance + (c.mean - mean).head(a.dim()).squaredNorm() / a.dim());
  return std::sqrt(m2);
}

Sampling parse_sampling(const std::string& name) {
  if (name == "random") return Sampling::random;
  if (name == "qmc") return Sampling::qmc;
  if (name == "lattice") return Sampling::lattice;
  throw ConfigError(fmt::format("unknown sampling '{}' (expected random, qmc or lattice)", name));
}

std::string to_string(Sampling s) {
  switch (s) {
    case Sampling::random: return "random";
    case Sampling::qmc: return "qmc";
    default: return "lattice";
  }
}

namespace {

// Standard-normal transform of one uniform in (0, 1).
double normal_quantile(double u) {
  u = std::clamp(u, 1e-16, 1.0 - 1e-16);
  return std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
}

// Maps (component uniform, d normals) to a draw from the density.
Vec draw(const InitialDensity& density, double u_component, const Vec& normals) {
  const int d = density.dim();
  Vec v = Vec::Zero();
  if (const auto* g = density.anisotropic()) {
    for (int k = 0; k < d; ++k) v[k] = g->mean[k] + std::sqrt(g->variances[k]) * normals[k];
    return v;
  }
  const auto& comps = density.analytic()->components();
  std::size_t pick = comps.size() - 1;
  double acc = 0.0;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    acc += comps[c].weight;
    if (u_component < acc) {
      pick = c;
      break;
    }
  }
  for (int k = 0; k < d; ++k) v[k] = comps[pick].mean[k] + std::sqrt(comps[pick].variance) * normals[k];
  return v;
}

ParticleEnsemble lattice_ensemble(const InitialDensity& density, std::size_t n) {
  const int d = density.dim();
  const int per_axis = std::max(2, static_cast<int>(std::lround(std::pow(static_cast<double>(n), 1.0 / d))));
  const double half = 6.0 * density.extent();
  const double h = 2.0 * half / per_axis;
  std::vector<Vec> points;
  std::vector<double> weights;
  std::array<int, 3> idx{0, 0, 0};
  const int last = d == 3 ? per_axis : 1;
  for (idx[0] = 0; idx[0] < per_axis; ++idx[0])
    for (idx[1] = 0; idx[1] < per_axis; ++idx[1])
      for (idx[2] = 0; idx[2] < last; ++idx[2]) {
        Vec v = Vec::Zero();
        for (int k = 0; k < d; ++k) v[k] = -half + (idx[k] + 0.5) * h;
        const double w = density.density(v);
        if (w > 0.0) {
          points.push_back(v);
          weights.push_back(w);
        }
      }
  double sum = 0.0;
  for (double w : weights) sum += w;
  for (double& w : weights) w /= sum;
  return ParticleEnsemble::from_points(d, points, std::move(weights));
}

}  // namespace

ParticleEnsemble sample_ensemble(const InitialDensity& density, std::size_t n, Sampling sampling,
                                 std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample_ensemble: N must be >= 1");
  if (sampling == Sampling::lattice) return lattice_ensemble(density, n);

  const int d = density.dim();
  std::vector<Vec> points(n);
  std::mt19937_64 rng(seed);
  if (sampling == Sampling::random) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    for (auto& p : points) {
      const double u = uniform(rng);
      Vec z = Vec::Zero();
      for (int k = 0; k < d; ++k) z[k] = normal(rng);
      p = draw(density, u, z);
    }
  } else {
    // Sobol points with a seeded Cranley-Patterson shift; coordinate 0 picks
    // the mixture component.
    const int dims = d + 1;
    boost::random::sobol sobol(dims);
    std::uniform_real_distribution<double> uniform;
    std::vector<double> shift(dims);
    for (auto& s : shift) s = uniform(rng);
    sobol.discard(dims);  // skip the origin
    for (auto& p : points) {
      std::vector<double> u(dims);
      for (int k = 0; k < dims; ++k) {
        const double x = std::ldexp(static_cast<double>(sobol()), -64) + shift[k];
        u[k] = x - std::floor(x);
      }
      Vec z = Vec::Zero();
      for (int k = 0; k < d; ++k) z[k] = normal_quantile(u[k + 1]);
      p = draw(density, u[0], z);
    }
  }
  return ParticleEnsemble::from_points(d, points);
}

GridDensity sample_grid(const InitialDensity& density, const GridSpec& grid, double mass_tolerance) {
  GridDensity g{grid, std::vector<double>(grid.size()), mass_tolerance};
  for (std::size_t i = 0; i < grid.size(); ++i) g.values[i] = density.density(grid.node(i));
  return g;
}

}  // namespace landau
