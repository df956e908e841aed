#include "landau/kernel.hpp"

#include "pair_sums.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace landau {

double kernel_prefactor(double r2, const KernelParams& p) {
  const double t = r2 + p.epsilon * p.epsilon;
  if (p.gamma == 0.0) return 1.0;
  if (p.gamma == -3.0) return 1.0 / (t * std::sqrt(t));
  if (p.gamma == -2.0) return 1.0 / t;
  if (p.gamma == -1.0) return 1.0 / std::sqrt(t);
  return std::pow(t, 0.5 * p.gamma);
}

namespace {

Vec truncate(Vec z, int d) {
  if (d == 2) z[2] = 0.0;
  return z;
}

void check_singular(double r2, const KernelParams& p, const char* what) {
  if (r2 == 0.0 && p.epsilon == 0.0)
    throw SingularEvaluation(fmt::format("{}: kernel evaluated at z = 0 with epsilon = 0", what));
}

}  // namespace

Mat eval_A(const Vec& z_in, const KernelParams& p) {
  const Vec z = truncate(z_in, p.d);
  const double r2 = z.squaredNorm();
  check_singular(r2, p, "eval_A");
  Mat m = -z * z.transpose();
  for (int k = 0; k < p.d; ++k) m(k, k) += r2;
  if (r2 == 0.0) return Mat::Zero();
  return kernel_prefactor(r2, p) * m;
}

Vec eval_b(const Vec& z_in, const KernelParams& p) {
  const Vec z = truncate(z_in, p.d);
  const double r2 = z.squaredNorm();
  check_singular(r2, p, "eval_b");
  if (r2 == 0.0) return Vec::Zero();
  return (1.0 - p.d) * kernel_prefactor(r2, p) * z;
}

Mat conv_A_particles(const Vec& v, const ParticleEnsemble& e, const KernelParams& p) {
  Mat acc = Mat::Zero();
  for (std::size_t j = 0; j < e.size(); ++j) {
    const Vec z = truncate(v - e.velocity(j), p.d);
    if (z.squaredNorm() == 0.0) continue;
    acc += e.weights[j] * eval_A(z, p);
  }
  return acc;
}

Vec conv_b_particles(const Vec& v, const ParticleEnsemble& e, const KernelParams& p) {
  Vec acc = Vec::Zero();
  for (std::size_t j = 0; j < e.size(); ++j) {
    const Vec z = truncate(v - e.velocity(j), p.d);
    if (z.squaredNorm() == 0.0) continue;
    acc += e.weights[j] * eval_b(z, p);
  }
  return acc;
}

MatrixField MatrixField::zeros(std::size_t n) {
  MatrixField f;
  for (auto& c : f.comps) c.assign(n, 0.0);
  return f;
}

Mat MatrixField::at(std::size_t i) const {
  Mat m;
  m << comps[0][i], comps[3][i], comps[4][i],  //
      comps[3][i], comps[1][i], comps[5][i],   //
      comps[4][i], comps[5][i], comps[2][i];
  return m;
}

void MatrixField::set(std::size_t i, const Mat& m) {
  comps[0][i] = m(0, 0);
  comps[1][i] = m(1, 1);
  comps[2][i] = m(2, 2);
  comps[3][i] = m(0, 1);
  comps[4][i] = m(0, 2);
  comps[5][i] = m(1, 2);
}

VectorField VectorField::zeros(std::size_t n) { return VectorField{make_columns(n)}; }

MatrixField conv_A_at_particles(const ParticleEnsemble& e, const KernelParams& p,
                                const ExecPolicy& policy) {
  MatrixField out = MatrixField::zeros(e.size());
  if (policy.deterministic)
    detail::conv_A_self_compensated(e, p, out.comps, policy);
  else
    detail::conv_A_self_fast(e, p, out.comps, policy);
  return out;
}

MatrixField conv_A_grid(const GridDensity& g, const KernelParams& p, ConvolutionMethod method) {
  return GridConvolver(g.grid, p, method).conv_A(g.values);
}

VectorField conv_b_grid(const GridDensity& g, const KernelParams& p, ConvolutionMethod method) {
  return GridConvolver(g.grid, p, method).conv_b(g.values);
}

double min_eigenvalue(const Mat& m, int d) {
  if (d == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m.topLeftCorner<2, 2>(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

double spectral_norm(const Mat& m, int d) {
  if (d == 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m.topLeftCorner<2, 2>(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace landau
