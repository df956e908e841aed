#pragma once

#include "landau/parallel.hpp"
#include "landau/types.hpp"

#include <array>
#include <memory>
#include <vector>

namespace landau {

/// Regularized scalar prefactor (|z|^2 + eps^2)^(gamma/2).
double kernel_prefactor(double r2, const KernelParams& params);

/// A_eps(z) = (|z|^2 + eps^2)^(gamma/2) (|z|^2 I_d - z z^T). The projector is
/// kept exact, so A_eps(z) z = 0 for every eps. Throws SingularEvaluation for
/// z = 0 with eps = 0.
Mat eval_A(const Vec& z, const KernelParams& params);

/// b_eps(z) = div A_eps(z) = (1 - d) z (|z|^2 + eps^2)^(gamma/2).
Vec eval_b(const Vec& z, const KernelParams& params);

/// sum_j w_j A(v - v_j); coincident pairs contribute zero.
Mat conv_A_particles(const Vec& v, const ParticleEnsemble& ensemble, const KernelParams& params);
Vec conv_b_particles(const Vec& v, const ParticleEnsemble& ensemble, const KernelParams& params);

/// Symmetric d x d matrix per grid node / particle, stored as six columns
/// (xx, yy, zz, xy, xz, yz).
struct MatrixField {
  std::array<std::vector<double>, 6> comps;

  static MatrixField zeros(std::size_t n);
  std::size_t size() const { return comps[0].size(); }
  Mat at(std::size_t i) const;
  void set(std::size_t i, const Mat& m);
};

struct VectorField {
  Columns comps;

  static VectorField zeros(std::size_t n);
  std::size_t size() const { return comps[0].size(); }
  Vec at(std::size_t i) const { return column_at(comps, i); }
};

/// (A * g)(v_i) and (b * g)(v_i) at every particle of the ensemble itself.
MatrixField conv_A_at_particles(const ParticleEnsemble& ensemble, const KernelParams& params,
                                const ExecPolicy& policy = {});

enum class ConvolutionMethod { direct, fft };

/// Discrete convolution of grid values against the kernel pair,
///   out_i = sum_j tau_j h^d x_j K(v_i - v_j),
/// with trapezoid fractions tau_j and K(0) := 0. The direct double sum defines
/// the result; the FFT path reproduces it to roundoff.
class GridConvolver {
 public:
  GridConvolver(const GridSpec& grid, const KernelParams& params,
                ConvolutionMethod method = ConvolutionMethod::fft);
  ~GridConvolver();
  GridConvolver(GridConvolver&&) noexcept;
  GridConvolver& operator=(GridConvolver&&) noexcept;

  const GridSpec& grid() const { return grid_; }
  const KernelParams& params() const { return params_; }

  MatrixField conv_A(const std::vector<double>& values) const;
  VectorField conv_b(const std::vector<double>& values) const;
  /// Both at once; shares the forward transform of the values.
  void conv_both(const std::vector<double>& values, MatrixField& A, VectorField& b) const;

  /// Direct sum at an arbitrary point (not necessarily a node).
  Mat conv_A_at(const Vec& v, const std::vector<double>& values) const;
  Vec conv_b_at(const Vec& v, const std::vector<double>& values) const;

 private:
  struct Spectral;

  void conv_direct(const std::vector<double>& values, MatrixField* A, VectorField* b) const;

  GridSpec grid_;
  KernelParams params_;
  ConvolutionMethod method_;
  std::unique_ptr<Spectral> spectral_;
};

MatrixField conv_A_grid(const GridDensity& grid, const KernelParams& params,
                        ConvolutionMethod method = ConvolutionMethod::fft);
VectorField conv_b_grid(const GridDensity& grid, const KernelParams& params,
                        ConvolutionMethod method = ConvolutionMethod::fft);

/// Smallest eigenvalue and spectral norm of a symmetric d x d block.
double min_eigenvalue(const Mat& m, int d);
double spectral_norm(const Mat& m, int d);

}  // namespace landau
