#include "landau/kernel.hpp"

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <mutex>

namespace landau {

namespace {

// The FFTW planner is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  return FftwBuffer<T>(static_cast<T*>(fftw_malloc(sizeof(T) * n)));
}

// Components of the symmetric matrix storage that are nonzero in dimension d.
std::vector<int> active_matrix_comps(int d) {
  return d == 3 ? std::vector<int>{0, 1, 2, 3, 4, 5} : std::vector<int>{0, 1, 3};
}

double matrix_comp(const Mat& m, int c) {
  switch (c) {
    case 0: return m(0, 0);
    case 1: return m(1, 1);
    case 2: return m(2, 2);
    case 3: return m(0, 1);
    case 4: return m(0, 2);
    default: return m(1, 2);
  }
}

}  // namespace

struct GridConvolver::Spectral {
  int dim = 3;
  int padded = 0;  // P = 2M
  std::size_t real_size = 0;
  std::size_t complex_size = 0;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<int> a_comps;
  std::vector<FftwBuffer<fftw_complex>> a_hat;  // indexed like a_comps
  std::vector<FftwBuffer<fftw_complex>> b_hat;  // d entries

  ~Spectral() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  std::size_t padded_index(const std::array<int, 3>& idx) const {
    std::size_t f = 0;
    for (int k = 0; k < dim; ++k) f = f * padded + static_cast<std::size_t>((idx[k] + padded) % padded);
    return f;
  }
};

GridConvolver::GridConvolver(const GridSpec& grid, const KernelParams& params, ConvolutionMethod method)
    : grid_(grid), params_(params), method_(method) {
  if (method_ != ConvolutionMethod::fft) return;

  auto s = std::make_unique<Spectral>();
  const int d = grid.dim;
  const int M = grid.points;
  s->dim = d;
  s->padded = 2 * M;
  const int P = s->padded;
  s->real_size = 1;
  for (int k = 0; k < d; ++k) s->real_size *= P;
  s->complex_size = s->real_size / P * (P / 2 + 1);
  s->a_comps = active_matrix_comps(d);

  auto real = fftw_buffer<double>(s->real_size);
  auto cplx = fftw_buffer<fftw_complex>(s->complex_size);
  {
    std::lock_guard lock(planner_mutex());
    int n[3] = {P, P, P};
    s->forward = fftw_plan_dft_r2c(d, n, real.get(), cplx.get(), FFTW_ESTIMATE);
    s->backward = fftw_plan_dft_c2r(d, n, cplx.get(), real.get(), FFTW_ESTIMATE);
  }

  // Kernel samples on the displacement lattice m h, |m_k| <= M - 1, K(0) = 0.
  const double h = grid.spacing();
  const int ncomp = static_cast<int>(s->a_comps.size()) + d;
  for (int c = 0; c < ncomp; ++c) {
    std::fill(real.get(), real.get() + s->real_size, 0.0);
    std::array<int, 3> m{0, 0, 0};
    const int lo = -(M - 1), hi = M - 1;
    for (m[0] = lo; m[0] <= hi; ++m[0])
      for (m[1] = lo; m[1] <= hi; ++m[1])
        for (m[2] = (d == 3 ? lo : 0); m[2] <= (d == 3 ? hi : 0); ++m[2]) {
          if (m[0] == 0 && m[1] == 0 && m[2] == 0) continue;
          const Vec z(m[0] * h, m[1] * h, d == 3 ? m[2] * h : 0.0);
          double val;
          if (c < static_cast<int>(s->a_comps.size()))
            val = matrix_comp(eval_A(z, params), s->a_comps[c]);
          else
            val = eval_b(z, params)[c - s->a_comps.size()];
          real[s->padded_index(m)] = val;
        }
    fftw_execute_dft_r2c(s->forward, real.get(), cplx.get());
    auto out = fftw_buffer<fftw_complex>(s->complex_size);
    std::memcpy(out.get(), cplx.get(), sizeof(fftw_complex) * s->complex_size);
    if (c < static_cast<int>(s->a_comps.size()))
      s->a_hat.push_back(std::move(out));
    else
      s->b_hat.push_back(std::move(out));
  }
  spectral_ = std::move(s);
}

GridConvolver::~GridConvolver() = default;
GridConvolver::GridConvolver(GridConvolver&&) noexcept = default;
GridConvolver& GridConvolver::operator=(GridConvolver&&) noexcept = default;

void GridConvolver::conv_direct(const std::vector<double>& values, MatrixField* A, VectorField* b) const {
  const std::size_t n = grid_.size();
  if (A) *A = MatrixField::zeros(n);
  if (b) *b = VectorField::zeros(n);
  std::vector<double> mass(n);
  std::vector<Vec> nodes(n);
  for (std::size_t j = 0; j < n; ++j) {
    mass[j] = grid_.weight(j) * values[j];
    nodes[j] = grid_.node(j);
  }
  for (std::size_t i = 0; i < n; ++i) {
    Mat acc_a = Mat::Zero();
    Vec acc_b = Vec::Zero();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || mass[j] == 0.0) continue;
      const Vec z = nodes[i] - nodes[j];
      if (A) acc_a += mass[j] * eval_A(z, params_);
      if (b) acc_b += mass[j] * eval_b(z, params_);
    }
    if (A) A->set(i, acc_a);
    if (b) b->comps[0][i] = acc_b[0], b->comps[1][i] = acc_b[1], b->comps[2][i] = acc_b[2];
  }
}

void GridConvolver::conv_both(const std::vector<double>& values, MatrixField& A, VectorField& b) const {
  if (!spectral_) {
    conv_direct(values, &A, &b);
    return;
  }
  const Spectral& s = *spectral_;
  const std::size_t n = grid_.size();
  auto real = fftw_buffer<double>(s.real_size);
  auto xhat = fftw_buffer<fftw_complex>(s.complex_size);
  auto work = fftw_buffer<fftw_complex>(s.complex_size);
  std::fill(real.get(), real.get() + s.real_size, 0.0);
  std::vector<std::size_t> pad(n);
  for (std::size_t j = 0; j < n; ++j) {
    pad[j] = s.padded_index(grid_.index(j));
    real[pad[j]] = grid_.weight(j) * values[j];
  }
  fftw_execute_dft_r2c(s.forward, real.get(), xhat.get());
  const double scale = 1.0 / static_cast<double>(s.real_size);

  auto inverse = [&](const FftwBuffer<fftw_complex>& khat, std::vector<double>& out) {
    for (std::size_t k = 0; k < s.complex_size; ++k) {
      const double ar = xhat[k][0], ai = xhat[k][1];
      const double br = khat[k][0], bi = khat[k][1];
      work[k][0] = ar * br - ai * bi;
      work[k][1] = ar * bi + ai * br;
    }
    fftw_execute_dft_c2r(s.backward, work.get(), real.get());
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = real[pad[i]] * scale;
  };

  A = MatrixField::zeros(n);
  for (std::size_t c = 0; c < s.a_comps.size(); ++c) inverse(s.a_hat[c], A.comps[s.a_comps[c]]);
  b = VectorField::zeros(n);
  for (int k = 0; k < grid_.dim; ++k) inverse(s.b_hat[k], b.comps[k]);
}

MatrixField GridConvolver::conv_A(const std::vector<double>& values) const {
  MatrixField A;
  VectorField b;
  if (!spectral_) {
    conv_direct(values, &A, nullptr);
    return A;
  }
  conv_both(values, A, b);
  return A;
}

VectorField GridConvolver::conv_b(const std::vector<double>& values) const {
  MatrixField A;
  VectorField b;
  if (!spectral_) {
    conv_direct(values, nullptr, &b);
    return b;
  }
  conv_both(values, A, b);
  return b;
}

Mat GridConvolver::conv_A_at(const Vec& v, const std::vector<double>& values) const {
  Mat acc = Mat::Zero();
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    const double m = grid_.weight(j) * values[j];
    if (m == 0.0) continue;
    const Vec z = v - grid_.node(j);
    if (z.squaredNorm() == 0.0) continue;
    acc += m * eval_A(z, params_);
  }
  return acc;
}

Vec GridConvolver::conv_b_at(const Vec& v, const std::vector<double>& values) const {
  Vec acc = Vec::Zero();
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    const double m = grid_.weight(j) * values[j];
    if (m == 0.0) continue;
    const Vec z = v - grid_.node(j);
    if (z.squaredNorm() == 0.0) continue;
    acc += m * eval_b(z, params_);
  }
  return acc;
}

}  // namespace landau
