#pragma once

// O(N^2) particle pair sums. Two builds of the same loops exist: a fast one
// (vectorized, relaxed floating point) and a deterministic one with fixed
// summation order and compensated accumulators.

#include "landau/parallel.hpp"
#include "landau/types.hpp"

#include <array>
#include <vector>

namespace landau::detail {

/// U_i = -sum_j w_j A(v_i - v_j)(s_i - s_j). Requires scores.
void velocity_field_fast(const ParticleEnsemble& e, const KernelParams& p, Columns& U, const ExecPolicy& policy);
void velocity_field_compensated(const ParticleEnsemble& e, const KernelParams& p, Columns& U,
                                const ExecPolicy& policy);

/// den_i = sum_j w_j exp(-|t_i - v_j|^2 / (2 delta^2)),
/// num_i = sum_j w_j exp(...) (v_j - t_i) / delta^2.
void blob_sums_fast(const Columns& targets, const ParticleEnsemble& src, double delta, Columns& num,
                    std::vector<double>& den, const ExecPolicy& policy);
void blob_sums_compensated(const Columns& targets, const ParticleEnsemble& src, double delta, Columns& num,
                           std::vector<double>& den, const ExecPolicy& policy);

/// (A * g)(v_i) at the particles themselves, six symmetric components.
void conv_A_self_fast(const ParticleEnsemble& e, const KernelParams& p, std::array<std::vector<double>, 6>& out,
                      const ExecPolicy& policy);
void conv_A_self_compensated(const ParticleEnsemble& e, const KernelParams& p,
                             std::array<std::vector<double>, 6>& out, const ExecPolicy& policy);

}  // namespace landau::detail
