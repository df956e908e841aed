#include "pair_sums.hpp"

#include <cmath>

#include "pair_loops.inc"

namespace landau::detail {

void velocity_field_compensated(const ParticleEnsemble& e, const KernelParams& p, Columns& U,
                                const ExecPolicy& policy) {
  velocity_impl<CompensatedSum>(e, p, U, policy);
}

void blob_sums_compensated(const Columns& targets, const ParticleEnsemble& src, double delta, Columns& num,
                           std::vector<double>& den, const ExecPolicy& policy) {
  blob_impl<CompensatedSum>(targets, src, delta, num, den, policy);
}

void conv_A_self_compensated(const ParticleEnsemble& e, const KernelParams& p,
                             std::array<std::vector<double>, 6>& out, const ExecPolicy& policy) {
  conv_A_impl<CompensatedSum>(e, p, out, policy);
}

}  // namespace landau::detail
