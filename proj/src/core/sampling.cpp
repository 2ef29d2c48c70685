// SPDX-License-Identifier: Apache-2.0

#include "dmc/core/sampling.hpp"

#include "dmc/core/covariance.hpp"
#include "dmc/errors.hpp"
#include "dmc/util/rng.hpp"

namespace dmc::core {

ChannelObservation sample_observation(const DmcModel& model, int m_snapshots, std::uint64_t seed) {
    if (m_snapshots < 1) throw InvalidDim("m_snapshots must be positive");
    const Eigen::MatrixXcd l = factorize_with_jitter(model_lags(model));

    util::Engine eng(seed);
    Eigen::MatrixXcd w(model.n_f(), m_snapshots);
    util::fill_complex_normal(eng, w.data(), static_cast<std::size_t>(w.size()));
    Eigen::MatrixXcd r = l.triangularView<Eigen::Lower>() * w;
    return ChannelObservation(std::move(r));
}

}  // namespace dmc::core
