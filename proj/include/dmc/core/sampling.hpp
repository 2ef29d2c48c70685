// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dmc/core/model.hpp"

#include <cstdint>

namespace dmc::core {

/// Draws `m_snapshots` i.i.d. columns r = L w with R = L L^H the full model
/// covariance and w standard circular complex Gaussian. Deterministic in
/// `seed`.
ChannelObservation sample_observation(const DmcModel& model, int m_snapshots, std::uint64_t seed);

}  // namespace dmc::core
