// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmc/core/model.hpp"
#include "dmc/nn/network.hpp"

#include <vector>

namespace dmc::nn {

struct Prediction {
    int order = 0;
    std::vector<double> probabilities;  // softmax over orders 0..num_decoders
    std::vector<core::Pdp> separations; // `order` linear-domain PDPs
};

/// Normalized input PDP (log domain, max 0) to prediction; the outputs are
/// rescaled by the input's stored scale.
Prediction predict(Network& net, const core::Pdp& normalized);

/// preprocess, normalize, forward in eval mode, denormalize.
Prediction predict(Network& net, const core::ChannelObservation& residual);

}  // namespace dmc::nn
