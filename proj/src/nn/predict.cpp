// SPDX-License-Identifier: Apache-2.0

#include "dmc/nn/predict.hpp"

#include "dmc/core/pdp.hpp"
#include "dmc/errors.hpp"
#include "dmc/nn/loss.hpp"

#include <cmath>

namespace dmc::nn {

Prediction predict(Network& net, const core::Pdp& normalized) {
    const auto& cfg = net.config();
    if (normalized.domain() != core::PdpDomain::LogNormalized) {
        throw InvalidParam("predict expects a log-normalized PDP");
    }
    if (normalized.size() != cfg.input_length) {
        throw ShapeMismatch("PDP length " + std::to_string(normalized.size()) + " != network input " +
                            std::to_string(cfg.input_length));
    }
    Tensor3 x(1, 1, cfg.input_length);
    for (int i = 0; i < cfg.input_length; ++i) x(0, 0, i) = normalized.values()(i);
    const auto out = net.forward(x, false);

    Prediction p;
    p.order = predicted_orders(out.logits)[0];
    const int c = cfg.num_classes();
    double mx = out.logits(0, 0, 0);
    for (int k = 1; k < c; ++k) mx = std::max(mx, out.logits(0, k, 0));
    double z = 0.0;
    for (int k = 0; k < c; ++k) z += std::exp(out.logits(0, k, 0) - mx);
    for (int k = 0; k < c; ++k) p.probabilities.push_back(std::exp(out.logits(0, k, 0) - mx) / z);

    for (int k = 0; k < p.order; ++k) {
        // Decoder outputs share the input's scale but need not peak at 0.
        Eigen::VectorXd v(cfg.input_length);
        for (int i = 0; i < cfg.input_length; ++i) v(i) = std::exp(out.modes(0, k, i)) * normalized.scale();
        p.separations.push_back(core::Pdp::linear(std::move(v)));
    }
    return p;
}

Prediction predict(Network& net, const core::ChannelObservation& residual) {
    return predict(net, core::normalize(core::preprocess(residual)));
}

}  // namespace dmc::nn
