// SPDX-License-Identifier: Apache-2.0

#include "dmc/nn/loss.hpp"

#include "dmc/errors.hpp"

#include <cmath>

namespace dmc::nn {

std::vector<int> predicted_orders(const Tensor3& logits) {
    if (logits.length() != 1) throw ShapeMismatch("logits must be [B,C,1], got " + logits.shape_string());
    std::vector<int> out(static_cast<std::size_t>(logits.batch()));
    for (int b = 0; b < logits.batch(); ++b) {
        int best = 0;
        for (int c = 1; c < logits.channels(); ++c) {
            if (logits(b, c, 0) > logits(b, best, 0)) best = c;
        }
        out[static_cast<std::size_t>(b)] = best;
    }
    return out;
}

LossResult composite_loss(const Tensor3& pred_modes, const Tensor3& logits, const Tensor3& label_modes,
                          const std::vector<int>& orders, const LossWeights& w) {
    require_same_shape(pred_modes, label_modes, "loss modes");
    const int nb = pred_modes.batch();
    const int nd = pred_modes.channels();
    const int nl = pred_modes.length();
    if (logits.batch() != nb || logits.channels() != nd + 1 || logits.length() != 1) {
        throw ShapeMismatch("logits " + logits.shape_string() + " do not match modes " + pred_modes.shape_string());
    }
    if (static_cast<int>(orders.size()) != nb) throw ShapeMismatch("one order label per sample required");

    LossResult r;
    r.grad_modes = Tensor3(nb, nd, nl);
    r.grad_logits = Tensor3(nb, nd + 1, 1);
    r.predicted = predicted_orders(logits);
    const double inv_b = 1.0 / nb;

    for (int b = 0; b < nb; ++b) {
        const int order = orders[static_cast<std::size_t>(b)];
        if (order < 0 || order > nd) throw InvalidParam("order label out of range");
        const int active = r.predicted[static_cast<std::size_t>(b)];
        for (int k = 0; k < active; ++k) {
            for (int l = 0; l < nl; ++l) {
                const double diff = pred_modes(b, k, l) - label_modes(b, k, l);
                r.mode += w.w_x * diff * diff * inv_b;
                r.grad_modes(b, k, l) = 2.0 * w.w_x * diff * inv_b;
            }
        }

        double mx = logits(b, 0, 0);
        for (int c = 1; c <= nd; ++c) mx = std::max(mx, logits(b, c, 0));
        double z = 0.0;
        for (int c = 0; c <= nd; ++c) z += std::exp(logits(b, c, 0) - mx);
        const double log_z = mx + std::log(z);
        r.order += w.w_m * (log_z - logits(b, order, 0)) * inv_b;
        for (int c = 0; c <= nd; ++c) {
            const double p = std::exp(logits(b, c, 0) - log_z);
            r.grad_logits(b, c, 0) = w.w_m * (p - (c == order ? 1.0 : 0.0)) * inv_b;
        }
    }
    r.total = r.mode + r.order;
    return r;
}

}  // namespace dmc::nn
