// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmc/nn/tensor.hpp"

#include <vector>

namespace dmc::nn {

struct LossWeights {
    double w_x = 1.0;
    double w_m = 100.0;
};

struct LossResult {
    double total = 0.0;
    double mode = 0.0;   // weighted mode term, batch mean
    double order = 0.0;  // weighted cross-entropy, batch mean
    Tensor3 grad_modes;
    Tensor3 grad_logits;
    std::vector<int> predicted;  // argmax of the logits per sample
};

/// Batch mean of
///   w_x sum_{k < m~} |x_k - x~_k|^2 + w_m CE(softmax(logits), order),
/// with m~ the argmax of the logits (lowest index on ties). The mask is a
/// constant for differentiation, so decoders k >= m~ get zero gradient.
LossResult composite_loss(const Tensor3& pred_modes, const Tensor3& logits, const Tensor3& label_modes,
                          const std::vector<int>& orders, const LossWeights& w = {});

/// argmax over the class axis of [B, C, 1] logits.
std::vector<int> predicted_orders(const Tensor3& logits);

}  // namespace dmc::nn
