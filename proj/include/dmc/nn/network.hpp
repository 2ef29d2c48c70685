// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmc/nn/layers.hpp"
#include "dmc/nn/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <vector>

namespace dmc::nn {

/// 1-D U-Net with one shared encoder, `num_decoders` decoders and an order
/// head. Lengths: stem /2, each encoder block /2, latent = input / 2^(E+1);
/// each decoder upsamples E+1 times from half the latent length and once more
/// in its output stage, back to input_length.
struct NetConfig {
    int input_length = 512;
    int base_channels = 32;
    int encoder_blocks = 4;
    int num_decoders = 3;
    int head_channels = 32;
    int fc1 = 128;
    int fc2 = 64;
    double output_bias = -8.0;  // initial decoder output level, near the mean log label

    int latent_length() const { return input_length >> (encoder_blocks + 1); }
    int latent_channels() const { return base_channels << encoder_blocks; }
    int split_length() const { return latent_length() / 2; }
    int num_classes() const { return num_decoders + 1; }

    /// Throws InvalidParam when the length arithmetic does not close.
    void validate() const;
    bool operator==(const NetConfig&) const = default;
};

nlohmann::json to_json(const NetConfig& c);
NetConfig net_config_from_json(const nlohmann::json& j);

struct NetOutput {
    Tensor3 modes;   // [B, num_decoders, input_length], log-normalized
    Tensor3 logits;  // [B, num_classes, 1]
};

class Network {
public:
    Network(const NetConfig& cfg, std::uint64_t seed);
    ~Network();
    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;

    const NetConfig& config() const { return cfg_; }

    /// input: [B, 1, input_length].
    NetOutput forward(const Tensor3& input, bool train);
    /// Accumulates parameter gradients for the last forward pass. Decoders
    /// whose output gradient is exactly zero are skipped.
    void backward(const Tensor3& grad_modes, const Tensor3& grad_logits);

    /// Parameters and buffers in a fixed order with unique names.
    std::vector<Param*> params();
    void zero_grad();
    std::size_t parameter_count();

private:
    struct Impl;
    NetConfig cfg_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace dmc::nn
