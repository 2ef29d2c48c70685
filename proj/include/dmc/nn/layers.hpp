// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmc/nn/tensor.hpp"
#include "dmc/util/rng.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace dmc::nn {

/// Named parameter or buffer. Buffers (trainable == false) are saved with the
/// weights but never touched by the optimizer.
struct Param {
    std::string name;
    std::vector<int> shape;
    Eigen::VectorXd value;
    Eigen::VectorXd grad;
    bool trainable = true;

    Param() = default;
    Param(std::string n, std::vector<int> s, bool train = true);
    Eigen::Index size() const { return value.size(); }
};

/// Layers cache what backward needs during forward. backward() adds into the
/// parameter gradients and returns the gradient w.r.t. the last input.
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor3 forward(const Tensor3& x, bool train) = 0;
    virtual Tensor3 backward(const Tensor3& grad_out) = 0;
    virtual std::vector<Param*> params() { return {}; }
};

/// 1-D convolution with circular padding.
class Conv1d final : public Layer {
public:
    Conv1d(const std::string& name, int in_ch, int out_ch, int kernel, int stride, int pad, util::Engine& eng);
    Tensor3 forward(const Tensor3& x, bool train) override;
    Tensor3 backward(const Tensor3& grad_out) override;
    std::vector<Param*> params() override { return {&weight_, &bias_}; }
    int out_length(int in_length) const;

    Param& weight() { return weight_; }  // [out, in, k]
    Param& bias() { return bias_; }

private:
    int in_ch_, out_ch_, k_, stride_, pad_;
    Param weight_, bias_;
    Eigen::MatrixXd col_;  // [in*k, B*Lout]
    int in_len_ = 0, batch_ = 0;
};

/// Transposed convolution without padding: Lout = (L - 1) stride + k.
class ConvTranspose1d final : public Layer {
public:
    ConvTranspose1d(const std::string& name, int in_ch, int out_ch, int kernel, int stride, util::Engine& eng);
    Tensor3 forward(const Tensor3& x, bool train) override;
    Tensor3 backward(const Tensor3& grad_out) override;
    std::vector<Param*> params() override { return {&weight_, &bias_}; }

private:
    int in_ch_, out_ch_, k_, stride_;
    Param weight_, bias_;  // weight [in, out, k]
    Eigen::MatrixXd x_;    // [in, B*L]
    int in_len_ = 0, batch_ = 0;
};

/// Per-channel normalization over batch and length.
class BatchNorm1d final : public Layer {
public:
    BatchNorm1d(const std::string& name, int channels, double momentum = 0.1, double eps = 1e-5);
    Tensor3 forward(const Tensor3& x, bool train) override;
    Tensor3 backward(const Tensor3& grad_out) override;
    std::vector<Param*> params() override { return {&gamma_, &beta_, &running_mean_, &running_var_}; }

private:
    int channels_;
    double momentum_, eps_;
    Param gamma_, beta_, running_mean_, running_var_;
    Tensor3 xhat_;
    Eigen::VectorXd inv_std_;
    bool trained_pass_ = false;
};

class Relu final : public Layer {
public:
    Tensor3 forward(const Tensor3& x, bool train) override;
    Tensor3 backward(const Tensor3& grad_out) override;

private:
    Tensor3 out_;
};

/// Fully connected on [B, in, 1] tensors.
class Linear final : public Layer {
public:
    Linear(const std::string& name, int in, int out, util::Engine& eng);
    Tensor3 forward(const Tensor3& x, bool train) override;
    Tensor3 backward(const Tensor3& grad_out) override;
    std::vector<Param*> params() override { return {&weight_, &bias_}; }

private:
    int in_, out_;
    Param weight_, bias_;  // weight [out, in]
    Eigen::MatrixXd x_;    // [in, B]
};

/// Linear map along the length axis shared by all channels:
/// y[b, c, :] = P x[b, c, :] + bias.
class LengthProjection final : public Layer {
public:
    LengthProjection(const std::string& name, int in_len, int out_len, util::Engine& eng);
    Tensor3 forward(const Tensor3& x, bool train) override;
    Tensor3 backward(const Tensor3& grad_out) override;
    std::vector<Param*> params() override { return {&weight_, &bias_}; }

private:
    int in_len_, out_len_;
    Param weight_, bias_;  // weight [out_len, in_len]
    Tensor3 x_;
};

/// [B, C, L] -> [B, C*L, 1] and back; the memory layout is unchanged.
Tensor3 flatten(const Tensor3& x);
Tensor3 unflatten(const Tensor3& x, int channels, int length);

}  // namespace dmc::nn
