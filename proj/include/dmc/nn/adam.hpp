// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmc/nn/layers.hpp"

#include <cstdint>
#include <vector>

namespace dmc::nn {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam over the trainable entries of a fixed parameter list.
class Adam {
public:
    Adam(std::vector<Param*> params, AdamOptions opts = {});
    void step();

    std::int64_t steps() const { return t_; }
    void set_steps(std::int64_t t) { t_ = t; }
    /// First and second moments, aligned with the trainable parameters.
    std::vector<Eigen::VectorXd>& first_moments() { return m_; }
    std::vector<Eigen::VectorXd>& second_moments() { return v_; }
    const std::vector<Param*>& trainable() const { return params_; }

private:
    std::vector<Param*> params_;
    AdamOptions opts_;
    std::vector<Eigen::VectorXd> m_, v_;
    std::int64_t t_ = 0;
};

}  // namespace dmc::nn
