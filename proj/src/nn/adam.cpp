// SPDX-License-Identifier: Apache-2.0

#include "dmc/nn/adam.hpp"

#include "dmc/errors.hpp"

#include <cmath>

namespace dmc::nn {

Adam::Adam(std::vector<Param*> params, AdamOptions opts) : opts_(opts) {
    if (!(opts.lr > 0.0) || !(opts.beta1 >= 0.0 && opts.beta1 < 1.0) || !(opts.beta2 >= 0.0 && opts.beta2 < 1.0) ||
        !(opts.eps > 0.0)) {
        throw InvalidParam("invalid Adam options");
    }
    for (auto* p : params) {
        if (!p->trainable) continue;
        params_.push_back(p);
        m_.push_back(Eigen::VectorXd::Zero(p->size()));
        v_.push_back(Eigen::VectorXd::Zero(p->size()));
    }
}

void Adam::step() {
    ++t_;
    const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = *params_[i];
        m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * p.grad;
        v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * p.grad.cwiseAbs2();
        p.value.array() -= opts_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + opts_.eps);
    }
}

}  // namespace dmc::nn
