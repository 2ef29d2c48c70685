// SPDX-License-Identifier: Apache-2.0

#include "dmc/core/model.hpp"

#include "dmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dmc::core {

ModeParams ModeParams::from_log(double log_delta1, double log_delta2, double delta3) {
    return {std::exp(log_delta1), std::exp(log_delta2), delta3};
}

double ModeParams::log_delta1() const { return std::log(delta1); }
double ModeParams::log_delta2() const { return std::log(delta2); }

bool ModeParams::is_valid() const {
    return std::isfinite(delta1) && std::isfinite(delta2) && std::isfinite(delta3) && delta1 > 0.0 &&
           delta2 > 0.0 && delta3 >= 0.0 && delta3 < 1.0;
}

void ModeParams::validate() const {
    if (!is_valid()) {
        throw InvalidParam("mode parameters out of range: delta1=" + std::to_string(delta1) +
                           " delta2=" + std::to_string(delta2) + " delta3=" + std::to_string(delta3));
    }
}

void sort_canonical(std::vector<ModeParams>& modes) {
    std::stable_sort(modes.begin(), modes.end(), [](const ModeParams& a, const ModeParams& b) {
        if (a.delta3 != b.delta3) return a.delta3 < b.delta3;
        return a.delta1 > b.delta1;
    });
}

DmcModel::DmcModel(std::vector<ModeParams> modes, double alpha0, int n_f)
    : modes_(std::move(modes)), alpha0_(alpha0), n_f_(n_f) {
    if (n_f_ < 2) throw InvalidDim("n_f must be at least 2, got " + std::to_string(n_f_));
    if (!(alpha0_ > 0.0) || !std::isfinite(alpha0_)) {
        throw InvalidParam("alpha0 must be positive and finite");
    }
    if (num_modes() > kMaxModes) {
        throw InvalidParam("at most " + std::to_string(kMaxModes) + " modes are supported");
    }
    for (const auto& m : modes_) m.validate();
    sort_canonical(modes_);
}

DmcModel DmcModel::with_alpha0(double alpha0) const { return DmcModel(modes_, alpha0, n_f_); }

HermitianMatrix::HermitianMatrix(Eigen::MatrixXcd a) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) throw InvalidParam("Hermitian matrix must be square");
    for (Eigen::Index j = 0; j < a_.cols(); ++j) {
        for (Eigen::Index i = j; i < a_.rows(); ++i) {
            if (a_(i, j) != std::conj(a_(j, i))) throw InvalidParam("matrix is not exactly Hermitian");
        }
    }
}

HermitianMatrix HermitianMatrix::from_toeplitz(const Eigen::VectorXcd& lags) {
    const Eigen::Index n = lags.size();
    HermitianMatrix h;
    h.a_.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        h.a_(j, j) = cplx(lags(0).real(), 0.0);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            h.a_(i, j) = lags(i - j);
            h.a_(j, i) = std::conj(lags(i - j));
        }
    }
    return h;
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& other) {
    if (other.dim() != dim()) throw InvalidDim("Hermitian matrix dimension mismatch");
    a_ += other.a_;
    return *this;
}

ChannelObservation::ChannelObservation(Eigen::MatrixXcd data) : data_(std::move(data)) {
    if (data_.rows() < 1 || data_.cols() < 1) throw InvalidDim("observation must be non-empty");
}

Pdp::Pdp(Eigen::VectorXd values, double scale, PdpDomain domain)
    : values_(std::move(values)), scale_(scale), domain_(domain) {}

Pdp Pdp::linear(Eigen::VectorXd values) {
    if (values.size() < 1) throw InvalidDim("PDP must be non-empty");
    if ((values.array() < 0.0).any() || !values.allFinite()) {
        throw NonPositiveInput("linear PDP entries must be finite and non-negative");
    }
    return Pdp(std::move(values), 1.0, PdpDomain::Linear);
}

Pdp Pdp::log_normalized(Eigen::VectorXd values, double scale) {
    if (values.size() < 1) throw InvalidDim("PDP must be non-empty");
    if (values.maxCoeff() != 0.0) throw InvalidParam("log-normalized PDP must have maximum exactly 0");
    if (!(scale > 0.0)) throw InvalidParam("PDP scale must be positive");
    return Pdp(std::move(values), scale, PdpDomain::LogNormalized);
}

}  // namespace dmc::core
