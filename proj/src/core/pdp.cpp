// SPDX-License-Identifier: Apache-2.0

#include "dmc/core/pdp.hpp"

#include "dmc/core/covariance.hpp"
#include "dmc/errors.hpp"

#include "dmc/util/fft.hpp"

#include <cmath>

namespace dmc::core {

Eigen::VectorXcd unitary_idft(const Eigen::VectorXcd& x) {
    Eigen::VectorXcd out = x;
    util::fft(out.data(), static_cast<int>(out.size()), util::FftSign::Backward);
    return out / std::sqrt(static_cast<double>(x.size()));
}

Eigen::VectorXd toeplitz_pdp(const Eigen::VectorXcd& lags) {
    // E|(F* r)_k|^2 = (1/n) sum_{|d|<n} (n - |d|) t(d) exp(+j 2 pi d k / n)
    //              = (2/n) Re{ sum_d a(d) exp(+j 2 pi d k / n) },
    //   a(0) = n t(0) / 2, a(d) = (n - d) t(d).
    const Eigen::Index n = lags.size();
    const double nd = static_cast<double>(n);
    Eigen::VectorXcd a(n);
    a(0) = 0.5 * nd * lags(0);
    for (Eigen::Index d = 1; d < n; ++d) a(d) = (nd - static_cast<double>(d)) * lags(d);
    util::fft(a.data(), static_cast<int>(n), util::FftSign::Backward);
    Eigen::VectorXd out = (2.0 / std::sqrt(nd)) * a.real();
    return out.cwiseMax(0.0);
}

Pdp expected_pdp(const DmcModel& model) { return Pdp::linear(toeplitz_pdp(model_lags(model))); }

Pdp expected_mode_pdp(const ModeParams& mode, int n_f) {
    return Pdp::linear(toeplitz_pdp(mode_lags(mode, n_f)));
}

Pdp preprocess(const ChannelObservation& obs) {
    const int n = obs.n_f();
    const int m = obs.m_snapshots();
    Eigen::MatrixXcd y = obs.data();
    util::fft_many(y.data(), n, m, 1, n, util::FftSign::Backward);
    // sqrt(n) / m times |unitary idft|^2, the unitary 1/n folded in.
    Eigen::VectorXd d = y.cwiseAbs2().rowwise().sum() / (std::sqrt(static_cast<double>(n)) * m);
    return Pdp::linear(std::move(d));
}

Pdp normalize(const Pdp& d) {
    if (d.domain() != PdpDomain::Linear) throw InvalidParam("normalize expects a linear-domain PDP");
    if ((d.values().array() <= 0.0).any()) throw NonPositiveInput("normalize requires strictly positive PDP");
    const double peak = d.values().maxCoeff();
    const double log_peak = std::log(peak);
    Eigen::VectorXd out(d.size());
    for (int i = 0; i < d.size(); ++i) out(i) = std::log(d.values()(i)) - log_peak;
    return Pdp::log_normalized(std::move(out), peak);
}

Pdp denormalize(const Pdp& d_n) {
    if (d_n.domain() != PdpDomain::LogNormalized) {
        throw InvalidParam("denormalize expects a log-normalized PDP");
    }
    Eigen::VectorXd out(d_n.size());
    for (int i = 0; i < d_n.size(); ++i) out(i) = std::exp(d_n.values()(i)) * d_n.scale();
    return Pdp::linear(std::move(out));
}

}  // namespace dmc::core
