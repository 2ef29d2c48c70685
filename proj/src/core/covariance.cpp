// SPDX-License-Identifier: Apache-2.0

#include "dmc/core/covariance.hpp"

#include "dmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dmc::core {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_n_f(int n_f) {
    if (n_f < 2) throw InvalidDim("n_f must be at least 2, got " + std::to_string(n_f));
}

// exp(-j 2 pi k delta3), reducing k * delta3 modulo 1 first.
cplx delay_phase(long k, double delta3) {
    const double x = static_cast<double>(k) * delta3;
    const double frac = x - std::floor(x);
    return std::polar(1.0, -kTwoPi * frac);
}

std::optional<Eigen::MatrixXcd> dense_cholesky(const Eigen::VectorXcd& lags) {
    const auto r = HermitianMatrix::from_toeplitz(lags);
    Eigen::LLT<Eigen::MatrixXcd> llt(r.dense());
    if (llt.info() != Eigen::Success) return std::nullopt;
    return Eigen::MatrixXcd(llt.matrixL());
}

std::optional<Eigen::MatrixXcd> try_factorize(const Eigen::VectorXcd& lags) {
    if (auto l = toeplitz_cholesky(lags)) return l;
    return dense_cholesky(lags);
}

}  // namespace

Eigen::VectorXcd mode_lags(const ModeParams& mode, int n_f) {
    require_n_f(n_f);
    mode.validate();
    Eigen::VectorXcd t(n_f);
    t(0) = cplx(mode.delta1 / mode.delta2, 0.0);
    for (int k = 1; k < n_f; ++k) {
        t(k) = mode.delta1 / cplx(mode.delta2, kTwoPi * k) * delay_phase(k, mode.delta3);
    }
    return t;
}

Eigen::VectorXcd model_lags(const DmcModel& model) {
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(model.n_f());
    for (const auto& m : model.modes()) t += mode_lags(m, model.n_f());
    t(0) += model.alpha0();
    return t;
}

HermitianMatrix build_mode_covariance(const ModeParams& mode, int n_f) {
    return HermitianMatrix::from_toeplitz(mode_lags(mode, n_f));
}

HermitianMatrix build_full_covariance(const DmcModel& model) {
    const Eigen::VectorXcd lags = model_lags(model);
    factorize_with_jitter(lags);
    return HermitianMatrix::from_toeplitz(lags);
}

std::optional<Eigen::MatrixXcd> toeplitz_cholesky(const Eigen::VectorXcd& lags) {
    const Eigen::Index n = lags.size();
    if (n < 1) throw InvalidDim("empty Toeplitz generator");
    const double t0 = lags(0).real();
    if (!(t0 > 0.0) || !std::isfinite(t0)) return std::nullopt;

    // Generators of the displacement R - Z R Z^H = x x^H - y y^H.
    Eigen::VectorXcd x = lags / std::sqrt(t0);
    x(0) = cplx(std::sqrt(t0), 0.0);
    Eigen::VectorXcd y = x;
    y(0) = 0.0;

    Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        l.col(k).segment(k, n - k) = x.segment(k, n - k);
        if (k == n - 1) break;
        std::copy_backward(x.data() + k, x.data() + n - 1, x.data() + n);
        x(k) = 0.0;

        const cplx rho = y(k + 1) / x(k + 1);
        const double a = std::abs(rho);
        if (!(a < 1.0)) return std::nullopt;
        const double inv_s = 1.0 / std::sqrt((1.0 - a) * (1.0 + a));
        const double pr = rho.real(), pi = rho.imag();
        // Spelled out in reals: std::complex products go through NaN-checking helpers.
        for (Eigen::Index i = k + 1; i < n; ++i) {
            const double xr = x(i).real(), xim = x(i).imag();
            const double yr = y(i).real(), yim = y(i).imag();
            x(i) = cplx((xr - (pr * yr + pi * yim)) * inv_s, (xim - (pr * yim - pi * yr)) * inv_s);
            y(i) = cplx((yr - (pr * xr - pi * xim)) * inv_s, (yim - (pr * xim + pi * xr)) * inv_s);
        }
        x(k + 1) = cplx(x(k + 1).real(), 0.0);
        y(k + 1) = 0.0;
        if (!(x(k + 1).real() > 0.0)) return std::nullopt;
    }
    return l;
}

Eigen::MatrixXcd factorize_with_jitter(const Eigen::VectorXcd& lags) {
    if (auto l = try_factorize(lags)) return std::move(*l);
    Eigen::VectorXcd jittered = lags;
    // trace / n_f of a Toeplitz matrix is its zero lag
    jittered(0) += 1e-10 * lags(0).real();
    if (auto l = try_factorize(jittered)) return std::move(*l);
    throw NotPositiveDefinite("covariance is not positive definite");
}

}  // namespace dmc::core
