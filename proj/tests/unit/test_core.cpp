// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmc/core/covariance.hpp"
#include "dmc/core/pdp.hpp"
#include "dmc/core/sampling.hpp"
#include "dmc/errors.hpp"
#include "dmc/util/rng.hpp"

#include <cmath>
#include <numbers>

using namespace dmc;
using core::cplx;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

core::DmcModel random_model(util::Engine& eng, int n_f, int order) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<core::ModeParams> modes;
    for (int k = 0; k < order; ++k) {
        modes.push_back({util::log_uniform(eng, 1e-3, 1e1), util::log_uniform(eng, 0.5, 200.0), 0.95 * u(eng)});
    }
    return core::DmcModel(std::move(modes), util::log_uniform(eng, 1e-4, 1.0), n_f);
}

// Unitary inverse DFT matrix G(k, i) = exp(+j 2 pi i k / n) / sqrt(n).
Eigen::MatrixXcd idft_matrix(int n) {
    Eigen::MatrixXcd g(n, n);
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) g(k, i) = std::polar(1.0 / std::sqrt(n), kTwoPi * ((i * k) % n) / n);
    }
    return g;
}

}  // namespace

TEST_CASE("mode parameters validate their ranges") {
    CHECK(core::ModeParams{1.0, 2.0, 0.5}.is_valid());
    CHECK_FALSE(core::ModeParams{0.0, 2.0, 0.5}.is_valid());
    CHECK_FALSE(core::ModeParams{1.0, -1.0, 0.5}.is_valid());
    CHECK_FALSE(core::ModeParams{1.0, 2.0, 1.0}.is_valid());
    CHECK_THROWS_AS(core::ModeParams({1.0, 2.0, -0.1}).validate(), InvalidParam);
    CHECK_THROWS_AS(core::DmcModel({}, 0.0, 8), InvalidParam);
    CHECK_THROWS_AS(core::DmcModel({}, 1.0, 1), InvalidDim);
    CHECK_THROWS_AS(core::DmcModel(std::vector<core::ModeParams>(4, {1, 1, 0.1}), 1.0, 8), InvalidParam);
}

TEST_CASE("modes are stored in canonical order") {
    const core::DmcModel m({{1.0, 1.0, 0.7}, {2.0, 1.0, 0.2}, {3.0, 1.0, 0.2}}, 1.0, 8);
    CHECK(m.modes()[0].delta1 == 3.0);
    CHECK(m.modes()[1].delta1 == 2.0);
    CHECK(m.modes()[2].delta3 == 0.7);
    const auto p = core::ModeParams::from_log(std::log(2.0), std::log(5.0), 0.3);
    CHECK(p.delta1 == doctest::Approx(2.0));
    CHECK(p.delta2 == doctest::Approx(5.0));
}

TEST_CASE("mode lags follow the exponential PDP transform") {
    const core::ModeParams mode{0.7, 12.0, 0.31};
    const auto t = core::mode_lags(mode, 16);
    CHECK(t(0).real() == doctest::Approx(0.7 / 12.0));
    CHECK(t(0).imag() == 0.0);
    for (int k = 1; k < 16; ++k) {
        const cplx want = 0.7 / cplx(12.0, kTwoPi * k) * std::exp(cplx(0.0, -kTwoPi * k * 0.31));
        CHECK(std::abs(t(k) - want) < 1e-14);
    }
}

TEST_CASE("full covariance is exactly Toeplitz and Hermitian") {
    util::Engine eng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto model = random_model(eng, 24, trial % 4);
        const auto r = core::build_full_covariance(model).dense();
        double diag = model.alpha0();
        for (const auto& m : model.modes()) diag += m.delta1 / m.delta2;
        for (int i = 0; i < 24; ++i) {
            CHECK(r(i, i).imag() == 0.0);
            CHECK(r(i, i).real() == doctest::Approx(diag).epsilon(1e-13));
            for (int j = 0; j < 24; ++j) {
                CHECK(r(i, j) == std::conj(r(j, i)));
                if (i > 0 && j > 0) CHECK(r(i, j) == r(i - 1, j - 1));
            }
        }
    }
}

TEST_CASE("Hermitian matrix rejects non-Hermitian input") {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(3, 3);
    a(0, 1) = cplx(1.0, 1.0);
    CHECK_THROWS_AS(core::HermitianMatrix{a}, InvalidParam);
    CHECK_THROWS_AS(core::HermitianMatrix{Eigen::MatrixXcd::Zero(2, 3)}, InvalidParam);
}

TEST_CASE("Schur Toeplitz Cholesky matches the dense factor") {
    util::Engine eng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto model = random_model(eng, 40, 1 + trial % 3);
        const auto lags = core::model_lags(model);
        const auto r = core::HermitianMatrix::from_toeplitz(lags).dense();
        const auto l = core::toeplitz_cholesky(lags);
        REQUIRE(l.has_value());
        Eigen::LLT<Eigen::MatrixXcd> llt(r);
        const Eigen::MatrixXcd dense = llt.matrixL();
        CHECK((*l - dense).norm() / dense.norm() < 1e-10);
        CHECK(((*l) * l->adjoint() - r).norm() / r.norm() < 1e-12);
    }
}

TEST_CASE("factorization rejects indefinite generators") {
    Eigen::VectorXcd lags = Eigen::VectorXcd::Zero(4);
    lags(0) = 1.0;
    lags(1) = 2.0;
    CHECK_FALSE(core::toeplitz_cholesky(lags).has_value());
    CHECK_THROWS_AS(core::factorize_with_jitter(lags), NotPositiveDefinite);
    lags(0) = -1.0;
    CHECK_FALSE(core::toeplitz_cholesky(lags).has_value());
}

TEST_CASE("sampling is seed-deterministic and matches the covariance") {
    const core::DmcModel model({{0.5, 8.0, 0.2}}, 0.05, 6);
    const auto a = core::sample_observation(model, 5, 42);
    const auto b = core::sample_observation(model, 5, 42);
    const auto c = core::sample_observation(model, 5, 43);
    CHECK(a.data() == b.data());
    CHECK(a.data() != c.data());
    CHECK_THROWS_AS(core::sample_observation(model, 0, 1), InvalidDim);

    const int m = 40000;
    const auto obs = core::sample_observation(model, m, 7);
    const Eigen::MatrixXcd s = obs.data() * obs.data().adjoint() / static_cast<double>(m);
    const auto r = core::build_full_covariance(model).dense();
    CHECK((s - r).cwiseAbs().maxCoeff() < 6.0 * r(0, 0).real() / std::sqrt(m));
}

TEST_CASE("expected PDP equals the diagonal of the transformed covariance") {
    util::Engine eng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 8 + 4 * trial;
        const auto model = random_model(eng, n, trial % 4);
        const auto g = idft_matrix(n);
        const Eigen::MatrixXcd t = g * core::build_full_covariance(model).dense() * g.adjoint();
        const auto d = core::expected_pdp(model);
        for (int k = 0; k < n; ++k) CHECK(d.values()(k) == doctest::Approx(std::sqrt(n) * t(k, k).real()).epsilon(1e-10));
    }
}

TEST_CASE("preprocess averages the delay-domain power of the snapshots") {
    util::Engine eng(1);
    Eigen::MatrixXcd y(8, 3);
    for (int i = 0; i < y.size(); ++i) y.data()[i] = util::complex_normal(eng);
    const auto d = core::preprocess(core::ChannelObservation(y));
    const auto g = idft_matrix(8);
    const Eigen::VectorXd want = std::sqrt(8.0) / 3.0 * (g * y).cwiseAbs2().rowwise().sum();
    for (int k = 0; k < 8; ++k) CHECK(d.values()(k) == doctest::Approx(want(k)).epsilon(1e-12));

    const core::DmcModel model({{1.0, 30.0, 0.25}}, 0.01, 32);
    const auto mean = core::preprocess(core::sample_observation(model, 20000, 2));
    const auto e = core::expected_pdp(model);
    for (int k = 0; k < 32; ++k) CHECK(mean.values()(k) == doctest::Approx(e.values()(k)).epsilon(0.05));
}

TEST_CASE("normalize puts the peak at exactly zero and denormalize inverts it") {
    Eigen::VectorXd v(5);
    v << 0.3, 2.5, 1.0, 0.01, 7.0;
    const auto n = core::normalize(core::Pdp::linear(v));
    CHECK(n.domain() == core::PdpDomain::LogNormalized);
    CHECK(n.values().maxCoeff() == 0.0);
    CHECK(n.scale() == 7.0);
    const auto back = core::denormalize(n);
    for (int i = 0; i < 5; ++i) CHECK(back.values()(i) == doctest::Approx(v(i)).epsilon(1e-14));

    Eigen::VectorXd bad = v;
    bad(2) = 0.0;
    CHECK_THROWS_AS(core::normalize(core::Pdp::linear(bad)), NonPositiveInput);
    CHECK_THROWS_AS(core::normalize(n), InvalidParam);
    CHECK_THROWS_AS(core::denormalize(core::Pdp::linear(v)), InvalidParam);
}
