// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmc/crb/crb.hpp"
#include "dmc/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace dmc;

TEST_CASE("white-noise delay bound matches the closed form") {
    const double pi = std::numbers::pi;
    for (int n : {8, 33, 128}) {
        for (int m : {1, 16}) {
            const double sigma2 = 0.3;
            const crb::SpecularParams sp{0.7, -0.4, 0.37};
            const core::DmcModel noise({}, sigma2, n);
            double s1 = 0.0, s2 = 0.0;
            for (int i = 0; i < n; ++i) {
                s1 += i;
                s2 += static_cast<double>(i) * i;
            }
            const double g2 = std::norm(sp.gamma());
            const double want = sigma2 / (2.0 * m * g2 * 4.0 * pi * pi * (s2 - s1 * s1 / n));
            CHECK(crb::crb_delay(crb::joint_fim(sp, noise, m)) == doctest::Approx(want).epsilon(1e-9));
            CHECK(crb::crb_delay(crb::specular_fim(sp, noise, m)) == doctest::Approx(want).epsilon(1e-9));
        }
    }
}

TEST_CASE("specular Jacobian matches finite differences") {
    const crb::SpecularParams sp{0.3, 0.8, 0.41};
    const auto j = crb::specular_jacobian(sp, 12);
    const double h = 1e-7;
    for (int a = 0; a < 3; ++a) {
        auto p = sp, q = sp;
        double* fp = a == 0 ? &p.gamma_re : a == 1 ? &p.gamma_im : &p.tau;
        double* fq = a == 0 ? &q.gamma_re : a == 1 ? &q.gamma_im : &q.tau;
        *fp += h;
        *fq -= h;
        const Eigen::VectorXcd fd = (crb::specular_response(p, 12) - crb::specular_response(q, 12)) / (2 * h);
        CHECK((fd - j.col(a)).norm() <= 1e-6 * (1.0 + fd.norm()));
    }
    CHECK_THROWS_AS(crb::specular_response({1.0, 0.0, 1.0}, 4), InvalidParam);
}

TEST_CASE("joint FIM is block diagonal between path and DMC parameters") {
    const core::DmcModel model({{1.0, 20.0, 0.2}, {0.5, 30.0, 0.6}}, 0.01, 32);
    const auto f = crb::joint_fim({1.0, 0.5, 0.3}, model, 8);
    REQUIRE(f.rows() == 3 + 7);
    CHECK(f.block(0, 3, 3, 7).cwiseAbs().maxCoeff() == 0.0);
    CHECK(f.block(3, 0, 7, 3).cwiseAbs().maxCoeff() == 0.0);
    CHECK((f - f.transpose()).norm() <= 1e-12 * f.norm());
    CHECK(crb::crb_entry(f, 0) > 0.0);
    CHECK_THROWS_AS(crb::crb_entry(Eigen::MatrixXd::Zero(3, 3), 0), SingularFim);
}

TEST_CASE("more DMC power at the path delay loosens the bound") {
    const crb::SpecularParams sp{1.0, 0.0, 0.45};
    const core::DmcModel weak({{1e-3, 10.0, 0.4}}, 0.01, 64);
    const core::DmcModel strong({{1.0, 10.0, 0.4}}, 0.01, 64);
    CHECK(crb::crb_delay(crb::specular_fim(sp, strong, 4)) > crb::crb_delay(crb::specular_fim(sp, weak, 4)));
}

TEST_CASE("mismatch sweep is deterministic and independent of the worker count") {
    auto cfg = crb::default_mismatch_config();
    cfg.n_f = 32;
    cfg.m_snapshots = 8;
    cfg.trials_per_level = 2;
    cfg.sweep = {1e-6, 1e-5};
    cfg.mode1 = {1e-4, 16.0, 0.05};
    cfg.alpha0 = 1e-7;
    const auto a = crb::run_mismatch_experiment(cfg, 1);
    const auto b = crb::run_mismatch_experiment(cfg, 3);
    std::ostringstream sa, sb;
    crb::write_mismatch_csv(sa, a);
    crb::write_mismatch_csv(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(a.size() == 2u);
    CHECK(sa.str().rfind("delta1_level,crb_one_mode,crb_two_mode,n_failed_one,n_failed_two\n", 0) == 0);
    CHECK(a[0].delta1_level == 1e-6);

    cfg.trials_per_level = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidParam);
}

TEST_CASE("default sweep spans 1e-7 to 1e-4 in eight levels") {
    const auto cfg = crb::default_mismatch_config();
    REQUIRE(cfg.sweep.size() == 8u);
    CHECK(cfg.sweep.front() == doctest::Approx(1e-7));
    CHECK(cfg.sweep.back() == doctest::Approx(1e-4));
    CHECK(cfg.specular.tau == 0.45);
    CHECK_NOTHROW(cfg.validate());
}
