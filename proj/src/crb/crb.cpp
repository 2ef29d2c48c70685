// SPDX-License-Identifier: Apache-2.0

#include "dmc/crb/crb.hpp"

#include "dmc/core/covariance.hpp"
#include "dmc/core/pdp.hpp"
#include "dmc/core/sampling.hpp"
#include "dmc/errors.hpp"
#include "dmc/likelihood/likelihood.hpp"
#include "dmc/util/rng.hpp"

#include <atomic>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <thread>

namespace dmc::crb {

using core::cplx;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::MatrixXcd inverse_covariance(const core::DmcModel& model) {
    const auto r = core::HermitianMatrix::from_toeplitz(core::model_lags(model));
    Eigen::LLT<Eigen::MatrixXcd> llt(r.dense());
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("model covariance is not positive definite");
    return llt.solve(Eigen::MatrixXcd::Identity(model.n_f(), model.n_f()));
}

Eigen::MatrixXd mean_block(const Eigen::MatrixXcd& jac, const Eigen::MatrixXcd& w, int m_snapshots) {
    const Eigen::MatrixXcd g = jac.adjoint() * w * jac;
    return 2.0 * m_snapshots * g.real();
}

struct TrialOutcome {
    double crb_one = 0.0;
    double crb_two = 0.0;
    bool ok_one = false;
    bool ok_two = false;
};

double fitted_crb(const SpecularParams& sp, const core::ChannelObservation& obs,
                  const std::vector<core::Pdp>& separations, int order, const estimator::LmOptions& lm) {
    const auto est = estimator::estimate_multimode(obs, separations, order, lm);
    if (!est.report.converged) throw NumericalError("fit did not converge");
    // The joint FIM is block diagonal, so the delay bound only needs the mean block.
    return crb_delay(specular_fim(sp, est.model, obs.m_snapshots()));
}

TrialOutcome run_trial(const MismatchExperimentConfig& cfg, std::size_t level, int trial) {
    core::ModeParams second = cfg.mode2;
    second.delta1 = cfg.sweep[level];
    const core::DmcModel truth({cfg.mode1, second}, cfg.alpha0, cfg.n_f);
    const auto seed = util::derive_seed(cfg.seed, {level, static_cast<std::uint64_t>(trial)});
    const auto obs = core::sample_observation(truth, cfg.m_snapshots, seed);

    TrialOutcome out;
    try {
        out.crb_one = fitted_crb(cfg.specular, obs, {core::preprocess(obs)}, 1, cfg.lm);
        out.ok_one = std::isfinite(out.crb_one) && out.crb_one > 0.0;
    } catch (const std::exception&) {
        out.ok_one = false;
    }
    try {
        if (cfg.fit_two_mode) {
            std::vector<core::Pdp> seps;
            for (const auto& m : truth.modes()) seps.push_back(core::expected_mode_pdp(m, cfg.n_f));
            out.crb_two = fitted_crb(cfg.specular, obs, seps, 2, cfg.lm);
        } else {
            out.crb_two = crb_delay(specular_fim(cfg.specular, truth, cfg.m_snapshots));
        }
        out.ok_two = std::isfinite(out.crb_two) && out.crb_two > 0.0;
    } catch (const std::exception&) {
        out.ok_two = false;
    }
    return out;
}

}  // namespace

void SpecularParams::validate() const {
    if (!(tau >= 0.0 && tau < 1.0) || !std::isfinite(gamma_re) || !std::isfinite(gamma_im)) {
        throw InvalidParam("specular delay must lie in [0, 1) and weights must be finite");
    }
}

Eigen::VectorXcd specular_response(const SpecularParams& sp, int n_f) {
    sp.validate();
    if (n_f < 1) throw InvalidDim("n_f must be positive");
    Eigen::VectorXcd f(n_f);
    for (int i = 0; i < n_f; ++i) {
        const double x = static_cast<double>(i) * sp.tau;
        f(i) = sp.gamma() * std::polar(1.0, -kTwoPi * (x - std::floor(x)));
    }
    return f;
}

Eigen::MatrixXcd specular_jacobian(const SpecularParams& sp, int n_f) {
    sp.validate();
    Eigen::MatrixXcd j(n_f, 3);
    for (int i = 0; i < n_f; ++i) {
        const double x = static_cast<double>(i) * sp.tau;
        const cplx e = std::polar(1.0, -kTwoPi * (x - std::floor(x)));
        j(i, 0) = e;
        j(i, 1) = cplx(0.0, 1.0) * e;
        j(i, 2) = cplx(0.0, -kTwoPi * i) * sp.gamma() * e;
    }
    return j;
}

Eigen::MatrixXd specular_fim(const SpecularParams& sp, const core::DmcModel& model, int m_snapshots) {
    if (m_snapshots < 1) throw InvalidDim("m_snapshots must be positive");
    return mean_block(specular_jacobian(sp, model.n_f()), inverse_covariance(model), m_snapshots);
}

Eigen::MatrixXd joint_fim(const SpecularParams& sp, const core::DmcModel& model, int m_snapshots) {
    if (m_snapshots < 1) throw InvalidDim("m_snapshots must be positive");
    const Eigen::MatrixXcd w = inverse_covariance(model);
    const auto eta = likelihood::pack(model);
    const Eigen::MatrixXd cov = likelihood::covariance_fim(w, likelihood::derivative_lags(eta, model.n_f()), m_snapshots);

    const Eigen::Index p = 3 + cov.rows();
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(p, p);
    f.topLeftCorner(3, 3) = mean_block(specular_jacobian(sp, model.n_f()), w, m_snapshots);
    f.bottomRightCorner(cov.rows(), cov.cols()) = cov;
    return f;
}

double crb_entry(const Eigen::MatrixXd& fim, int index) {
    if (fim.rows() != fim.cols() || index < 0 || index >= fim.rows()) throw InvalidDim("bad FIM index");
    Eigen::LLT<Eigen::MatrixXd> llt(fim);
    if (llt.info() != Eigen::Success) throw SingularFim("Fisher information is singular");
    Eigen::VectorXd e = Eigen::VectorXd::Unit(fim.rows(), index);
    const double v = llt.solve(e)(index);
    if (!std::isfinite(v) || !(v > 0.0)) throw SingularFim("Fisher information is numerically singular");
    return v;
}

double crb_delay(const Eigen::MatrixXd& fim) { return crb_entry(fim, kDelayIndex); }

void MismatchExperimentConfig::validate() const {
    if (n_f < 4 || m_snapshots < 1 || trials_per_level < 1 || !(alpha0 > 0.0)) {
        throw InvalidParam("invalid mismatch experiment configuration");
    }
    mode1.validate();
    core::ModeParams probe = mode2;
    probe.delta1 = 1.0;
    probe.validate();
    specular.validate();
    if (sweep.empty()) throw InvalidParam("sweep must not be empty");
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        if (!(sweep[i] > 0.0)) throw InvalidParam("sweep levels must be positive");
        if (i > 0 && !(sweep[i] > sweep[i - 1])) throw InvalidParam("sweep must be strictly increasing");
    }
    lm.validate();
}

MismatchExperimentConfig default_mismatch_config() {
    MismatchExperimentConfig cfg;
    for (int i = 0; i < 8; ++i) cfg.sweep.push_back(std::pow(10.0, -7.0 + 3.0 * i / 7.0));

    // Path weight: delay-domain peak N |gamma|^2 about 15 dB above the first
    // mode plus noise at tau.
    cfg.specular.tau = 0.45;
    const core::DmcModel background({cfg.mode1}, cfg.alpha0, cfg.n_f);
    const auto pdp = core::expected_pdp(background);
    const auto bin = static_cast<Eigen::Index>(std::lround(cfg.specular.tau * cfg.n_f));
    const double level = pdp.values()(bin) / std::sqrt(static_cast<double>(cfg.n_f));
    cfg.specular.gamma_re = std::sqrt(std::pow(10.0, 1.5) * level / cfg.n_f);
    cfg.specular.gamma_im = 0.0;
    return cfg;
}

std::vector<MismatchRecord> run_mismatch_experiment(const MismatchExperimentConfig& cfg, int threads) {
    cfg.validate();
    const std::size_t levels = cfg.sweep.size();
    const auto trials = static_cast<std::size_t>(cfg.trials_per_level);
    std::vector<TrialOutcome> outcomes(levels * trials);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < outcomes.size(); job = next++) {
            outcomes[job] = run_trial(cfg, job / trials, static_cast<int>(job % trials));
        }
    };
    const int n_workers = std::max(1, threads);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<MismatchRecord> records;
    for (std::size_t l = 0; l < levels; ++l) {
        MismatchRecord rec;
        rec.delta1_level = cfg.sweep[l];
        double sum_one = 0.0, sum_two = 0.0;
        int ok_one = 0, ok_two = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto& o = outcomes[l * trials + t];
            if (o.ok_one) {
                sum_one += o.crb_one;
                ++ok_one;
            }
            if (o.ok_two) {
                sum_two += o.crb_two;
                ++ok_two;
            }
        }
        rec.n_failed_one = static_cast<int>(trials) - ok_one;
        rec.n_failed_two = static_cast<int>(trials) - ok_two;
        rec.crb_one_mode = ok_one > 0 ? sum_one / ok_one : std::numeric_limits<double>::quiet_NaN();
        rec.crb_two_mode = ok_two > 0 ? sum_two / ok_two : std::numeric_limits<double>::quiet_NaN();
        records.push_back(rec);
    }
    return records;
}

void write_mismatch_csv(std::ostream& os, const std::vector<MismatchRecord>& records) {
    os << "delta1_level,crb_one_mode,crb_two_mode,n_failed_one,n_failed_two\n";
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::scientific << std::setprecision(12);
    for (const auto& r : records) {
        os << r.delta1_level << ',' << r.crb_one_mode << ',' << r.crb_two_mode << ',' << r.n_failed_one << ','
           << r.n_failed_two << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

}  // namespace dmc::crb
