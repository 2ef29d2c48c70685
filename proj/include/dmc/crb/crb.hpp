// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dmc/core/model.hpp"
#include "dmc/estimator/estimator.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dmc::crb {

/// Single specular path: complex weight gamma and normalized delay tau.
struct SpecularParams {
    double gamma_re = 1.0;
    double gamma_im = 0.0;
    double tau = 0.0;

    std::complex<double> gamma() const { return {gamma_re, gamma_im}; }
    void validate() const;
};

/// f_i = gamma exp(-j 2 pi i tau), i = 0..n_f-1.
Eigen::VectorXcd specular_response(const SpecularParams& sp, int n_f);

/// Columns d f / d gamma_re, d f / d gamma_im, d f / d tau.
Eigen::MatrixXcd specular_jacobian(const SpecularParams& sp, int n_f);

inline constexpr int kDelayIndex = 2;

/// Joint Fisher information over [gamma_re, gamma_im, tau, eta...] for M
/// snapshots with a common specular mean and DMC covariance R(model).
/// Mean and covariance parameters decouple, so the matrix is block diagonal.
Eigen::MatrixXd joint_fim(const SpecularParams& sp, const core::DmcModel& model, int m_snapshots);

/// Mean-parameter block 2 M Re{J^H R^{-1} J} alone.
Eigen::MatrixXd specular_fim(const SpecularParams& sp, const core::DmcModel& model, int m_snapshots);

/// [FIM^{-1}]_{index,index}; throws SingularFim when FIM is not invertible.
double crb_entry(const Eigen::MatrixXd& fim, int index);
double crb_delay(const Eigen::MatrixXd& fim);

struct MismatchExperimentConfig {
    int n_f = 256;
    int m_snapshots = 32;
    double alpha0 = 1e-8;
    core::ModeParams mode1{1e-5, 16.0, 0.05};
    core::ModeParams mode2{1e-6, 16.0, 0.50};  // delta1 replaced by the sweep levels
    SpecularParams specular{};
    std::vector<double> sweep;
    int trials_per_level = 200;
    std::uint64_t seed = 0;
    /// false: evaluate the two-mode bound at the generating parameters.
    bool fit_two_mode = true;
    estimator::LmOptions lm{};

    void validate() const;
};

/// Defaults used for the one-mode vs two-mode mismatch sweep.
MismatchExperimentConfig default_mismatch_config();

struct MismatchRecord {
    double delta1_level = 0.0;
    double crb_one_mode = 0.0;
    double crb_two_mode = 0.0;
    int n_failed_one = 0;
    int n_failed_two = 0;
};

/// Per level: draw residuals from the two-mode truth, fit one and two modes,
/// evaluate crb_delay at each fitted covariance and average over trials.
/// Trials run on up to `threads` workers; results do not depend on it.
std::vector<MismatchRecord> run_mismatch_experiment(const MismatchExperimentConfig& cfg, int threads = 1);

void write_mismatch_csv(std::ostream& os, const std::vector<MismatchRecord>& records);

}  // namespace dmc::crb
