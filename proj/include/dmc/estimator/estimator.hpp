// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dmc/core/model.hpp"
#include "dmc/likelihood/likelihood.hpp"

#include <string>
#include <vector>

namespace dmc::estimator {

struct LmOptions {
    double mu0 = 1e-2;
    double mu_up = 10.0;
    double mu_down = 0.1;
    int max_iters = 200;
    double grad_tol = 1e-8;   // on the max-norm of the score
    double step_tol = 1e-10;  // on the max-norm of the step
    int max_inflations = 20;

    /// Throws InvalidParam unless all positive and mu_down < 1 < mu_up.
    void validate() const;
};

enum class Termination { GradientTolerance, StepTolerance, MaxIterations, NoProgress };

std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct FitReport {
    likelihood::EtaVector eta_hat{Eigen::VectorXd::Zero(1)};
    std::vector<double> nll_trace;  // objective at start and after every accepted step
    int iterations = 0;
    bool converged = false;
    Termination termination_reason = Termination::MaxIterations;
};

struct SingleModeStart {
    double alpha0 = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
};

/// Single-mode starting point from a linear PDP:
///   alpha0 = min d, delta1 = max d - alpha0,
///   delta2 = delta1 / (n_f (|d|_1 - alpha0)),
///   delta3 = (argmax_i (d_{i+1} - d_i) - 1) / (n_f - 1), i 1-based.
/// A constant PDP falls back to delta1 = 1e-6 alpha0.
SingleModeStart single_mode_start(const core::Pdp& d);
/// single_mode_start packed as [log delta1, log delta2, delta3, log alpha0].
likelihood::EtaVector init_single_mode(const core::Pdp& d);

/// Damped Fisher-scoring refinement of the nll:
///   step = (FIM + mu I)^{-1} (-score),
/// accepted when the nll decreases. Throws NotPositiveDefinite when R(eta0)
/// is singular and NoDescentDirection when the very first iteration cannot
/// find a decreasing step.
FitReport lm_refine(const likelihood::SufficientStats& stats, const likelihood::EtaVector& eta0,
                    const LmOptions& opts = {});

struct MultimodeEstimate {
    core::DmcModel model;
    FitReport report;
};

/// Initializes every mode from its separated PDP, the shared noise floor
/// from the joint PDP, and refines all parameters jointly on the residual.
MultimodeEstimate estimate_multimode(const core::ChannelObservation& residual,
                                     const std::vector<core::Pdp>& separations, int model_order,
                                     const LmOptions& opts = {});

}  // namespace dmc::estimator
