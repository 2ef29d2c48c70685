// SPDX-License-Identifier: Apache-2.0

#include "dmc/estimator/estimator.hpp"

#include "dmc/core/pdp.hpp"
#include "dmc/errors.hpp"

#include <cmath>

namespace dmc::estimator {

using likelihood::EtaVector;

void LmOptions::validate() const {
    if (!(mu0 > 0.0 && mu_up > 1.0 && mu_down > 0.0 && mu_down < 1.0 && max_iters > 0 && grad_tol > 0.0 &&
          step_tol > 0.0 && max_inflations > 0)) {
        throw InvalidParam("invalid LM options");
    }
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::GradientTolerance: return "grad_tol";
        case Termination::StepTolerance: return "step_tol";
        case Termination::MaxIterations: return "max_iters";
        case Termination::NoProgress: return "no_progress";
    }
    return "unknown";
}

Termination termination_from_string(const std::string& s) {
    for (auto t : {Termination::GradientTolerance, Termination::StepTolerance, Termination::MaxIterations,
                   Termination::NoProgress}) {
        if (to_string(t) == s) return t;
    }
    throw InvalidParam("unknown termination reason '" + s + "'");
}

SingleModeStart single_mode_start(const core::Pdp& d) {
    if (d.domain() != core::PdpDomain::Linear) throw InvalidParam("initialization expects a linear PDP");
    const auto& v = d.values();
    const Eigen::Index n = v.size();
    if (n < 3) throw InvalidDim("initialization needs at least 3 PDP bins");
    if ((v.array() <= 0.0).any()) throw NonPositiveInput("initialization needs a strictly positive PDP");

    const double alpha0 = v.minCoeff();
    double delta1 = v.maxCoeff() - alpha0;
    if (!(delta1 > 0.0)) delta1 = 1e-6 * alpha0;  // flat profile
    const double delta2 = delta1 / (static_cast<double>(n) * (v.sum() - alpha0));

    Eigen::Index best = 0;  // 0-based j, the 1-based index is j + 1
    double best_jump = v(1) - v(0);
    for (Eigen::Index j = 1; j + 1 < n; ++j) {
        const double jump = v(j + 1) - v(j);
        if (jump > best_jump) {
            best_jump = jump;
            best = j;
        }
    }
    const double delta3 = static_cast<double>(best) / static_cast<double>(n - 1);

    return {alpha0, delta1, delta2, delta3};
}

EtaVector init_single_mode(const core::Pdp& d) {
    const auto s = single_mode_start(d);
    Eigen::VectorXd eta(4);
    eta << std::log(s.delta1), std::log(s.delta2), s.delta3, std::log(s.alpha0);
    return EtaVector(std::move(eta));
}

namespace {

// Every positive parameter must survive exp() as a normal double, or unpack fails.
bool representable(const EtaVector& eta) {
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        if (i % 3 == 2) continue;  // delta3; log alpha0 sits at index 3m
        if (!std::isnormal(std::exp(eta.values()(i)))) return false;
    }
    return true;
}

}  // namespace

FitReport lm_refine(const likelihood::SufficientStats& stats, const EtaVector& eta0, const LmOptions& opts) {
    opts.validate();
    FitReport rep;
    EtaVector eta = eta0.wrapped();
    double current = likelihood::nll(stats, eta);
    rep.nll_trace.push_back(current);
    double mu = opts.mu0;

    const auto p = eta.size();
    while (true) {
        if (rep.iterations >= opts.max_iters) {
            rep.termination_reason = Termination::MaxIterations;
            break;
        }
        const auto ev = likelihood::evaluate(stats, eta, true);
        if (ev.score.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
            rep.termination_reason = Termination::GradientTolerance;
            rep.converged = true;
            break;
        }

        bool accepted = false;
        bool tiny_step = false;
        for (int attempt = 0; attempt < opts.max_inflations; ++attempt) {
            const Eigen::MatrixXd damped = ev.fim + mu * Eigen::MatrixXd::Identity(p, p);
            const Eigen::VectorXd step = damped.ldlt().solve(-ev.score);
            if (!step.allFinite()) {
                mu *= opts.mu_up;
                continue;
            }
            if (step.lpNorm<Eigen::Infinity>() < opts.step_tol) {
                tiny_step = true;
                break;
            }
            const EtaVector candidate = EtaVector(eta.values() + step).wrapped();
            if (!representable(candidate)) {
                mu *= opts.mu_up;
                continue;
            }
            double trial = 0.0;
            try {
                trial = likelihood::nll(stats, candidate);
            } catch (const NotPositiveDefinite&) {
                mu *= opts.mu_up;
                continue;
            }
            if (trial < current) {
                eta = candidate;
                current = trial;
                mu *= opts.mu_down;
                accepted = true;
                break;
            }
            mu *= opts.mu_up;
        }

        if (tiny_step) {
            rep.termination_reason = Termination::StepTolerance;
            rep.converged = true;
            break;
        }
        if (!accepted) {
            if (rep.iterations == 0) throw NoDescentDirection("no decreasing step found at the initial point");
            // Even a vanishing gradient step fails: stationary to working precision.
            rep.termination_reason = Termination::NoProgress;
            rep.converged = true;
            break;
        }
        ++rep.iterations;
        rep.nll_trace.push_back(current);
    }
    rep.eta_hat = eta;
    return rep;
}

MultimodeEstimate estimate_multimode(const core::ChannelObservation& residual,
                                     const std::vector<core::Pdp>& separations, int model_order,
                                     const LmOptions& opts) {
    if (model_order < 0 || model_order > core::kMaxModes) throw InvalidParam("model order must be in 0..3");
    if (static_cast<int>(separations.size()) != model_order) {
        throw OrderMismatch("expected " + std::to_string(model_order) + " separations, got " +
                            std::to_string(separations.size()));
    }
    const int n = residual.n_f();
    const auto stats = likelihood::SufficientStats::from_observation(residual);
    const auto total = core::preprocess(residual);
    // E[d] = sqrt(n_f) (alpha0 + p(k / n_f)); work in model units.
    const double to_model = 1.0 / std::sqrt(static_cast<double>(n));

    if (model_order == 0) {
        const double alpha0 = total.values().mean() * to_model;
        core::DmcModel model({}, alpha0, n);
        FitReport rep;
        rep.eta_hat = likelihood::pack(model);
        rep.nll_trace.push_back(likelihood::nll(stats, rep.eta_hat));
        rep.converged = true;
        rep.termination_reason = Termination::GradientTolerance;
        return {std::move(model), std::move(rep)};
    }

    Eigen::VectorXd eta0(3 * model_order + 1);
    for (int k = 0; k < model_order; ++k) {
        const auto& sep = separations[static_cast<std::size_t>(k)];
        if (sep.size() != n) throw ShapeMismatch("separation length differs from n_f");
        const auto init = init_single_mode(core::Pdp::linear(sep.values() * to_model));
        eta0.segment(3 * k, 3) = init.values().head(3);
        // The closed-form decay is per squared bin; convert to normalized delay.
        eta0(3 * k + 1) += 2.0 * std::log(static_cast<double>(n));
    }
    eta0(3 * model_order) = std::log(total.values().minCoeff() * to_model);

    auto rep = lm_refine(stats, EtaVector(std::move(eta0)), opts);
    auto model = likelihood::unpack(rep.eta_hat, n);
    rep.eta_hat = likelihood::pack(model);
    return {std::move(model), std::move(rep)};
}

}  // namespace dmc::estimator
