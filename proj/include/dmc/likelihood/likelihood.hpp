// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dmc/core/model.hpp"

#include <vector>

namespace dmc::likelihood {

/// Unconstrained parameter vector, per mode (log delta1, log delta2, delta3)
/// followed by log alpha0. delta3 is a location on the unit circle and is
/// wrapped modulo 1 when converted back to a model.
class EtaVector {
public:
    explicit EtaVector(Eigen::VectorXd values);

    const Eigen::VectorXd& values() const { return values_; }
    int size() const { return static_cast<int>(values_.size()); }
    int num_modes() const { return (size() - 1) / 3; }
    double operator[](int i) const { return values_(i); }

    double log_delta1(int mode) const { return values_(3 * mode); }
    double log_delta2(int mode) const { return values_(3 * mode + 1); }
    double delta3(int mode) const { return values_(3 * mode + 2); }
    double log_alpha0() const { return values_(size() - 1); }

    static int delta3_index(int mode) { return 3 * mode + 2; }

    /// Copy with every delta3 entry wrapped into [0, 1).
    EtaVector wrapped() const;

private:
    Eigen::VectorXd values_;
};

double wrap_unit(double x);

EtaVector pack(const core::DmcModel& model);
core::DmcModel unpack(const EtaVector& eta, int n_f);

/// Sample covariance S = (1/M) sum r_k r_k^H, kept together with a thin
/// factor Z (S = Z Z^H, at most n_f columns) used for cheap trace terms.
class SufficientStats {
public:
    static SufficientStats from_observation(const core::ChannelObservation& obs);
    static SufficientStats from_covariance(const core::HermitianMatrix& s, int m_snapshots);

    const core::HermitianMatrix& sample_covariance() const { return s_; }
    const Eigen::MatrixXcd& factor() const { return z_; }
    int m_snapshots() const { return m_; }
    int n_f() const { return s_.dim(); }

private:
    SufficientStats(core::HermitianMatrix s, Eigen::MatrixXcd z, int m);

    core::HermitianMatrix s_;
    Eigen::MatrixXcd z_;
    int m_;
};

/// Toeplitz lags of R(eta) = sum_i Sigma(mode_i) + alpha0 I.
Eigen::VectorXcd eta_lags(const EtaVector& eta, int n_f);

/// Lags of dR/d eta_a for every entry of eta (all are Hermitian Toeplitz).
std::vector<Eigen::VectorXcd> derivative_lags(const EtaVector& eta, int n_f);

/// M [log det R + Tr(R^{-1} S)], constants dropped.
double nll(const SufficientStats& stats, const EtaVector& eta);

/// Same objective evaluated directly from the snapshots.
double nll_from_observation(const core::ChannelObservation& obs, const EtaVector& eta);

/// Gradient of nll with respect to eta.
Eigen::VectorXd score(const SufficientStats& stats, const EtaVector& eta);

/// Fisher information M Tr(R^{-1} dR_a R^{-1} dR_b).
Eigen::MatrixXd fim(const EtaVector& eta, int n_f, int m_snapshots);

/// FIM block M Tr(W dR_a W dR_b) for given R^{-1} and derivative lags.
Eigen::MatrixXd covariance_fim(const Eigen::MatrixXcd& r_inverse, const std::vector<Eigen::VectorXcd>& dlags,
                               int m_snapshots);

struct Evaluation {
    double nll = 0.0;
    Eigen::VectorXd score;
    Eigen::MatrixXd fim;
};

/// nll, score and (optionally) FIM sharing one factorization.
Evaluation evaluate(const SufficientStats& stats, const EtaVector& eta, bool with_fim);

}  // namespace dmc::likelihood
