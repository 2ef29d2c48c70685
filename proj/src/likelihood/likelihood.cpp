// SPDX-License-Identifier: Apache-2.0

#include "dmc/likelihood/likelihood.hpp"

#include "dmc/core/covariance.hpp"
#include "dmc/errors.hpp"
#include "dmc/util/fft.hpp"

#include <cmath>
#include <numbers>

namespace dmc::likelihood {

using core::cplx;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ModeLagTerms {
    Eigen::VectorXcd t;      // Sigma lags
    Eigen::VectorXcd denom;  // delta2 + j 2 pi k
};

ModeLagTerms mode_terms(double delta1, double delta2, double delta3, int n_f) {
    ModeLagTerms m{Eigen::VectorXcd(n_f), Eigen::VectorXcd(n_f)};
    m.t(0) = cplx(delta1 / delta2, 0.0);
    m.denom(0) = cplx(delta2, 0.0);
    for (int k = 1; k < n_f; ++k) {
        const double x = static_cast<double>(k) * delta3;
        const cplx phase = std::polar(1.0, -kTwoPi * (x - std::floor(x)));
        m.denom(k) = cplx(delta2, kTwoPi * k);
        m.t(k) = delta1 / m.denom(k) * phase;
    }
    return m;
}

Eigen::MatrixXcd toeplitz_dense(const Eigen::VectorXcd& lags) {
    return core::HermitianMatrix::from_toeplitz(lags).dense();
}

// Lower Cholesky factor of the Toeplitz matrix; the Schur recursion handles
// the usual case and dense LLT catches the rest.
Eigen::MatrixXcd factorize(const Eigen::VectorXcd& lags) {
    if (auto l = core::toeplitz_cholesky(lags)) return std::move(*l);
    Eigen::LLT<Eigen::MatrixXcd> llt(toeplitz_dense(lags));
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite("R(eta) is not positive definite");
    return llt.matrixL();
}

double log_det(const Eigen::MatrixXcd& l) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) s += std::log(l(i, i).real());
    return 2.0 * s;
}

// Inverse of a lower-triangular matrix by 2x2 block recursion, so that most of
// the work lands in GEMM:
//   [A 0; B C]^{-1} = [A^{-1} 0; -C^{-1} B A^{-1}  C^{-1}].
Eigen::MatrixXcd lower_inverse(const Eigen::Ref<const Eigen::MatrixXcd>& l) {
    const Eigen::Index n = l.rows();
    if (n <= 32) {
        Eigen::MatrixXcd inv = Eigen::MatrixXcd::Identity(n, n);
        l.triangularView<Eigen::Lower>().solveInPlace(inv);
        return inv;
    }
    const Eigen::Index h = n / 2;
    Eigen::MatrixXcd inv = Eigen::MatrixXcd::Zero(n, n);
    inv.topLeftCorner(h, h) = lower_inverse(l.topLeftCorner(h, h));
    inv.bottomRightCorner(n - h, n - h) = lower_inverse(l.bottomRightCorner(n - h, n - h));
    Eigen::MatrixXcd t(n - h, h);
    t.noalias() = l.bottomLeftCorner(n - h, h) * inv.topLeftCorner(h, h);
    inv.bottomLeftCorner(n - h, h).noalias() = -inv.bottomRightCorner(n - h, n - h) * t;
    return inv;
}

// W = L^{-H} L^{-1}. The O(n^2) Trench recursion is not used: it loses all
// accuracy once R is moderately ill-conditioned.
Eigen::MatrixXcd inverse_from_cholesky(const Eigen::MatrixXcd& l) {
    const Eigen::Index n = l.rows();
    const Eigen::MatrixXcd linv = lower_inverse(l);
    Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(n, n);
    w.selfadjointView<Eigen::Lower>().rankUpdate(linv.adjoint());
    return w.selfadjointView<Eigen::Lower>();
}

double quadratic_term(const Eigen::MatrixXcd& l, const Eigen::MatrixXcd& z) {
    return l.triangularView<Eigen::Lower>().solve(z).squaredNorm();
}

// c(d) = sum_i B(i + d, i), d = 0..n-1.
Eigen::VectorXcd diagonal_sums(const Eigen::MatrixXcd& b) {
    const Eigen::Index n = b.rows();
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) c(i - j) += b(i, j);
    }
    return c;
}

// Tr(D B) for Hermitian Toeplitz D (lags d) and Hermitian B (diagonal sums c).
double toeplitz_trace(const Eigen::VectorXcd& d, const Eigen::VectorXcd& c) {
    double s = d(0).real() * c(0).real();
    for (Eigen::Index k = 1; k < d.size(); ++k) s += 2.0 * (std::conj(d(k)) * c(k)).real();
    return s;
}

}  // namespace

double wrap_unit(double x) {
    double w = x - std::floor(x);
    if (w >= 1.0) w = 0.0;
    return w;
}

EtaVector::EtaVector(Eigen::VectorXd values) : values_(std::move(values)) {
    if (values_.size() < 1 || (values_.size() - 1) % 3 != 0) {
        throw InvalidParam("eta must have length 3m+1, got " + std::to_string(values_.size()));
    }
    if (!values_.allFinite()) throw InvalidParam("eta has non-finite entries");
}

EtaVector EtaVector::wrapped() const {
    Eigen::VectorXd v = values_;
    for (int i = 0; i < num_modes(); ++i) v(delta3_index(i)) = wrap_unit(v(delta3_index(i)));
    return EtaVector(std::move(v));
}

EtaVector pack(const core::DmcModel& model) {
    Eigen::VectorXd v(3 * model.num_modes() + 1);
    for (int i = 0; i < model.num_modes(); ++i) {
        const auto& m = model.modes()[static_cast<std::size_t>(i)];
        v(3 * i) = m.log_delta1();
        v(3 * i + 1) = m.log_delta2();
        v(3 * i + 2) = m.delta3;
    }
    v(v.size() - 1) = std::log(model.alpha0());
    return EtaVector(std::move(v));
}

core::DmcModel unpack(const EtaVector& eta, int n_f) {
    std::vector<core::ModeParams> modes;
    for (int i = 0; i < eta.num_modes(); ++i) {
        modes.push_back(core::ModeParams::from_log(eta.log_delta1(i), eta.log_delta2(i), wrap_unit(eta.delta3(i))));
    }
    return core::DmcModel(std::move(modes), std::exp(eta.log_alpha0()), n_f);
}

SufficientStats::SufficientStats(core::HermitianMatrix s, Eigen::MatrixXcd z, int m)
    : s_(std::move(s)), z_(std::move(z)), m_(m) {}

SufficientStats SufficientStats::from_observation(const core::ChannelObservation& obs) {
    const int m = obs.m_snapshots();
    Eigen::MatrixXcd s = obs.data() * obs.data().adjoint() / static_cast<double>(m);
    // exact Hermitian storage
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
        s(j, j) = cplx(s(j, j).real(), 0.0);
        for (Eigen::Index i = j + 1; i < s.rows(); ++i) s(j, i) = std::conj(s(i, j));
    }
    if (m <= obs.n_f()) {
        Eigen::MatrixXcd z = obs.data() / std::sqrt(static_cast<double>(m));
        return SufficientStats(core::HermitianMatrix(std::move(s)), std::move(z), m);
    }
    return from_covariance(core::HermitianMatrix(std::move(s)), m);
}

SufficientStats SufficientStats::from_covariance(const core::HermitianMatrix& s, int m_snapshots) {
    if (m_snapshots < 1) throw InvalidDim("m_snapshots must be positive");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s.dense());
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of S failed");
    Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXcd z = es.eigenvectors() * root.asDiagonal();
    return SufficientStats(s, std::move(z), m_snapshots);
}

Eigen::VectorXcd eta_lags(const EtaVector& eta, int n_f) {
    if (n_f < 2) throw InvalidDim("n_f must be at least 2");
    Eigen::VectorXcd t = Eigen::VectorXcd::Zero(n_f);
    for (int i = 0; i < eta.num_modes(); ++i) {
        t += mode_terms(std::exp(eta.log_delta1(i)), std::exp(eta.log_delta2(i)), eta.delta3(i), n_f).t;
    }
    t(0) += std::exp(eta.log_alpha0());
    return t;
}

std::vector<Eigen::VectorXcd> derivative_lags(const EtaVector& eta, int n_f) {
    std::vector<Eigen::VectorXcd> out;
    out.reserve(static_cast<std::size_t>(eta.size()));
    Eigen::VectorXcd k_scale(n_f);
    for (int k = 0; k < n_f; ++k) k_scale(k) = cplx(0.0, -kTwoPi * k);
    for (int i = 0; i < eta.num_modes(); ++i) {
        const double delta2 = std::exp(eta.log_delta2(i));
        const auto m = mode_terms(std::exp(eta.log_delta1(i)), delta2, eta.delta3(i), n_f);
        // d/dlog delta1 = t, d/dlog delta2 = -delta2 t / denom, d/d delta3 = -j 2 pi k t
        out.push_back(m.t);
        Eigen::VectorXcd d2 = -delta2 * m.t.cwiseQuotient(m.denom);
        d2(0) = cplx(d2(0).real(), 0.0);
        out.push_back(std::move(d2));
        out.push_back(m.t.cwiseProduct(k_scale));
    }
    Eigen::VectorXcd da = Eigen::VectorXcd::Zero(n_f);
    da(0) = std::exp(eta.log_alpha0());
    out.push_back(std::move(da));
    return out;
}

double nll(const SufficientStats& stats, const EtaVector& eta) {
    const int n = stats.n_f();
    const auto l = factorize(eta_lags(eta, n));
    return stats.m_snapshots() * (log_det(l) + quadratic_term(l, stats.factor()));
}

double nll_from_observation(const core::ChannelObservation& obs, const EtaVector& eta) {
    const auto l = factorize(eta_lags(eta, obs.n_f()));
    double quad = 0.0;
    for (int k = 0; k < obs.m_snapshots(); ++k) {
        quad += l.triangularView<Eigen::Lower>().solve(obs.data().col(k)).squaredNorm();
    }
    return obs.m_snapshots() * log_det(l) + quad;
}

Eigen::MatrixXd covariance_fim(const Eigen::MatrixXcd& r_inverse, const std::vector<Eigen::VectorXcd>& dlags,
                               int m_snapshots) {
    // Embed each Toeplitz D_a in a circulant of size 2n with real spectrum
    // lambda_a. Then Tr(W D_a W D_b) = lambda_a^T |V|^2 lambda_b / (2n)^2 with
    // V = F W F^H for the zero-padded W (F the unnormalized DFT).
    const auto n = static_cast<int>(r_inverse.rows());
    const int n2 = 2 * n;
    const auto p = static_cast<Eigen::Index>(dlags.size());

    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(n2, n2);
    v.topLeftCorner(n, n) = r_inverse;
    util::fft_many(v.data(), n2, n, 1, n2, util::FftSign::Forward);
    util::fft_many(v.data(), n2, n2, n2, 1, util::FftSign::Backward);
    const Eigen::MatrixXd h = v.cwiseAbs2();

    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n2, p);
    for (Eigen::Index a = 0; a < p; ++a) {
        const auto& d = dlags[static_cast<std::size_t>(a)];
        if (d.size() != n) throw ShapeMismatch("derivative lags differ from n_f");
        c.col(a).head(n) = d;
        for (int k = 1; k < n; ++k) c(n2 - k, a) = std::conj(d(k));
    }
    util::fft_many(c.data(), n2, static_cast<int>(p), 1, n2, util::FftSign::Forward);
    const Eigen::MatrixXd lambda = c.real();

    Eigen::MatrixXd f = lambda.transpose() * (h * lambda);
    f *= static_cast<double>(m_snapshots) / (static_cast<double>(n2) * n2);
    return 0.5 * (f + f.transpose());
}

Eigen::MatrixXd fim(const EtaVector& eta, int n_f, int m_snapshots) {
    const Eigen::MatrixXcd w = inverse_from_cholesky(factorize(eta_lags(eta, n_f)));
    return covariance_fim(w, derivative_lags(eta, n_f), m_snapshots);
}

Evaluation evaluate(const SufficientStats& stats, const EtaVector& eta, bool with_fim) {
    const int n = stats.n_f();
    const auto l = factorize(eta_lags(eta, n));
    Evaluation out;
    out.nll = stats.m_snapshots() * (log_det(l) + quadratic_term(l, stats.factor()));

    const Eigen::MatrixXcd w = inverse_from_cholesky(l);
    const Eigen::MatrixXcd y = w * stats.factor();
    Eigen::MatrixXcd b = w;
    b.noalias() -= y * y.adjoint();
    const Eigen::VectorXcd c = diagonal_sums(b);

    const auto dlags = derivative_lags(eta, n);
    out.score.resize(eta.size());
    for (int a = 0; a < eta.size(); ++a) {
        out.score(a) = stats.m_snapshots() * toeplitz_trace(dlags[static_cast<std::size_t>(a)], c);
    }
    if (with_fim) out.fim = covariance_fim(w, dlags, stats.m_snapshots());
    return out;
}

Eigen::VectorXd score(const SufficientStats& stats, const EtaVector& eta) {
    return evaluate(stats, eta, false).score;
}

}  // namespace dmc::likelihood
