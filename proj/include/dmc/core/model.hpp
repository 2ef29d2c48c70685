// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace dmc::core {

using cplx = std::complex<double>;

inline constexpr int kMaxModes = 3;

/// One dense multipath mode: peak power `delta1`, decay rate `delta2`
/// (per unit normalized delay) and onset delay `delta3` in [0, 1).
struct ModeParams {
    double delta1 = 1.0;
    double delta2 = 1.0;
    double delta3 = 0.0;

    static ModeParams from_log(double log_delta1, double log_delta2, double delta3);

    double log_delta1() const;
    double log_delta2() const;

    bool is_valid() const;
    /// Throws InvalidParam when an invariant is violated.
    void validate() const;

    friend bool operator==(const ModeParams&, const ModeParams&) = default;
};

/// Multi-modal DMC model. Modes are kept in canonical order: ascending
/// delta3, ties broken by descending delta1.
class DmcModel {
public:
    DmcModel(std::vector<ModeParams> modes, double alpha0, int n_f);

    const std::vector<ModeParams>& modes() const { return modes_; }
    int num_modes() const { return static_cast<int>(modes_.size()); }
    double alpha0() const { return alpha0_; }
    int n_f() const { return n_f_; }

    DmcModel with_alpha0(double alpha0) const;

    friend bool operator==(const DmcModel&, const DmcModel&) = default;

private:
    std::vector<ModeParams> modes_;
    double alpha0_;
    int n_f_;
};

void sort_canonical(std::vector<ModeParams>& modes);

/// Dense Hermitian matrix. Storage is kept exactly Hermitian: every builder
/// writes (j,i) as the conjugate of (i,j) and the diagonal is real.
class HermitianMatrix {
public:
    HermitianMatrix() = default;
    /// Throws InvalidParam unless `a` is square and exactly Hermitian.
    explicit HermitianMatrix(Eigen::MatrixXcd a);

    /// Toeplitz matrix with first column `lags` (lags[k] = A(i+k, i)).
    static HermitianMatrix from_toeplitz(const Eigen::VectorXcd& lags);

    int dim() const { return static_cast<int>(a_.rows()); }
    cplx operator()(int i, int j) const { return a_(i, j); }
    const Eigen::MatrixXcd& dense() const { return a_; }

    HermitianMatrix& operator+=(const HermitianMatrix& other);

private:
    Eigen::MatrixXcd a_;
};

/// Frequency-domain observation: n_f x M complex matrix, snapshots are columns.
class ChannelObservation {
public:
    ChannelObservation() = default;
    explicit ChannelObservation(Eigen::MatrixXcd data);

    int n_f() const { return static_cast<int>(data_.rows()); }
    int m_snapshots() const { return static_cast<int>(data_.cols()); }
    const Eigen::MatrixXcd& data() const { return data_; }

private:
    Eigen::MatrixXcd data_;
};

enum class PdpDomain { Linear, LogNormalized };

/// Power-delay profile, either linear power or log-normalized (max == 0).
class Pdp {
public:
    static Pdp linear(Eigen::VectorXd values);
    static Pdp log_normalized(Eigen::VectorXd values, double scale);

    const Eigen::VectorXd& values() const { return values_; }
    double scale() const { return scale_; }
    PdpDomain domain() const { return domain_; }
    int size() const { return static_cast<int>(values_.size()); }

private:
    Pdp(Eigen::VectorXd values, double scale, PdpDomain domain);

    Eigen::VectorXd values_;
    double scale_ = 1.0;
    PdpDomain domain_ = PdpDomain::Linear;
};

}  // namespace dmc::core
