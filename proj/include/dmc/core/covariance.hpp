// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dmc/core/model.hpp"

#include <optional>

namespace dmc::core {

// Toeplitz covariances are represented by their first column ("lags"):
// lags[k] = R(i + k, i), k = 0..n_f-1. The upper triangle follows from
// Hermitian symmetry.

/// Lags of a single mode:
///   t(k) = delta1 / (delta2 + j 2 pi k) * exp(-j 2 pi k delta3).
Eigen::VectorXcd mode_lags(const ModeParams& mode, int n_f);

/// Lags of sum(modes) + alpha0 I.
Eigen::VectorXcd model_lags(const DmcModel& model);

HermitianMatrix build_mode_covariance(const ModeParams& mode, int n_f);

/// R = sum_i Sigma(mode_i) + alpha0 I. Throws NotPositiveDefinite when R
/// cannot be factorized even after the jitter retry.
HermitianMatrix build_full_covariance(const DmcModel& model);

/// Cholesky factor of a Hermitian positive definite Toeplitz matrix via the
/// Schur algorithm in O(n^2). Returns nullopt when a pivot is not positive.
std::optional<Eigen::MatrixXcd> toeplitz_cholesky(const Eigen::VectorXcd& lags);

/// Lower Cholesky factor of the Toeplitz matrix with the given lags. When
/// the first attempt fails the diagonal is inflated once by
/// 1e-10 * trace / n_f; a second failure throws NotPositiveDefinite.
Eigen::MatrixXcd factorize_with_jitter(const Eigen::VectorXcd& lags);

}  // namespace dmc::core
