// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "dmc/core/model.hpp"

namespace dmc::core {

/// Unitary inverse DFT: (F* x)_k = n^{-1/2} sum_i x_i exp(+j 2 pi i k / n).
Eigen::VectorXcd unitary_idft(const Eigen::VectorXcd& x);

/// sqrt(n_f) * diag(F* R F) for the Toeplitz matrix with the given lags.
Eigen::VectorXd toeplitz_pdp(const Eigen::VectorXcd& lags);

/// Expected preprocessed PDP of the full model (modes plus noise floor).
Pdp expected_pdp(const DmcModel& model);

/// Expected preprocessed PDP of one mode alone, without the noise floor.
Pdp expected_mode_pdp(const ModeParams& mode, int n_f);

/// d = sqrt(n_f) / M * sum_k |F* r_k|^2.
Pdp preprocess(const ChannelObservation& obs);

/// d_n = log d - log max(d); scale = max(d). Throws NonPositiveInput.
Pdp normalize(const Pdp& d);

/// Inverse of normalize: exp(d_n) * scale.
Pdp denormalize(const Pdp& d_n);

}  // namespace dmc::core
