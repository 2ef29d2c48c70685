// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>

namespace dmc::util {

enum class FftSign { Forward, Backward };

/// In-place unnormalized DFTs of `howmany` sequences of length n. Element k
/// of sequence s lives at data[s * dist + k * stride]. Forward uses
/// exp(-j 2 pi k l / n). Plans are cached and reentrant.
void fft_many(std::complex<double>* data, int n, int howmany, int stride, int dist, FftSign sign);

inline void fft(std::complex<double>* data, int n, FftSign sign) { fft_many(data, n, 1, 1, n, sign); }

}  // namespace dmc::util
