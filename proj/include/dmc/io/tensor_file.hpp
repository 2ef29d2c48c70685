// SPDX-License-Identifier: Apache-2.0

#pragma once

// DMCT tensor container:
//   magic "DMCT" | version 0x01 | dtype (0x01 f64, 0x02 complex f64) | rank
//   | rank x u64 little-endian dims | row-major little-endian payload.

#include "dmc/core/model.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace dmc::io {

enum class DType : std::uint8_t { F64 = 0x01, C128 = 0x02 };

struct RealTensor {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;

    friend bool operator==(const RealTensor&, const RealTensor&) = default;
};

struct ComplexTensor {
    std::vector<std::uint64_t> dims;
    std::vector<std::complex<double>> data;

    friend bool operator==(const ComplexTensor&, const ComplexTensor&) = default;
};

std::vector<std::uint8_t> encode(const RealTensor& t);
std::vector<std::uint8_t> encode(const ComplexTensor& t);

DType peek_dtype(const std::vector<std::uint8_t>& bytes);
RealTensor decode_real(const std::vector<std::uint8_t>& bytes);
ComplexTensor decode_complex(const std::vector<std::uint8_t>& bytes);

void write_tensor(const std::filesystem::path& path, const RealTensor& t);
void write_tensor(const std::filesystem::path& path, const ComplexTensor& t);
RealTensor read_real_tensor(const std::filesystem::path& path);
ComplexTensor read_complex_tensor(const std::filesystem::path& path);

ComplexTensor to_tensor(const core::ChannelObservation& obs);
core::ChannelObservation observation_from_tensor(const ComplexTensor& t);

/// Linear PDP as a rank-1 tensor.
RealTensor to_tensor(const core::Pdp& pdp);
core::Pdp pdp_from_tensor(const RealTensor& t);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace dmc::io
