// SPDX-License-Identifier: Apache-2.0

#include "dmc/io/tensor_file.hpp"

#include "dmc/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

namespace dmc::io {

namespace {

constexpr std::uint8_t kMagic[4] = {0x44, 0x4D, 0x43, 0x54};
constexpr std::uint8_t kVersion = 0x01;

static_assert(std::endian::native == std::endian::little, "DMCT I/O assumes a little-endian host");

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t element_count(const std::vector<std::uint64_t>& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::uint64_t{1}, std::multiplies<>());
}

std::vector<std::uint8_t> header(DType dtype, const std::vector<std::uint64_t>& dims) {
    if (dims.size() > 255) throw InvalidDim("tensor rank exceeds 255");
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.push_back(kVersion);
    out.push_back(static_cast<std::uint8_t>(dtype));
    out.push_back(static_cast<std::uint8_t>(dims.size()));
    for (auto d : dims) put_u64(out, d);
    return out;
}

struct Parsed {
    DType dtype;
    std::vector<std::uint64_t> dims;
    std::size_t payload_offset;
};

Parsed parse_header(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 7 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("not a DMCT file");
    if (bytes[4] != kVersion) throw IoError("unsupported DMCT version " + std::to_string(bytes[4]));
    const auto dt = bytes[5];
    if (dt != 0x01 && dt != 0x02) throw IoError("unknown DMCT dtype " + std::to_string(dt));
    const std::size_t rank = bytes[6];
    if (bytes.size() < 7 + 8 * rank) throw IoError("truncated DMCT header");
    Parsed p{static_cast<DType>(dt), {}, 7 + 8 * rank};
    for (std::size_t i = 0; i < rank; ++i) p.dims.push_back(get_u64(bytes.data() + 7 + 8 * i));
    return p;
}

template <typename T>
std::vector<T> payload(const std::vector<std::uint8_t>& bytes, const Parsed& p) {
    const std::uint64_t n = element_count(p.dims);
    if (bytes.size() != p.payload_offset + n * sizeof(T)) throw IoError("DMCT payload size mismatch");
    std::vector<T> out(n);
    if (n > 0) std::memcpy(out.data(), bytes.data() + p.payload_offset, n * sizeof(T));
    return out;
}

template <typename T>
std::vector<std::uint8_t> encode_impl(DType dtype, const std::vector<std::uint64_t>& dims,
                                      const std::vector<T>& data) {
    if (element_count(dims) != data.size()) throw ShapeMismatch("tensor dims do not match data size");
    auto out = header(dtype, dims);
    const auto* raw = reinterpret_cast<const std::uint8_t*>(data.data());
    out.insert(out.end(), raw, raw + data.size() * sizeof(T));
    return out;
}

}  // namespace

std::vector<std::uint8_t> encode(const RealTensor& t) { return encode_impl(DType::F64, t.dims, t.data); }
std::vector<std::uint8_t> encode(const ComplexTensor& t) { return encode_impl(DType::C128, t.dims, t.data); }

DType peek_dtype(const std::vector<std::uint8_t>& bytes) { return parse_header(bytes).dtype; }

RealTensor decode_real(const std::vector<std::uint8_t>& bytes) {
    const auto p = parse_header(bytes);
    if (p.dtype != DType::F64) throw IoError("expected a real (f64) DMCT tensor");
    return {p.dims, payload<double>(bytes, p)};
}

ComplexTensor decode_complex(const std::vector<std::uint8_t>& bytes) {
    const auto p = parse_header(bytes);
    if (p.dtype != DType::C128) throw IoError("expected a complex DMCT tensor");
    return {p.dims, payload<std::complex<double>>(bytes, p)};
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

void write_tensor(const std::filesystem::path& path, const RealTensor& t) { write_bytes(path, encode(t)); }
void write_tensor(const std::filesystem::path& path, const ComplexTensor& t) { write_bytes(path, encode(t)); }

RealTensor read_real_tensor(const std::filesystem::path& path) { return decode_real(read_bytes(path)); }
ComplexTensor read_complex_tensor(const std::filesystem::path& path) { return decode_complex(read_bytes(path)); }

ComplexTensor to_tensor(const core::ChannelObservation& obs) {
    ComplexTensor t;
    t.dims = {static_cast<std::uint64_t>(obs.n_f()), static_cast<std::uint64_t>(obs.m_snapshots())};
    t.data.reserve(obs.data().size());
    for (int i = 0; i < obs.n_f(); ++i) {
        for (int j = 0; j < obs.m_snapshots(); ++j) t.data.push_back(obs.data()(i, j));
    }
    return t;
}

core::ChannelObservation observation_from_tensor(const ComplexTensor& t) {
    if (t.dims.size() != 2) throw IoError("observation tensor must have rank 2");
    const auto rows = static_cast<Eigen::Index>(t.dims[0]);
    const auto cols = static_cast<Eigen::Index>(t.dims[1]);
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = t.data[static_cast<std::size_t>(i * cols + j)];
    }
    return core::ChannelObservation(std::move(m));
}

RealTensor to_tensor(const core::Pdp& pdp) {
    const auto& v = pdp.values();
    return {{static_cast<std::uint64_t>(v.size())}, std::vector<double>(v.data(), v.data() + v.size())};
}

core::Pdp pdp_from_tensor(const RealTensor& t) {
    if (t.dims.size() != 1) throw IoError("PDP tensor must have rank 1");
    return core::Pdp::linear(Eigen::Map<const Eigen::VectorXd>(t.data.data(), static_cast<Eigen::Index>(t.data.size())));
}

}  // namespace dmc::io
