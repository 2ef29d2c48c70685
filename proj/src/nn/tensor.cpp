// SPDX-License-Identifier: Apache-2.0

#include "dmc/nn/tensor.hpp"

#include "dmc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dmc::nn {

Tensor3::Tensor3(int batch, int channels, int length) : b_(batch), c_(channels), l_(length) {
    if (batch < 1 || channels < 1 || length < 1) {
        throw InvalidDim("tensor dims must be positive, got " + shape_string());
    }
    data_.assign(static_cast<std::size_t>(batch) * channels * length, 0.0);
}

Tensor3::Tensor3(int batch, int channels, int length, std::vector<double> data) : Tensor3(batch, channels, length) {
    if (data.size() != data_.size()) throw ShapeMismatch("data size does not match " + shape_string());
    data_ = std::move(data);
}

std::string Tensor3::shape_string() const {
    return "[" + std::to_string(b_) + "," + std::to_string(c_) + "," + std::to_string(l_) + "]";
}

bool Tensor3::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const Tensor3& a, const Tensor3& b, const char* what) {
    if (!a.same_shape(b)) throw ShapeMismatch(std::string(what) + ": " + a.shape_string() + " vs " + b.shape_string());
}

Tensor3 concat_channels(const Tensor3& a, const Tensor3& b) {
    if (a.batch() != b.batch() || a.length() != b.length()) {
        throw ShapeMismatch("concat_channels: " + a.shape_string() + " vs " + b.shape_string());
    }
    Tensor3 out(a.batch(), a.channels() + b.channels(), a.length());
    const std::size_t na = static_cast<std::size_t>(a.channels()) * a.length();
    const std::size_t nb = static_cast<std::size_t>(b.channels()) * b.length();
    for (int s = 0; s < a.batch(); ++s) {
        double* dst = out.data() + s * (na + nb);
        std::copy_n(a.data() + s * na, na, dst);
        std::copy_n(b.data() + s * nb, nb, dst + na);
    }
    return out;
}

std::pair<Tensor3, Tensor3> split_channels(const Tensor3& x, int first) {
    if (first < 1 || first >= x.channels()) throw ShapeMismatch("split_channels: bad split point");
    Tensor3 a(x.batch(), first, x.length());
    Tensor3 b(x.batch(), x.channels() - first, x.length());
    const std::size_t na = a.size() / x.batch();
    const std::size_t nb = b.size() / x.batch();
    for (int s = 0; s < x.batch(); ++s) {
        const double* src = x.data() + s * (na + nb);
        std::copy_n(src, na, a.data() + s * na);
        std::copy_n(src + na, nb, b.data() + s * nb);
    }
    return {std::move(a), std::move(b)};
}

std::vector<Tensor3> split_length(const Tensor3& x, int parts) {
    if (parts < 1 || x.length() % parts != 0) throw ShapeMismatch("split_length: length not divisible");
    const int len = x.length() / parts;
    std::vector<Tensor3> out;
    for (int p = 0; p < parts; ++p) {
        Tensor3 t(x.batch(), x.channels(), len);
        for (int s = 0; s < x.batch(); ++s) {
            for (int c = 0; c < x.channels(); ++c) {
                std::copy_n(&x(s, c, p * len), len, &t(s, c, 0));
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

Tensor3 concat_length(const std::vector<Tensor3>& parts) {
    if (parts.empty()) throw ShapeMismatch("concat_length: nothing to join");
    const auto& p0 = parts.front();
    for (const auto& p : parts) require_same_shape(p0, p, "concat_length");
    const int len = p0.length();
    Tensor3 out(p0.batch(), p0.channels(), len * static_cast<int>(parts.size()));
    for (std::size_t p = 0; p < parts.size(); ++p) {
        for (int s = 0; s < p0.batch(); ++s) {
            for (int c = 0; c < p0.channels(); ++c) {
                std::copy_n(&parts[p](s, c, 0), len, &out(s, c, static_cast<int>(p) * len));
            }
        }
    }
    return out;
}

}  // namespace dmc::nn
