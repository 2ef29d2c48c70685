// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace dmc::nn {

/// Dense real tensor [batch, channels, length], row-major.
class Tensor3 {
public:
    Tensor3() = default;
    /// Zero-filled. Throws InvalidDim unless every dim is positive.
    Tensor3(int batch, int channels, int length);
    Tensor3(int batch, int channels, int length, std::vector<double> data);

    int batch() const { return b_; }
    int channels() const { return c_; }
    int length() const { return l_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(int b, int c, int l) { return data_[index(b, c, l)]; }
    const double& operator()(int b, int c, int l) const { return data_[index(b, c, l)]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    /// [channels, length] block of one sample as a row-major matrix view.
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<RowMat> sample(int b) { return {data_.data() + b * c_ * l_, c_, l_}; }
    Eigen::Map<const RowMat> sample(int b) const { return {data_.data() + b * c_ * l_, c_, l_}; }

    bool same_shape(const Tensor3& o) const { return b_ == o.b_ && c_ == o.c_ && l_ == o.l_; }
    std::string shape_string() const;
    bool all_finite() const;

    bool operator==(const Tensor3& o) const = default;

private:
    std::size_t index(int b, int c, int l) const {
        return (static_cast<std::size_t>(b) * c_ + c) * l_ + l;
    }
    int b_ = 0, c_ = 0, l_ = 0;
    std::vector<double> data_;
};

/// Throws ShapeMismatch with `what` in the message.
void require_same_shape(const Tensor3& a, const Tensor3& b, const char* what);

/// Concatenates along channels. Batch and length must agree.
Tensor3 concat_channels(const Tensor3& a, const Tensor3& b);
/// Inverse of concat_channels: the first `first` channels and the rest.
std::pair<Tensor3, Tensor3> split_channels(const Tensor3& x, int first);
/// Splits the length axis into `parts` equal chunks.
std::vector<Tensor3> split_length(const Tensor3& x, int parts);
Tensor3 concat_length(const std::vector<Tensor3>& parts);

}  // namespace dmc::nn
