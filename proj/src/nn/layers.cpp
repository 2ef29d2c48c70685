// SPDX-License-Identifier: Apache-2.0

#include "dmc/nn/layers.hpp"

#include "dmc/errors.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace dmc::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void he_normal(Param& p, int fan_in, util::Engine& eng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (Eigen::Index i = 0; i < p.size(); ++i) p.value(i) = dist(eng);
}

void require_channels(const Tensor3& x, int ch, const char* who) {
    if (x.channels() != ch) {
        throw ShapeMismatch(std::string(who) + ": expected " + std::to_string(ch) + " channels, got " +
                            x.shape_string());
    }
}

int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

}  // namespace

Param::Param(std::string n, std::vector<int> s, bool train) : name(std::move(n)), shape(std::move(s)), trainable(train) {
    const auto count = std::accumulate(shape.begin(), shape.end(), Eigen::Index{1},
                                       [](Eigen::Index a, int b) { return a * b; });
    value = Eigen::VectorXd::Zero(count);
    grad = Eigen::VectorXd::Zero(count);
}

// ---- Conv1d ----

Conv1d::Conv1d(const std::string& name, int in_ch, int out_ch, int kernel, int stride, int pad, util::Engine& eng)
    : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride), pad_(pad),
      weight_(name + ".weight", {out_ch, in_ch, kernel}), bias_(name + ".bias", {out_ch}) {
    if (in_ch < 1 || out_ch < 1 || kernel < 1 || stride < 1 || pad < 0) throw InvalidDim("bad conv1d geometry");
    he_normal(weight_, in_ch * kernel, eng);
}

int Conv1d::out_length(int in_length) const { return (in_length + 2 * pad_ - k_) / stride_ + 1; }

Tensor3 Conv1d::forward(const Tensor3& x, bool) {
    require_channels(x, in_ch_, "conv1d");
    batch_ = x.batch();
    in_len_ = x.length();
    if (in_len_ + 2 * pad_ < k_) throw ShapeMismatch("conv1d: input shorter than kernel");
    const int lo = out_length(in_len_);
    const Eigen::Index cols = static_cast<Eigen::Index>(batch_) * lo;

    col_.resize(static_cast<Eigen::Index>(in_ch_) * k_, cols);
    for (int b = 0; b < batch_; ++b) {
        for (int o = 0; o < lo; ++o) {
            const Eigen::Index j = static_cast<Eigen::Index>(b) * lo + o;
            for (int c = 0; c < in_ch_; ++c) {
                for (int t = 0; t < k_; ++t) col_(c * k_ + t, j) = x(b, c, wrap(o * stride_ + t - pad_, in_len_));
            }
        }
    }
    Eigen::Map<const RowMat> w(weight_.value.data(), out_ch_, in_ch_ * k_);
    Eigen::MatrixXd y = w * col_;
    y.colwise() += bias_.value;

    Tensor3 out(batch_, out_ch_, lo);
    for (int b = 0; b < batch_; ++b) out.sample(b) = y.middleCols(static_cast<Eigen::Index>(b) * lo, lo);
    return out;
}

Tensor3 Conv1d::backward(const Tensor3& g) {
    const int lo = out_length(in_len_);
    if (g.batch() != batch_ || g.channels() != out_ch_ || g.length() != lo) {
        throw ShapeMismatch("conv1d backward: unexpected gradient " + g.shape_string());
    }
    Eigen::MatrixXd gm(out_ch_, static_cast<Eigen::Index>(batch_) * lo);
    for (int b = 0; b < batch_; ++b) gm.middleCols(static_cast<Eigen::Index>(b) * lo, lo) = g.sample(b);

    Eigen::Map<RowMat> dw(weight_.grad.data(), out_ch_, in_ch_ * k_);
    dw.noalias() += gm * col_.transpose();
    bias_.grad += gm.rowwise().sum();

    Eigen::Map<const RowMat> w(weight_.value.data(), out_ch_, in_ch_ * k_);
    const Eigen::MatrixXd dcol = w.transpose() * gm;
    Tensor3 dx(batch_, in_ch_, in_len_);
    for (int b = 0; b < batch_; ++b) {
        for (int o = 0; o < lo; ++o) {
            const Eigen::Index j = static_cast<Eigen::Index>(b) * lo + o;
            for (int c = 0; c < in_ch_; ++c) {
                for (int t = 0; t < k_; ++t) dx(b, c, wrap(o * stride_ + t - pad_, in_len_)) += dcol(c * k_ + t, j);
            }
        }
    }
    return dx;
}

// ---- ConvTranspose1d ----

ConvTranspose1d::ConvTranspose1d(const std::string& name, int in_ch, int out_ch, int kernel, int stride,
                                 util::Engine& eng)
    : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride), weight_(name + ".weight", {in_ch, out_ch, kernel}),
      bias_(name + ".bias", {out_ch}) {
    if (in_ch < 1 || out_ch < 1 || kernel < 1 || stride < 1) throw InvalidDim("bad tconv1d geometry");
    he_normal(weight_, in_ch, eng);
}

Tensor3 ConvTranspose1d::forward(const Tensor3& x, bool) {
    require_channels(x, in_ch_, "tconv1d");
    batch_ = x.batch();
    in_len_ = x.length();
    const int lo = (in_len_ - 1) * stride_ + k_;
    x_.resize(in_ch_, static_cast<Eigen::Index>(batch_) * in_len_);
    for (int b = 0; b < batch_; ++b) x_.middleCols(static_cast<Eigen::Index>(b) * in_len_, in_len_) = x.sample(b);

    Eigen::Map<const RowMat> w(weight_.value.data(), in_ch_, out_ch_ * k_);
    const Eigen::MatrixXd yc = w.transpose() * x_;  // [out*k, B*L]
    Tensor3 out(batch_, out_ch_, lo);
    for (int b = 0; b < batch_; ++b) {
        for (int co = 0; co < out_ch_; ++co) {
            for (int i = 0; i < in_len_; ++i) {
                const Eigen::Index j = static_cast<Eigen::Index>(b) * in_len_ + i;
                for (int t = 0; t < k_; ++t) out(b, co, i * stride_ + t) += yc(co * k_ + t, j);
            }
            for (int l = 0; l < lo; ++l) out(b, co, l) += bias_.value(co);
        }
    }
    return out;
}

Tensor3 ConvTranspose1d::backward(const Tensor3& g) {
    const int lo = (in_len_ - 1) * stride_ + k_;
    if (g.batch() != batch_ || g.channels() != out_ch_ || g.length() != lo) {
        throw ShapeMismatch("tconv1d backward: unexpected gradient " + g.shape_string());
    }
    Eigen::MatrixXd gc(static_cast<Eigen::Index>(out_ch_) * k_, static_cast<Eigen::Index>(batch_) * in_len_);
    for (int b = 0; b < batch_; ++b) {
        for (int co = 0; co < out_ch_; ++co) {
            double s = 0.0;
            for (int l = 0; l < lo; ++l) s += g(b, co, l);
            bias_.grad(co) += s;
            for (int i = 0; i < in_len_; ++i) {
                const Eigen::Index j = static_cast<Eigen::Index>(b) * in_len_ + i;
                for (int t = 0; t < k_; ++t) gc(co * k_ + t, j) = g(b, co, i * stride_ + t);
            }
        }
    }
    Eigen::Map<RowMat> dw(weight_.grad.data(), in_ch_, out_ch_ * k_);
    dw.noalias() += x_ * gc.transpose();
    Eigen::Map<const RowMat> w(weight_.value.data(), in_ch_, out_ch_ * k_);
    const Eigen::MatrixXd dxm = w * gc;
    Tensor3 dx(batch_, in_ch_, in_len_);
    for (int b = 0; b < batch_; ++b) dx.sample(b) = dxm.middleCols(static_cast<Eigen::Index>(b) * in_len_, in_len_);
    return dx;
}

// ---- BatchNorm1d ----

BatchNorm1d::BatchNorm1d(const std::string& name, int channels, double momentum, double eps)
    : channels_(channels), momentum_(momentum), eps_(eps), gamma_(name + ".gamma", {channels}),
      beta_(name + ".beta", {channels}), running_mean_(name + ".running_mean", {channels}, false),
      running_var_(name + ".running_var", {channels}, false) {
    if (channels < 1) throw InvalidDim("batchnorm needs channels");
    gamma_.value.setOnes();
    running_var_.value.setOnes();
}

Tensor3 BatchNorm1d::forward(const Tensor3& x, bool train) {
    require_channels(x, channels_, "batchnorm");
    const int nb = x.batch();
    const int nl = x.length();
    const double count = static_cast<double>(nb) * nl;
    trained_pass_ = train;
    xhat_ = Tensor3(nb, channels_, nl);
    inv_std_.resize(channels_);
    Tensor3 out(nb, channels_, nl);
    for (int c = 0; c < channels_; ++c) {
        double mean = 0.0, var = 0.0;
        if (train) {
            for (int b = 0; b < nb; ++b) {
                for (int l = 0; l < nl; ++l) mean += x(b, c, l);
            }
            mean /= count;
            for (int b = 0; b < nb; ++b) {
                for (int l = 0; l < nl; ++l) var += (x(b, c, l) - mean) * (x(b, c, l) - mean);
            }
            var /= count;
            const double unbiased = count > 1.0 ? var * count / (count - 1.0) : var;
            running_mean_.value(c) = (1.0 - momentum_) * running_mean_.value(c) + momentum_ * mean;
            running_var_.value(c) = (1.0 - momentum_) * running_var_.value(c) + momentum_ * unbiased;
        } else {
            mean = running_mean_.value(c);
            var = running_var_.value(c);
        }
        const double is = 1.0 / std::sqrt(var + eps_);
        inv_std_(c) = is;
        for (int b = 0; b < nb; ++b) {
            for (int l = 0; l < nl; ++l) {
                const double h = (x(b, c, l) - mean) * is;
                xhat_(b, c, l) = h;
                out(b, c, l) = gamma_.value(c) * h + beta_.value(c);
            }
        }
    }
    return out;
}

Tensor3 BatchNorm1d::backward(const Tensor3& g) {
    require_same_shape(g, xhat_, "batchnorm backward");
    const int nb = g.batch();
    const int nl = g.length();
    const double count = static_cast<double>(nb) * nl;
    Tensor3 dx(nb, channels_, nl);
    for (int c = 0; c < channels_; ++c) {
        double sg = 0.0, sgh = 0.0;
        for (int b = 0; b < nb; ++b) {
            for (int l = 0; l < nl; ++l) {
                sg += g(b, c, l);
                sgh += g(b, c, l) * xhat_(b, c, l);
            }
        }
        gamma_.grad(c) += sgh;
        beta_.grad(c) += sg;
        const double scale = gamma_.value(c) * inv_std_(c);
        for (int b = 0; b < nb; ++b) {
            for (int l = 0; l < nl; ++l) {
                dx(b, c, l) = trained_pass_ ? scale * (g(b, c, l) - sg / count - xhat_(b, c, l) * sgh / count)
                                            : scale * g(b, c, l);
            }
        }
    }
    return dx;
}

// ---- Relu ----

Tensor3 Relu::forward(const Tensor3& x, bool) {
    out_ = x;
    for (auto& v : out_.values()) v = v > 0.0 ? v : 0.0;
    return out_;
}

Tensor3 Relu::backward(const Tensor3& g) {
    require_same_shape(g, out_, "relu backward");
    Tensor3 dx = g;
    for (std::size_t i = 0; i < dx.size(); ++i) {
        if (!(out_.values()[i] > 0.0)) dx.values()[i] = 0.0;
    }
    return dx;
}

// ---- Linear ----

Linear::Linear(const std::string& name, int in, int out, util::Engine& eng)
    : in_(in), out_(out), weight_(name + ".weight", {out, in}), bias_(name + ".bias", {out}) {
    if (in < 1 || out < 1) throw InvalidDim("bad linear geometry");
    he_normal(weight_, in, eng);
}

Tensor3 Linear::forward(const Tensor3& x, bool) {
    if (x.channels() != in_ || x.length() != 1) throw ShapeMismatch("linear: unexpected input " + x.shape_string());
    x_ = Eigen::Map<const RowMat>(x.data(), x.batch(), in_).transpose();
    Eigen::Map<const RowMat> w(weight_.value.data(), out_, in_);
    Eigen::MatrixXd y = w * x_;
    y.colwise() += bias_.value;
    Tensor3 out(x.batch(), out_, 1);
    Eigen::Map<RowMat>(out.data(), x.batch(), out_) = y.transpose();
    return out;
}

Tensor3 Linear::backward(const Tensor3& g) {
    if (g.channels() != out_ || g.length() != 1 || g.batch() != x_.cols()) {
        throw ShapeMismatch("linear backward: unexpected gradient " + g.shape_string());
    }
    const Eigen::MatrixXd gm = Eigen::Map<const RowMat>(g.data(), g.batch(), out_).transpose();
    Eigen::Map<RowMat> dw(weight_.grad.data(), out_, in_);
    dw.noalias() += gm * x_.transpose();
    bias_.grad += gm.rowwise().sum();
    Eigen::Map<const RowMat> w(weight_.value.data(), out_, in_);
    Tensor3 dx(g.batch(), in_, 1);
    Eigen::Map<RowMat>(dx.data(), g.batch(), in_) = (w.transpose() * gm).transpose();
    return dx;
}

// ---- LengthProjection ----

LengthProjection::LengthProjection(const std::string& name, int in_len, int out_len, util::Engine& eng)
    : in_len_(in_len), out_len_(out_len), weight_(name + ".weight", {out_len, in_len}), bias_(name + ".bias", {out_len}) {
    if (in_len < 1 || out_len < 1) throw InvalidDim("bad length projection");
    he_normal(weight_, in_len, eng);
}

Tensor3 LengthProjection::forward(const Tensor3& x, bool) {
    if (x.length() != in_len_) throw ShapeMismatch("length projection: unexpected input " + x.shape_string());
    x_ = x;
    const Eigen::Index rows = static_cast<Eigen::Index>(x.batch()) * x.channels();
    Eigen::Map<const RowMat> xm(x.data(), rows, in_len_);
    Eigen::Map<const RowMat> p(weight_.value.data(), out_len_, in_len_);
    Tensor3 out(x.batch(), x.channels(), out_len_);
    Eigen::Map<RowMat> y(out.data(), rows, out_len_);
    y.noalias() = xm * p.transpose();
    y.rowwise() += bias_.value.transpose();
    return out;
}

Tensor3 LengthProjection::backward(const Tensor3& g) {
    if (g.batch() != x_.batch() || g.channels() != x_.channels() || g.length() != out_len_) {
        throw ShapeMismatch("length projection backward: unexpected gradient " + g.shape_string());
    }
    const Eigen::Index rows = static_cast<Eigen::Index>(g.batch()) * g.channels();
    Eigen::Map<const RowMat> gm(g.data(), rows, out_len_);
    Eigen::Map<const RowMat> xm(x_.data(), rows, in_len_);
    Eigen::Map<RowMat> dp(weight_.grad.data(), out_len_, in_len_);
    dp.noalias() += gm.transpose() * xm;
    bias_.grad += gm.colwise().sum().transpose();
    Eigen::Map<const RowMat> p(weight_.value.data(), out_len_, in_len_);
    Tensor3 dx(g.batch(), g.channels(), in_len_);
    Eigen::Map<RowMat>(dx.data(), rows, in_len_).noalias() = gm * p;
    return dx;
}

Tensor3 flatten(const Tensor3& x) { return Tensor3(x.batch(), x.channels() * x.length(), 1, x.values()); }

Tensor3 unflatten(const Tensor3& x, int channels, int length) {
    if (x.length() != 1 || x.channels() != channels * length) throw ShapeMismatch("unflatten: size mismatch");
    return Tensor3(x.batch(), channels, length, x.values());
}

}  // namespace dmc::nn
