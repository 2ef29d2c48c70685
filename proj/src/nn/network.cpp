// SPDX-License-Identifier: Apache-2.0

#include "dmc/nn/network.hpp"

#include "dmc/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dmc::nn {

namespace {

struct ConvBnRelu {
    Conv1d conv;
    BatchNorm1d bn;
    Relu relu;

    ConvBnRelu(const std::string& name, int in, int out, int k, int stride, int pad, util::Engine& eng)
        : conv(name + ".conv", in, out, k, stride, pad, eng), bn(name + ".bn", out) {}
    Tensor3 forward(const Tensor3& x, bool train) {
        return relu.forward(bn.forward(conv.forward(x, train), train), train);
    }
    Tensor3 backward(const Tensor3& g) { return conv.backward(bn.backward(relu.backward(g))); }
    void collect(std::vector<Param*>& out) {
        for (auto* p : conv.params()) out.push_back(p);
        for (auto* p : bn.params()) out.push_back(p);
    }
};

struct UpBnRelu {
    ConvTranspose1d up;
    BatchNorm1d bn;
    Relu relu;

    UpBnRelu(const std::string& name, int in, int out, util::Engine& eng)
        : up(name + ".tconv", in, out, 2, 2, eng), bn(name + ".bn", out) {}
    Tensor3 forward(const Tensor3& x, bool train) {
        return relu.forward(bn.forward(up.forward(x, train), train), train);
    }
    Tensor3 backward(const Tensor3& g) { return up.backward(bn.backward(relu.backward(g))); }
    void collect(std::vector<Param*>& out) {
        for (auto* p : up.params()) out.push_back(p);
        for (auto* p : bn.params()) out.push_back(p);
    }
};

struct UpBlock {
    UpBnRelu up;
    ConvBnRelu conv1, conv2;
    int skip_channels;  // 0 when the block takes no skip

    UpBlock(const std::string& name, int in, int out, int skip, util::Engine& eng)
        : up(name + ".up", in, out, eng), conv1(name + ".conv1", out + skip, out, 3, 1, 1, eng),
          conv2(name + ".conv2", out, out, 3, 1, 1, eng), skip_channels(skip) {}
};

struct Decoder {
    std::vector<UpBlock> blocks;
    UpBnRelu out_up;
    ConvBnRelu out_conv;
    Conv1d out_proj;
    int out_channels;

    Decoder(const std::string& name, const NetConfig& c, util::Engine& eng, std::vector<UpBlock> b, int last, int oc)
        : blocks(std::move(b)), out_up(name + ".out.up", last, oc, eng),
          out_conv(name + ".out.conv", oc + c.base_channels, oc, 3, 1, 1, eng),
          out_proj(name + ".out.proj", oc, 1, 1, 1, 0, eng), out_channels(oc) {
        out_proj.bias().value.setConstant(c.output_bias);
    }
};

}  // namespace

void NetConfig::validate() const {
    if (input_length < 4 || base_channels < 1 || encoder_blocks < 0 || num_decoders < 1 || head_channels < 1 ||
        fc1 < 1 || fc2 < 1) {
        throw InvalidParam("net config fields must be positive");
    }
    if (!std::isfinite(output_bias)) throw InvalidParam("output_bias must be finite");
    if (encoder_blocks > 20 || input_length % (1 << (encoder_blocks + 2)) != 0) {
        throw InvalidParam("input_length must be divisible by 2^(encoder_blocks + 2)");
    }
}

nlohmann::json to_json(const NetConfig& c) {
    return {{"input_length", c.input_length}, {"base_channels", c.base_channels},
            {"encoder_blocks", c.encoder_blocks}, {"num_decoders", c.num_decoders},
            {"head_channels", c.head_channels}, {"fc1", c.fc1}, {"fc2", c.fc2},
            {"output_bias", c.output_bias}};
}

NetConfig net_config_from_json(const nlohmann::json& j) {
    NetConfig c;
    if (!j.is_object()) throw InvalidParam("net config must be a JSON object");
    auto opt = [&](const char* key, int& v) {
        if (j.contains(key)) {
            if (!j.at(key).is_number_integer()) throw InvalidParam(std::string("net config '") + key + "' must be an integer");
            v = j.at(key).get<int>();
        }
    };
    opt("input_length", c.input_length);
    opt("base_channels", c.base_channels);
    opt("encoder_blocks", c.encoder_blocks);
    opt("num_decoders", c.num_decoders);
    opt("head_channels", c.head_channels);
    opt("fc1", c.fc1);
    opt("fc2", c.fc2);
    if (j.contains("output_bias")) {
        if (!j.at("output_bias").is_number()) throw InvalidParam("net config 'output_bias' must be a number");
        c.output_bias = j.at("output_bias").get<double>();
    }
    c.validate();
    return c;
}

struct Network::Impl {
    std::unique_ptr<ConvBnRelu> stem1, stem2;
    std::vector<ConvBnRelu> enc;
    std::unique_ptr<LengthProjection> split;
    std::unique_ptr<BatchNorm1d> split_bn;
    Relu split_relu;
    std::vector<Decoder> dec;
    std::unique_ptr<ConvBnRelu> head_conv;
    std::unique_ptr<Linear> fc1, fc2, fc3;
    Relu fc1_relu, fc2_relu;

    // forward cache
    std::vector<Tensor3> features;  // stem1, stem2, enc outputs
    int batch = 0;
};

Network::Network(const NetConfig& cfg, std::uint64_t seed) : cfg_(cfg), impl_(std::make_unique<Impl>()) {
    cfg_.validate();
    util::Engine eng(util::derive_seed(seed, {0x6e6574ULL}));
    auto& m = *impl_;
    const int c0 = cfg_.base_channels;
    m.stem1 = std::make_unique<ConvBnRelu>("stem.0", 1, c0, 3, 1, 1, eng);
    m.stem2 = std::make_unique<ConvBnRelu>("stem.1", c0, c0, 3, 2, 1, eng);
    m.enc.reserve(static_cast<std::size_t>(cfg_.encoder_blocks));
    for (int i = 0; i < cfg_.encoder_blocks; ++i) {
        m.enc.emplace_back("enc." + std::to_string(i), c0 << i, c0 << (i + 1), 3, 2, 1, eng);
    }
    const int cl = cfg_.latent_channels();
    m.split = std::make_unique<LengthProjection>("split.proj", cfg_.latent_length(),
                                                 cfg_.split_length() * cfg_.num_decoders, eng);
    m.split_bn = std::make_unique<BatchNorm1d>("split.bn", cl);

    const int eb = cfg_.encoder_blocks;
    for (int d = 0; d < cfg_.num_decoders; ++d) {
        const std::string dn = "dec." + std::to_string(d);
        std::vector<UpBlock> blocks;
        blocks.reserve(static_cast<std::size_t>(eb + 1));
        int in = cl;
        for (int b = 0; b <= eb; ++b) {
            const int out = std::max(1, cl >> (b + 1));
            const int skip = b == 0 ? 0 : (c0 << (eb - b));
            blocks.emplace_back(dn + ".block." + std::to_string(b), in, out, skip, eng);
            in = out;
        }
        m.dec.emplace_back(dn, cfg_, eng, std::move(blocks), in, std::max(1, c0 / 2));
    }
    m.head_conv = std::make_unique<ConvBnRelu>("head.conv", cl, cfg_.head_channels, 3, 1, 1, eng);
    m.fc1 = std::make_unique<Linear>("head.fc1", cfg_.head_channels * cfg_.latent_length(), cfg_.fc1, eng);
    m.fc2 = std::make_unique<Linear>("head.fc2", cfg_.fc1, cfg_.fc2, eng);
    m.fc3 = std::make_unique<Linear>("head.fc3", cfg_.fc2, cfg_.num_classes(), eng);
}

Network::~Network() = default;

NetOutput Network::forward(const Tensor3& input, bool train) {
    if (input.channels() != 1 || input.length() != cfg_.input_length) {
        throw ShapeMismatch("network input must be [B,1," + std::to_string(cfg_.input_length) + "], got " +
                            input.shape_string());
    }
    auto& m = *impl_;
    m.batch = input.batch();
    m.features.clear();
    m.features.push_back(m.stem1->forward(input, train));
    m.features.push_back(m.stem2->forward(m.features.back(), train));
    for (auto& e : m.enc) m.features.push_back(e.forward(m.features.back(), train));
    const Tensor3& latent = m.features.back();

    const Tensor3 split = m.split_relu.forward(m.split_bn->forward(m.split->forward(latent, train), train), train);
    const auto parts = split_length(split, cfg_.num_decoders);

    const int eb = cfg_.encoder_blocks;
    std::vector<Tensor3> outs;
    for (int d = 0; d < cfg_.num_decoders; ++d) {
        auto& dec = m.dec[static_cast<std::size_t>(d)];
        Tensor3 h = parts[static_cast<std::size_t>(d)];
        for (int b = 0; b <= eb; ++b) {
            auto& blk = dec.blocks[static_cast<std::size_t>(b)];
            h = blk.up.forward(h, train);
            // features[1] is the stem output at half length, features[1 + i] encoder block i
            if (blk.skip_channels > 0) h = concat_channels(h, m.features[static_cast<std::size_t>(1 + eb - b)]);
            h = blk.conv2.forward(blk.conv1.forward(h, train), train);
        }
        h = dec.out_up.forward(h, train);
        h = concat_channels(h, m.features[0]);
        h = dec.out_proj.forward(dec.out_conv.forward(h, train), train);
        outs.push_back(std::move(h));
    }
    Tensor3 modes(m.batch, cfg_.num_decoders, cfg_.input_length);
    for (int b = 0; b < m.batch; ++b) {
        for (int d = 0; d < cfg_.num_decoders; ++d) {
            std::copy_n(&outs[static_cast<std::size_t>(d)](b, 0, 0), cfg_.input_length, &modes(b, d, 0));
        }
    }

    Tensor3 h = flatten(m.head_conv->forward(latent, train));
    h = m.fc1_relu.forward(m.fc1->forward(h, train), train);
    h = m.fc2_relu.forward(m.fc2->forward(h, train), train);
    return {std::move(modes), m.fc3->forward(h, train)};
}

void Network::backward(const Tensor3& grad_modes, const Tensor3& grad_logits) {
    auto& m = *impl_;
    if (m.features.empty()) throw InvalidParam("backward called before forward");
    if (grad_modes.batch() != m.batch || grad_modes.channels() != cfg_.num_decoders ||
        grad_modes.length() != cfg_.input_length) {
        throw ShapeMismatch("mode gradient has shape " + grad_modes.shape_string());
    }
    if (grad_logits.batch() != m.batch || grad_logits.channels() != cfg_.num_classes() || grad_logits.length() != 1) {
        throw ShapeMismatch("logit gradient has shape " + grad_logits.shape_string());
    }

    std::vector<Tensor3> fgrad;
    for (const auto& f : m.features) fgrad.emplace_back(f.batch(), f.channels(), f.length());
    auto add_into = [](Tensor3& acc, const Tensor3& g) {
        require_same_shape(acc, g, "gradient accumulation");
        for (std::size_t i = 0; i < acc.size(); ++i) acc.values()[i] += g.values()[i];
    };

    // order head
    {
        Tensor3 g = m.fc3->backward(grad_logits);
        g = m.fc2->backward(m.fc2_relu.backward(g));
        g = m.fc1->backward(m.fc1_relu.backward(g));
        add_into(fgrad.back(), m.head_conv->backward(unflatten(g, cfg_.head_channels, cfg_.latent_length())));
    }

    const int eb = cfg_.encoder_blocks;
    const int sl = cfg_.split_length();
    std::vector<Tensor3> part_grads;
    bool any_decoder = false;
    for (int d = 0; d < cfg_.num_decoders; ++d) {
        Tensor3 g(m.batch, 1, cfg_.input_length);
        bool nonzero = false;
        for (int b = 0; b < m.batch; ++b) {
            for (int l = 0; l < cfg_.input_length; ++l) {
                g(b, 0, l) = grad_modes(b, d, l);
                nonzero = nonzero || g(b, 0, l) != 0.0;
            }
        }
        if (!nonzero) {
            part_grads.emplace_back(m.batch, cfg_.latent_channels(), sl);
            continue;
        }
        any_decoder = true;
        auto& dec = m.dec[static_cast<std::size_t>(d)];
        g = dec.out_conv.backward(dec.out_proj.backward(g));
        auto [gu, gs] = split_channels(g, dec.out_channels);
        add_into(fgrad[0], gs);
        g = dec.out_up.backward(gu);
        for (int b = eb; b >= 0; --b) {
            auto& blk = dec.blocks[static_cast<std::size_t>(b)];
            g = blk.conv1.backward(blk.conv2.backward(g));
            if (blk.skip_channels > 0) {
                const int main_ch = g.channels() - blk.skip_channels;
                auto [gm, gskip] = split_channels(g, main_ch);
                add_into(fgrad[static_cast<std::size_t>(1 + eb - b)], gskip);
                g = std::move(gm);
            }
            g = blk.up.backward(g);
        }
        part_grads.push_back(std::move(g));
    }
    if (any_decoder) {
        Tensor3 g = concat_length(part_grads);
        g = m.split->backward(m.split_bn->backward(m.split_relu.backward(g)));
        add_into(fgrad.back(), g);
    }

    for (int i = eb - 1; i >= 0; --i) {
        add_into(fgrad[static_cast<std::size_t>(i + 1)], m.enc[static_cast<std::size_t>(i)].backward(fgrad[static_cast<std::size_t>(i + 2)]));
    }
    add_into(fgrad[0], m.stem2->backward(fgrad[1]));
    m.stem1->backward(fgrad[0]);
}

std::vector<Param*> Network::params() {
    auto& m = *impl_;
    std::vector<Param*> out;
    m.stem1->collect(out);
    m.stem2->collect(out);
    for (auto& e : m.enc) e.collect(out);
    for (auto* p : m.split->params()) out.push_back(p);
    for (auto* p : m.split_bn->params()) out.push_back(p);
    for (auto& d : m.dec) {
        for (auto& b : d.blocks) {
            b.up.collect(out);
            b.conv1.collect(out);
            b.conv2.collect(out);
        }
        d.out_up.collect(out);
        d.out_conv.collect(out);
        for (auto* p : d.out_proj.params()) out.push_back(p);
    }
    m.head_conv->collect(out);
    for (auto* l : {m.fc1.get(), m.fc2.get(), m.fc3.get()}) {
        for (auto* p : l->params()) out.push_back(p);
    }
    return out;
}

void Network::zero_grad() {
    for (auto* p : params()) p->grad.setZero();
}

std::size_t Network::parameter_count() {
    std::size_t n = 0;
    for (auto* p : params()) {
        if (p->trainable) n += static_cast<std::size_t>(p->size());
    }
    return n;
}

}  // namespace dmc::nn
