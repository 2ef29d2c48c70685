// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmc/core/pdp.hpp"
#include "dmc/core/sampling.hpp"
#include "dmc/errors.hpp"
#include "dmc/io/tensor_file.hpp"
#include "dmc/nn/adam.hpp"
#include "dmc/nn/checkpoint.hpp"
#include "dmc/nn/dataset.hpp"
#include "dmc/nn/layers.hpp"
#include "dmc/nn/loss.hpp"
#include "dmc/nn/network.hpp"
#include "dmc/nn/predict.hpp"
#include "dmc/nn/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>

using namespace dmc;
using namespace dmc::nn;
namespace fs = std::filesystem;

namespace {

Tensor3 random_tensor(util::Engine& eng, int b, int c, int l) {
    std::normal_distribution<double> n(0.0, 1.0);
    Tensor3 t(b, c, l);
    for (auto& v : t.values()) v = n(eng);
    return t;
}

double dot(const Tensor3& a, const Tensor3& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
    return s;
}

// Checks input and parameter gradients of L = <c, layer(x)> against central
// differences.
void check_layer_gradients(Layer& layer, Tensor3 x, double tol = 1e-6) {
    util::Engine eng(99);
    const auto y0 = layer.forward(x, true);
    const auto c = random_tensor(eng, y0.batch(), y0.channels(), y0.length());
    for (auto* p : layer.params()) p->grad.setZero();
    layer.forward(x, true);
    const auto gx = layer.backward(c);
    REQUIRE(gx.same_shape(x));

    auto loss = [&] { return dot(c, layer.forward(x, true)); };
    const double h = 1e-6;
    for (std::size_t i = 0; i < x.size(); i += 1 + x.size() / 23) {
        const double keep = x.values()[i];
        x.values()[i] = keep + h;
        const double lp = loss();
        x.values()[i] = keep - h;
        const double lm = loss();
        x.values()[i] = keep;
        const double fd = (lp - lm) / (2 * h);
        CHECK(std::abs(fd - gx.values()[i]) <= tol * std::max(1.0, std::abs(fd)));
    }
    for (auto* p : layer.params()) {
        if (!p->trainable) continue;
        for (Eigen::Index i = 0; i < p->size(); i += 1 + p->size() / 17) {
            const double keep = p->value(i);
            p->value(i) = keep + h;
            const double lp = loss();
            p->value(i) = keep - h;
            const double lm = loss();
            p->value(i) = keep;
            const double fd = (lp - lm) / (2 * h);
            INFO(p->name << "[" << i << "]");
            CHECK(std::abs(fd - p->grad(i)) <= tol * std::max(1.0, std::abs(fd)));
        }
    }
}

NetConfig tiny_config() {
    NetConfig c;
    c.input_length = 16;
    c.base_channels = 2;
    c.encoder_blocks = 1;
    c.num_decoders = 2;
    c.head_channels = 2;
    c.fc1 = 5;
    c.fc2 = 4;
    c.output_bias = -1.0;
    return c;
}

GenConfig tiny_gen(int n_f = 16, int max_order = 2) {
    GenConfig g;
    g.n_f = n_f;
    g.max_order = max_order;
    g.m_min = 4;
    g.m_max = 8;
    return g;
}

fs::path scratch_dir(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("dmc_test_nn_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("tensor splits and concatenations round trip") {
    util::Engine eng(1);
    const auto a = random_tensor(eng, 2, 3, 8);
    const auto b = random_tensor(eng, 2, 1, 8);
    const auto ab = concat_channels(a, b);
    CHECK(ab.channels() == 4);
    const auto [a2, b2] = split_channels(ab, 3);
    CHECK(a2 == a);
    CHECK(b2 == b);
    const auto parts = split_length(a, 4);
    CHECK(parts.size() == 4u);
    CHECK(parts[1](1, 2, 0) == a(1, 2, 2));
    CHECK(concat_length(parts) == a);
    CHECK_THROWS_AS(split_length(a, 3), ShapeMismatch);
    CHECK_THROWS_AS(concat_channels(a, random_tensor(eng, 1, 3, 8)), ShapeMismatch);
    CHECK_THROWS_AS(Tensor3(0, 1, 1), InvalidDim);
    CHECK(unflatten(flatten(a), 3, 8) == a);
}

TEST_CASE("convolution gradients") {
    util::Engine eng(2);
    Conv1d s1("c", 3, 4, 3, 1, 1, eng);
    check_layer_gradients(s1, random_tensor(eng, 2, 3, 10));
    Conv1d s2("c", 2, 3, 3, 2, 1, eng);
    check_layer_gradients(s2, random_tensor(eng, 2, 2, 12));
    CHECK(s2.out_length(12) == 6);
    Conv1d k1("c", 4, 1, 1, 1, 0, eng);
    check_layer_gradients(k1, random_tensor(eng, 3, 4, 5));
}

TEST_CASE("circular padding wraps around") {
    util::Engine eng(3);
    Conv1d conv("c", 1, 1, 3, 1, 1, eng);
    conv.weight().value << 1.0, 0.0, 0.0;  // picks x[i - 1]
    conv.bias().value.setZero();
    Tensor3 x(1, 1, 4, {1, 2, 3, 4});
    const auto y = conv.forward(x, false);
    CHECK(y(0, 0, 0) == 4.0);
    CHECK(y(0, 0, 1) == 1.0);
    CHECK(y(0, 0, 3) == 3.0);
}

TEST_CASE("transposed convolution gradients and length") {
    util::Engine eng(4);
    ConvTranspose1d t("t", 3, 2, 2, 2, eng);
    const auto x = random_tensor(eng, 2, 3, 5);
    CHECK(t.forward(x, true).length() == 10);
    check_layer_gradients(t, x);
}

TEST_CASE("batch norm gradients in training mode and running statistics") {
    util::Engine eng(5);
    BatchNorm1d bn("bn", 3);
    check_layer_gradients(bn, random_tensor(eng, 4, 3, 6), 1e-5);

    BatchNorm1d fresh("bn", 1);
    Tensor3 x(2, 1, 2, {1, 2, 3, 4});
    const auto y = fresh.forward(x, true);
    double mean = 0.0, sq = 0.0;
    for (double v : y.values()) {
        mean += v / 4;
        sq += v * v / 4;
    }
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sq == doctest::Approx(1.25 / (1.25 + 1e-5)).epsilon(1e-12));
    const auto params = fresh.params();
    CHECK(params[2]->value(0) == doctest::Approx(0.1 * 2.5));                      // running mean
    CHECK(params[3]->value(0) == doctest::Approx(0.9 + 0.1 * (5.0 / 3.0)));        // unbiased running var
    CHECK_FALSE(params[2]->trainable);
}

TEST_CASE("linear, length projection and relu gradients") {
    util::Engine eng(6);
    Linear lin("l", 6, 4, eng);
    check_layer_gradients(lin, random_tensor(eng, 3, 6, 1));
    LengthProjection lp("p", 8, 6, eng);
    check_layer_gradients(lp, random_tensor(eng, 2, 3, 8));
    Relu relu;
    auto x = random_tensor(eng, 2, 2, 9);
    for (auto& v : x.values()) v += (v > 0 ? 0.1 : -0.1);  // keep away from the kink
    check_layer_gradients(relu, x);
}

TEST_CASE("default network produces the documented shapes") {
    NetConfig cfg;
    Network net(cfg, 1);
    util::Engine eng(7);
    const auto out = net.forward(random_tensor(eng, 2, 1, 512), false);
    CHECK(out.modes.batch() == 2);
    CHECK(out.modes.channels() == 3);
    CHECK(out.modes.length() == 512);
    CHECK(out.logits.channels() == 4);
    CHECK(out.logits.length() == 1);
    CHECK(out.modes.all_finite());
}

TEST_CASE("network configuration validation and JSON") {
    NetConfig c = tiny_config();
    CHECK(net_config_from_json(to_json(c)) == c);
    c.input_length = 20;
    CHECK_THROWS_AS(c.validate(), InvalidParam);
    CHECK_THROWS_AS(net_config_from_json({{"base_channels", "eight"}}), InvalidParam);
    CHECK_THROWS_AS(Network(c, 0), InvalidParam);
}

TEST_CASE("network parameters have unique names and seed-determined values") {
    Network a(tiny_config(), 5), b(tiny_config(), 5), c(tiny_config(), 6);
    std::set<std::string> names;
    bool differs = false;
    const auto pa = a.params(), pb = b.params(), pc = c.params();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(names.insert(pa[i]->name).second);
        CHECK(pa[i]->value == pb[i]->value);
        differs = differs || pa[i]->value != pc[i]->value;
    }
    CHECK(differs);
    CHECK(a.parameter_count() > 0u);
}

TEST_CASE("end-to-end loss gradient matches finite differences") {
    const auto cfg = tiny_config();
    Network net(cfg, 11);
    util::Engine eng(12);
    const auto x = random_tensor(eng, 3, 1, cfg.input_length);
    const auto labels = random_tensor(eng, 3, cfg.num_decoders, cfg.input_length);
    const std::vector<int> orders = {0, 2, 1};

    // Make every decoder active so all parameters are exercised.
    auto total_loss = [&](bool with_backward) {
        auto out = net.forward(x, true);
        auto& lg = out.logits;
        for (int b = 0; b < 3; ++b) lg(b, cfg.num_decoders, 0) += 50.0;
        auto r = composite_loss(out.modes, lg, labels, orders, {1.0, 0.01});
        if (with_backward) net.backward(r.grad_modes, r.grad_logits);
        return r.total;
    };
    net.zero_grad();
    total_loss(true);

    const double h = 1e-6;
    int checked = 0;
    for (auto* p : net.params()) {
        if (!p->trainable) continue;
        for (Eigen::Index i = 0; i < p->size(); i += 1 + p->size() / 3) {
            const double keep = p->value(i);
            p->value(i) = keep + h;
            const double lp = total_loss(false);
            p->value(i) = keep - h;
            const double lm = total_loss(false);
            p->value(i) = keep;
            const double fd = (lp - lm) / (2 * h);
            INFO(p->name << "[" << i << "] fd=" << fd << " analytic=" << p->grad(i));
            CHECK(std::abs(fd - p->grad(i)) <= 1e-4 * std::max(1.0, std::abs(fd)));
            ++checked;
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("loss matches a hand-computed value") {
    Tensor3 pred(1, 2, 2, {1, 2, 5, 5});
    Tensor3 labels(1, 2, 2, {0, 0, 9, 9});
    Tensor3 logits(1, 3, 1, {0, 1, 0});
    const auto r = composite_loss(pred, logits, labels, {2});
    const double z = 2.0 + std::numbers::e;
    CHECK(r.predicted == std::vector<int>{1});
    CHECK(r.mode == doctest::Approx(5.0));
    CHECK(r.order == doctest::Approx(100.0 * std::log(z)));
    CHECK(r.total == doctest::Approx(5.0 + 100.0 * std::log(z)));
    CHECK(r.grad_modes(0, 0, 0) == doctest::Approx(2.0));
    CHECK(r.grad_modes(0, 0, 1) == doctest::Approx(4.0));
    CHECK(r.grad_modes(0, 1, 0) == 0.0);
    CHECK(r.grad_modes(0, 1, 1) == 0.0);
    CHECK(r.grad_logits(0, 0, 0) == doctest::Approx(100.0 / z));
    CHECK(r.grad_logits(0, 1, 0) == doctest::Approx(100.0 * std::numbers::e / z));
    CHECK(r.grad_logits(0, 2, 0) == doctest::Approx(100.0 * (1.0 / z - 1.0)));
}

TEST_CASE("saturated correct logits and perfect modes give vanishing loss") {
    Tensor3 pred(1, 2, 3, {1, 2, 3, 4, 5, 6});
    Tensor3 logits(1, 3, 1, {-40, -40, 40});
    const auto r = composite_loss(pred, logits, pred, {2});
    CHECK(r.mode == 0.0);
    CHECK(r.order < 1e-30);
}

TEST_CASE("argmax ties resolve to the lowest order") {
    Tensor3 logits(2, 3, 1, {1, 1, 0, 0, 2, 2});
    CHECK(predicted_orders(logits) == std::vector<int>{0, 1});
}

TEST_CASE("decoders beyond the predicted order receive exactly zero gradient") {
    const auto cfg = tiny_config();
    Network net(cfg, 3);
    util::Engine eng(4);
    const auto x = random_tensor(eng, 1, 1, cfg.input_length);
    auto out = net.forward(x, true);
    out.logits(0, 1, 0) += 100.0;  // predicted order 1
    const auto labels = random_tensor(eng, 1, 2, cfg.input_length);
    const auto r = composite_loss(out.modes, out.logits, labels, {2});
    REQUIRE(r.predicted[0] == 1);
    net.zero_grad();
    net.backward(r.grad_modes, r.grad_logits);
    bool dec0_moved = false;
    for (auto* p : net.params()) {
        if (p->name.rfind("dec.1.", 0) == 0) {
            INFO(p->name);
            CHECK(p->grad.cwiseAbs().maxCoeff() == 0.0);
        }
        if (p->name.rfind("dec.0.", 0) == 0 && p->trainable) dec0_moved = dec0_moved || p->grad.cwiseAbs().maxCoeff() > 0.0;
    }
    CHECK(dec0_moved);
}

TEST_CASE("Adam first step matches the closed form") {
    Param p("w", {2});
    p.value << 1.0, -2.0;
    p.grad << 0.5, -3.0;
    Adam adam({&p});
    adam.step();
    CHECK(p.value(0) == doctest::Approx(1.0 - 1e-3 * 0.5 / (0.5 + 1e-8)).epsilon(1e-15));
    CHECK(p.value(1) == doctest::Approx(-2.0 + 1e-3 * 3.0 / (3.0 + 1e-8)).epsilon(1e-15));
    CHECK(adam.steps() == 1);
    Param buf("b", {1}, false);
    Adam only_trainable({&p, &buf});
    CHECK(only_trainable.trainable().size() == 1u);
}

TEST_CASE("sample stream is deterministic and follows its distributions") {
    const GenConfig g;
    const SampleStream s(g, 17), again(g, 17), other(g, 18);
    CHECK(s.sample(3).input == again.sample(3).input);
    CHECK(s.sample(3).input != other.sample(3).input);
    CHECK(s.draw_model(5) == again.draw_model(5));

    std::array<int, 4> hist{};
    for (std::uint64_t i = 0; i < 4000; ++i) {
        const auto m = s.draw_model(i);
        hist[static_cast<std::size_t>(m.num_modes())]++;
        CHECK(m.alpha0() >= g.alpha0_min);
        CHECK(m.alpha0() <= g.alpha0_max);
        for (const auto& mode : m.modes()) {
            CHECK(mode.delta3 <= g.delta3_max);
            const double width = g.n_f * std::numbers::ln2 / mode.delta2;
            CHECK(width >= g.width_min_bins * (1 - 1e-12));
            CHECK(width <= g.width_max_bins * (1 + 1e-12));
            const double snr = mode_snr_db(mode, m.alpha0());
            CHECK(snr >= g.snr_min_db - 1e-9);
            CHECK(snr <= g.snr_max_db + 1e-9);
        }
        const int snapshots = s.draw_snapshots(i);
        CHECK(snapshots >= g.m_min);
        CHECK(snapshots <= g.m_max);
    }
    for (int c : hist) CHECK(std::abs(c - 1000) < 150);
}

TEST_CASE("training samples carry normalized inputs and per-mode labels") {
    const GenConfig g;
    const SampleStream s(g, 2);
    for (std::uint64_t i = 0; i < 12; ++i) {
        const auto x = s.sample(i);
        CHECK(x.input.size() == 512u);
        CHECK(*std::max_element(x.input.begin(), x.input.end()) == 0.0);
        CHECK(x.mode_labels.size() == 3u);
        CHECK(x.order == x.model.num_modes());
        for (int k = 0; k < 3; ++k) {
            const auto& l = x.mode_labels[static_cast<std::size_t>(k)];
            if (k >= x.order) {
                CHECK(*std::max_element(l.begin(), l.end()) == 0.0);
                CHECK(*std::min_element(l.begin(), l.end()) == 0.0);
            } else {
                CHECK(*std::min_element(l.begin(), l.end()) >= std::log(g.label_floor) - 1e-12);
            }
        }
    }
    const auto b = make_batch({s.sample(0), s.sample(1)}, 3);
    CHECK(b.input.batch() == 2);
    CHECK(b.labels.channels() == 3);
}

TEST_CASE("separation filter") {
    CHECK(well_separated(core::DmcModel({}, 1.0, 16), 0.15, 15.0));
    const double d2 = 10.0;
    const double strong = std::pow(10.0, 2.0) * d2;  // 20 dB over alpha0 = 1
    CHECK(well_separated(core::DmcModel({{strong, d2, 0.1}, {strong, d2, 0.3}}, 1.0, 16), 0.15, 15.0));
    CHECK_FALSE(well_separated(core::DmcModel({{strong, d2, 0.1}, {strong, d2, 0.2}}, 1.0, 16), 0.15, 15.0));
    CHECK_FALSE(well_separated(core::DmcModel({{strong / 100, d2, 0.1}}, 1.0, 16), 0.15, 15.0));
    const auto picked = filtered_samples(SampleStream(GenConfig{}, 3), 5, 0.15, 15.0);
    CHECK(picked.size() == 5u);
    for (const auto& x : picked) CHECK(well_separated(x.model, 0.15, 15.0));
}

TEST_CASE("generator configuration validation and JSON") {
    GenConfig g;
    g.snr_min_db = 20.0;
    CHECK(gen_config_from_json(to_json(g)) == g);
    g.m_min = 0;
    CHECK_THROWS_AS(g.validate(), InvalidParam);
}

TEST_CASE("checkpoint round trip is bitwise and resumes with the same next loss") {
    const auto cfg = tiny_config();
    const auto gen = tiny_gen();
    const SampleStream stream(gen, 4);
    Network net(cfg, 1);
    Adam adam(net.params());
    for (int step = 1; step <= 3; ++step) {
        const auto b = training_batch(stream, step, 4, 1);
        net.zero_grad();
        const auto out = net.forward(b.input, true);
        const auto r = composite_loss(out.modes, out.logits, b.labels, b.orders);
        net.backward(r.grad_modes, r.grad_logits);
        adam.step();
    }
    const auto dir = scratch_dir("ckpt");
    save_checkpoint(dir / "c", net, &adam, 3);
    const auto restored = load_network(dir / "c");
    Adam adam2(restored->params());
    load_optimizer(dir / "c", adam2);
    CHECK(adam2.steps() == 3);
    const auto pa = net.params(), pb = restored->params();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);

    auto next_loss = [&](Network& n, Adam& a) {
        const auto b = training_batch(stream, 4, 4, 1);
        n.zero_grad();
        const auto out = n.forward(b.input, true);
        const auto r = composite_loss(out.modes, out.logits, b.labels, b.orders);
        n.backward(r.grad_modes, r.grad_logits);
        a.step();
        return r.total;
    };
    CHECK(next_loss(net, adam) == next_loss(*restored, adam2));
    CHECK(read_manifest(dir / "c").at("step") == 3);
    CHECK_THROWS_AS(read_manifest(dir / "missing"), IoError);
}

TEST_CASE("resumed training reproduces an uninterrupted run") {
    const auto cfg = tiny_config();
    const auto gen = tiny_gen();
    TrainOptions o;
    o.steps = 4;
    o.batch_size = 4;
    o.eval_every = 2;
    o.val_samples = 8;
    o.seed = 9;
    const auto a = scratch_dir("full");
    const auto b = scratch_dir("split");
    const auto full = train(cfg, gen, o, a);
    CHECK(full.metrics.size() == 2u);
    auto first = o;
    first.steps = 2;
    train(cfg, gen, first, b);
    const auto resumed = train(cfg, gen, o, b);
    CHECK(resumed.resumed);
    CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
    for (const auto& e : fs::directory_iterator(a / "checkpoint")) {
        CHECK(slurp(e.path()) == slurp(b / "checkpoint" / e.path().filename()));
    }
    const auto rows = read_metrics_csv(a / "metrics.csv");
    CHECK(rows.size() == 2u);
    CHECK(rows[1].step == 4);

    auto other = o;
    other.seed = 10;
    CHECK_THROWS_AS(train(cfg, gen, other, a), InvalidParam);
}

TEST_CASE("zero order weight leaves the order head untouched") {
    const auto cfg = tiny_config();
    TrainOptions o;
    o.steps = 3;
    o.batch_size = 4;
    o.eval_every = 3;
    o.val_samples = 4;
    o.weights.w_m = 0.0;
    const auto dir = scratch_dir("wm0");
    train(cfg, tiny_gen(), o, dir);
    Network init(cfg, o.seed);
    const auto trained = load_network(dir / "checkpoint");
    const auto p0 = init.params(), p1 = trained->params();
    bool encoder_moved = false;
    for (std::size_t i = 0; i < p0.size(); ++i) {
        if (!p0[i]->trainable) continue;
        if (p0[i]->name.rfind("head.", 0) == 0) {
            INFO(p0[i]->name);
            CHECK(p0[i]->value == p1[i]->value);
        } else if (p0[i]->name.rfind("enc", 0) == 0 || p0[i]->name.rfind("stem", 0) == 0) {
            encoder_moved = encoder_moved || p0[i]->value != p1[i]->value;
        }
    }
    CHECK(encoder_moved);
}

TEST_CASE("non-finite loss aborts training") {
    TrainOptions o;
    o.steps = 50;
    o.batch_size = 2;
    o.val_samples = 2;
    o.adam.lr = 1e200;
    CHECK_THROWS_AS(train(tiny_config(), tiny_gen(), o, scratch_dir("diverge")), DivergedLoss);
}

TEST_CASE("prediction rescales with the observation power") {
    NetConfig cfg = tiny_config();
    cfg.input_length = 32;
    Network net(cfg, 21);
    const core::DmcModel model({{1.0, 20.0, 0.3}}, 0.01, 32);
    const auto obs = core::sample_observation(model, 16, 5);
    const auto scaled = core::ChannelObservation(obs.data() * std::sqrt(10.0));
    const auto a = predict(net, obs);
    const auto b = predict(net, scaled);
    CHECK(a.order == b.order);
    CHECK(a.separations.size() == static_cast<std::size_t>(a.order));
    double psum = 0.0;
    for (double p : a.probabilities) psum += p;
    CHECK(psum == doctest::Approx(1.0));
    for (std::size_t k = 0; k < a.probabilities.size(); ++k) CHECK(a.probabilities[k] == doctest::Approx(b.probabilities[k]).epsilon(1e-9));
    for (std::size_t k = 0; k < a.separations.size(); ++k) {
        for (int i = 0; i < 32; ++i) {
            CHECK(b.separations[k].values()(i) == doctest::Approx(10.0 * a.separations[k].values()(i)).epsilon(1e-9));
        }
    }
    CHECK_THROWS_AS(predict(net, core::sample_observation(core::DmcModel({}, 1.0, 16), 4, 1)), ShapeMismatch);
}

TEST_CASE("predicted separations keep the input scale and need not peak at zero") {
    Network net(tiny_config(), 4);
    for (auto* p : net.params()) {
        if (p->name == "head.fc3.bias") p->value(2) += 1e3;  // force order 2
    }
    const auto obs = core::sample_observation(core::DmcModel({{1.0, 8.0, 0.2}}, 0.1, 16), 8, 3);
    const auto x = core::normalize(core::preprocess(obs));
    const auto p = predict(net, x);
    REQUIRE(p.order == 2);
    REQUIRE(p.separations.size() == 2u);
    Tensor3 in(1, 1, 16);
    for (int i = 0; i < 16; ++i) in(0, 0, i) = x.values()(i);
    const auto out = net.forward(in, false);
    for (int k = 0; k < 2; ++k) {
        CHECK(p.separations[k].domain() == core::PdpDomain::Linear);
        for (int i = 0; i < 16; ++i) {
            CHECK(p.separations[k].values()(i) == doctest::Approx(std::exp(out.modes(0, k, i)) * x.scale()).epsilon(1e-12));
        }
    }
}
