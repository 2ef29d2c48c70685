// SPDX-License-Identifier: Apache-2.0

#include "dmc/nn/trainer.hpp"

#include "dmc/errors.hpp"
#include "dmc/io/json_io.hpp"
#include "dmc/nn/checkpoint.hpp"
#include "dmc/util/log.hpp"
#include "dmc/util/rng.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <mutex>
#include <thread>

namespace dmc::nn {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kValStream = 2;

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::string row_string(const MetricsRow& r) {
    std::ostringstream os;
    os << r.step << ',' << std::setprecision(9) << std::scientific << r.loss_mode << ',' << r.loss_order << ','
       << std::fixed << std::setprecision(6) << r.val_order_acc;
    return os.str();
}

}  // namespace

void TrainOptions::validate() const {
    if (steps < 1) throw InvalidParam("steps must be >= 1");
    if (batch_size < 1) throw InvalidParam("batch_size must be >= 1");
    if (eval_every < 1) throw InvalidParam("eval_every must be >= 1");
    if (val_samples < 1) throw InvalidParam("val_samples must be >= 1");
    if (threads < 1) throw InvalidParam("threads must be >= 1");
    if (!(adam.lr > 0.0) || !(adam.eps > 0.0)) throw InvalidParam("adam lr and eps must be positive");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
        throw InvalidParam("adam betas must lie in [0, 1)");
    }
    if (!(weights.w_x >= 0.0) || !(weights.w_m >= 0.0)) throw InvalidParam("loss weights must be non-negative");
}

nlohmann::json to_json(const TrainOptions& o) {
    return {{"steps", o.steps},
            {"batch_size", o.batch_size},
            {"eval_every", o.eval_every},
            {"val_samples", o.val_samples},
            {"val_min_separation", o.val_min_separation},
            {"val_min_snr_db", o.val_min_snr_db},
            {"lr", o.adam.lr},
            {"beta1", o.adam.beta1},
            {"beta2", o.adam.beta2},
            {"eps", o.adam.eps},
            {"w_x", o.weights.w_x},
            {"w_m", o.weights.w_m},
            {"seed", o.seed}};
}

TrainOptions train_options_from_json(const nlohmann::json& j) {
    TrainOptions o;
    if (!j.is_object()) throw InvalidParam("train options must be a JSON object");
    try {
        read_opt(j, "steps", o.steps);
        read_opt(j, "batch_size", o.batch_size);
        read_opt(j, "eval_every", o.eval_every);
        read_opt(j, "val_samples", o.val_samples);
        read_opt(j, "val_min_separation", o.val_min_separation);
        read_opt(j, "val_min_snr_db", o.val_min_snr_db);
        read_opt(j, "lr", o.adam.lr);
        read_opt(j, "beta1", o.adam.beta1);
        read_opt(j, "beta2", o.adam.beta2);
        read_opt(j, "eps", o.adam.eps);
        read_opt(j, "w_x", o.weights.w_x);
        read_opt(j, "w_m", o.weights.w_m);
        read_opt(j, "seed", o.seed);
        read_opt(j, "threads", o.threads);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidParam(std::string("bad train options: ") + e.what());
    }
    o.validate();
    return o;
}

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + path.string());
    f << "step,loss_mode,loss_order,val_order_acc\n";
    for (const auto& r : rows) f << row_string(r) << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

std::vector<MetricsRow> read_metrics_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read " + path.string());
    std::string line;
    std::getline(f, line);
    if (line != "step,loss_mode,loss_order,val_order_acc") throw IoError("unexpected metrics header in " + path.string());
    std::vector<MetricsRow> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream is(line);
        MetricsRow r;
        char c1 = 0, c2 = 0, c3 = 0;
        if (!(is >> r.step >> c1 >> r.loss_mode >> c2 >> r.loss_order >> c3 >> r.val_order_acc)) {
            throw IoError("malformed metrics row: " + line);
        }
        rows.push_back(r);
    }
    return rows;
}

Batch training_batch(const SampleStream& stream, std::int64_t step, int batch_size, int threads) {
    std::vector<TrainSample> samples(static_cast<std::size_t>(batch_size));
    const auto base = static_cast<std::uint64_t>(step - 1) * static_cast<std::uint64_t>(batch_size);
    if (threads <= 1) {
        for (int i = 0; i < batch_size; ++i) samples[static_cast<std::size_t>(i)] = stream.sample(base + i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr err;
        std::mutex mu;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (int i = next++; i < batch_size; i = next++) {
                    try {
                        samples[static_cast<std::size_t>(i)] = stream.sample(base + static_cast<std::uint64_t>(i));
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(mu);
                        if (!err) err = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (err) std::rethrow_exception(err);
    }
    return make_batch(samples, stream.config().max_order);
}

std::vector<TrainSample> validation_set(const GenConfig& gen, const TrainOptions& opts) {
    const SampleStream stream(gen, util::derive_seed(opts.seed, {kValStream}));
    return filtered_samples(stream, static_cast<std::size_t>(opts.val_samples), opts.val_min_separation,
                            opts.val_min_snr_db);
}

double order_accuracy(Network& net, const std::vector<TrainSample>& samples, int batch_size) {
    if (samples.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < samples.size(); i += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(samples.size(), i + static_cast<std::size_t>(batch_size));
        const std::vector<TrainSample> chunk(samples.begin() + static_cast<std::ptrdiff_t>(i),
                                             samples.begin() + static_cast<std::ptrdiff_t>(end));
        const auto b = make_batch(chunk, static_cast<int>(chunk.front().mode_labels.size()));
        const auto pred = predicted_orders(net.forward(b.input, false).logits);
        for (std::size_t k = 0; k < pred.size(); ++k) correct += pred[k] == b.orders[k] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainResult train(const NetConfig& net_cfg, const GenConfig& gen_cfg, const TrainOptions& opts, const fs::path& out_dir,
                  bool resume) {
    net_cfg.validate();
    gen_cfg.validate();
    opts.validate();
    if (net_cfg.input_length != gen_cfg.n_f) throw ShapeMismatch("network input_length must equal generator n_f");
    if (net_cfg.num_decoders != gen_cfg.max_order) throw ShapeMismatch("num_decoders must equal max_order");

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    const fs::path ckpt = out_dir / "checkpoint";
    const fs::path metrics_path = out_dir / "metrics.csv";

    // Seeds and the eval cadence decide the sample sequence; the step budget
    // does not, so a finished run can be extended.
    auto identity = to_json(opts);
    identity.erase("steps");
    const nlohmann::json extra = {{"gen_config", to_json(gen_cfg)}, {"train_options", identity}};

    Network net(net_cfg, opts.seed);
    Adam adam(net.params(), opts.adam);
    TrainResult result;
    std::int64_t step = 0;

    if (resume && fs::exists(ckpt / "manifest.json")) {
        const auto m = read_manifest(ckpt);
        auto stored = m.at("extra");
        if (stored.contains("train_options")) stored["train_options"].erase("steps");
        if (net_config_from_json(m.at("net_config")) != net_cfg || stored != extra) {
            throw InvalidParam("existing checkpoint in " + ckpt.string() + " was made with a different config");
        }
        load_weights(ckpt, net);
        load_optimizer(ckpt, adam);
        step = m.at("step").get<std::int64_t>();
        for (const auto& r : read_metrics_csv(metrics_path)) {
            if (r.step <= step) result.metrics.push_back(r);
        }
        result.resumed = true;
        util::log(util::LogLevel::Info, "resuming at step " + std::to_string(step));
    }

    const SampleStream stream(gen_cfg, util::derive_seed(opts.seed, {kTrainStream}));
    const auto val = validation_set(gen_cfg, opts);

    double sum_mode = 0.0, sum_order = 0.0;
    std::int64_t count = 0;
    while (step < opts.steps) {
        ++step;
        const auto batch = training_batch(stream, step, opts.batch_size, opts.threads);
        net.zero_grad();
        const auto out = net.forward(batch.input, true);
        const auto loss = composite_loss(out.modes, out.logits, batch.labels, batch.orders, opts.weights);
        if (!std::isfinite(loss.total)) {
            throw DivergedLoss("non-finite training loss at step " + std::to_string(step));
        }
        net.backward(loss.grad_modes, loss.grad_logits);
        adam.step();
        sum_mode += loss.mode;
        sum_order += loss.order;
        ++count;

        if (step % opts.eval_every == 0 || step == opts.steps) {
            MetricsRow r;
            r.step = step;
            r.loss_mode = sum_mode / static_cast<double>(count);
            r.loss_order = sum_order / static_cast<double>(count);
            r.val_order_acc = order_accuracy(net, val);
            result.metrics.push_back(r);
            sum_mode = sum_order = 0.0;
            count = 0;
            save_checkpoint(ckpt, net, &adam, step, extra);
            write_metrics_csv(metrics_path, result.metrics);
            util::log(util::LogLevel::Info, "step " + row_string(r));
        }
    }
    result.steps_done = step;
    return result;
}

}  // namespace dmc::nn
