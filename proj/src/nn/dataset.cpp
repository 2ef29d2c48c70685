// SPDX-License-Identifier: Apache-2.0

#include "dmc/nn/dataset.hpp"

#include "dmc/core/pdp.hpp"
#include "dmc/core/sampling.hpp"
#include "dmc/errors.hpp"
#include "dmc/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace dmc::nn {

void GenConfig::validate() const {
    if (n_f < 3 || max_order < 0 || max_order > core::kMaxModes) throw InvalidParam("bad n_f or max_order");
    if (!(delta3_max >= 0.0 && delta3_max < 1.0)) throw InvalidParam("delta3_max must lie in [0, 1)");
    if (!(width_min_bins > 0.0 && width_max_bins >= width_min_bins)) throw InvalidParam("bad width range");
    if (!(snr_max_db >= snr_min_db) || !std::isfinite(snr_min_db) || !std::isfinite(snr_max_db)) {
        throw InvalidParam("bad SNR range");
    }
    if (!(alpha0_min > 0.0 && alpha0_max >= alpha0_min)) throw InvalidParam("bad alpha0 range");
    if (m_min < 1 || m_max < m_min) throw InvalidParam("bad snapshot range");
    if (!(label_floor > 0.0 && label_floor < 1.0)) throw InvalidParam("label_floor must lie in (0, 1)");
}

nlohmann::json to_json(const GenConfig& c) {
    return {{"n_f", c.n_f},
            {"max_order", c.max_order},
            {"delta3_max", c.delta3_max},
            {"width_min_bins", c.width_min_bins},
            {"width_max_bins", c.width_max_bins},
            {"snr_min_db", c.snr_min_db},
            {"snr_max_db", c.snr_max_db},
            {"alpha0_min", c.alpha0_min},
            {"alpha0_max", c.alpha0_max},
            {"m_min", c.m_min},
            {"m_max", c.m_max},
            {"label_floor", c.label_floor}};
}

GenConfig gen_config_from_json(const nlohmann::json& j) {
    GenConfig c;
    if (!j.is_object()) throw InvalidParam("generator config must be a JSON object");
    auto num = [&](const char* key, double& v) {
        if (j.contains(key)) {
            if (!j.at(key).is_number()) throw InvalidParam(std::string("'") + key + "' must be a number");
            v = j.at(key).get<double>();
        }
    };
    auto integer = [&](const char* key, int& v) {
        if (j.contains(key)) {
            if (!j.at(key).is_number_integer()) throw InvalidParam(std::string("'") + key + "' must be an integer");
            v = j.at(key).get<int>();
        }
    };
    integer("n_f", c.n_f);
    integer("max_order", c.max_order);
    num("delta3_max", c.delta3_max);
    num("width_min_bins", c.width_min_bins);
    num("width_max_bins", c.width_max_bins);
    num("snr_min_db", c.snr_min_db);
    num("snr_max_db", c.snr_max_db);
    num("alpha0_min", c.alpha0_min);
    num("alpha0_max", c.alpha0_max);
    integer("m_min", c.m_min);
    integer("m_max", c.m_max);
    num("label_floor", c.label_floor);
    c.validate();
    return c;
}

double mode_snr_db(const core::ModeParams& mode, double alpha0) {
    return 10.0 * std::log10(mode.delta1 / mode.delta2 / alpha0);
}

SampleStream::SampleStream(GenConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), seed_(seed) { cfg_.validate(); }

core::DmcModel SampleStream::draw_model(std::uint64_t index) const {
    util::Engine eng(util::derive_seed(seed_, {index, 0}));
    const int order = std::uniform_int_distribution<int>(0, cfg_.max_order)(eng);
    const double alpha0 = util::log_uniform(eng, cfg_.alpha0_min, cfg_.alpha0_max);
    std::vector<core::ModeParams> modes;
    for (int k = 0; k < order; ++k) {
        const double delta3 = std::uniform_real_distribution<double>(0.0, cfg_.delta3_max)(eng);
        const double width = util::log_uniform(eng, cfg_.width_min_bins, cfg_.width_max_bins);
        const double delta2 = cfg_.n_f * std::numbers::ln2 / width;
        const double snr_db = std::uniform_real_distribution<double>(cfg_.snr_min_db, cfg_.snr_max_db)(eng);
        const double delta1 = std::pow(10.0, snr_db / 10.0) * alpha0 * delta2;
        modes.push_back({delta1, delta2, delta3});
    }
    return core::DmcModel(std::move(modes), alpha0, cfg_.n_f);
}

TrainSample make_sample(const core::DmcModel& model, int m_snapshots, std::uint64_t seed, const GenConfig& cfg) {
    if (model.n_f() != cfg.n_f) throw ShapeMismatch("model n_f differs from generator n_f");
    if (model.num_modes() > cfg.max_order) throw OrderMismatch("model has more modes than max_order");
    return sample_from_observation(model, core::sample_observation(model, m_snapshots, seed), cfg);
}

TrainSample sample_from_observation(const core::DmcModel& model, const core::ChannelObservation& obs,
                                    const GenConfig& cfg) {
    if (model.n_f() != cfg.n_f || obs.n_f() != cfg.n_f) throw ShapeMismatch("model n_f differs from generator n_f");
    if (model.num_modes() > cfg.max_order) throw OrderMismatch("model has more modes than max_order");
    const auto normalized = core::normalize(core::preprocess(obs));

    TrainSample s;
    s.model = model;
    s.order = model.num_modes();
    s.scale = normalized.scale();
    s.input.assign(normalized.values().data(), normalized.values().data() + normalized.size());
    const double log_scale = std::log(s.scale);
    const double floor = cfg.label_floor * s.scale;
    for (int k = 0; k < cfg.max_order; ++k) {
        std::vector<double> label(static_cast<std::size_t>(cfg.n_f), 0.0);
        if (k < model.num_modes()) {
            const auto pdp = core::expected_mode_pdp(model.modes()[static_cast<std::size_t>(k)], cfg.n_f);
            for (int i = 0; i < cfg.n_f; ++i) label[static_cast<std::size_t>(i)] = std::log(std::max(pdp.values()(i), floor)) - log_scale;
        }
        s.mode_labels.push_back(std::move(label));
    }
    return s;
}

int SampleStream::draw_snapshots(std::uint64_t index) const {
    util::Engine eng(util::derive_seed(seed_, {index, 1}));
    return std::uniform_int_distribution<int>(cfg_.m_min, cfg_.m_max)(eng);
}

std::uint64_t SampleStream::observation_seed(std::uint64_t index) const { return util::derive_seed(seed_, {index, 2}); }

TrainSample SampleStream::sample(std::uint64_t index) const {
    return make_sample(draw_model(index), draw_snapshots(index), observation_seed(index), cfg_);
}

Batch make_batch(const std::vector<TrainSample>& samples, int max_order) {
    if (samples.empty()) throw ShapeMismatch("empty batch");
    const int nb = static_cast<int>(samples.size());
    const int n = static_cast<int>(samples.front().input.size());
    Batch b{Tensor3(nb, 1, n), Tensor3(nb, max_order, n), {}};
    for (int i = 0; i < nb; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        if (static_cast<int>(s.input.size()) != n || static_cast<int>(s.mode_labels.size()) != max_order) {
            throw ShapeMismatch("inconsistent samples in batch");
        }
        std::copy(s.input.begin(), s.input.end(), &b.input(i, 0, 0));
        for (int k = 0; k < max_order; ++k) {
            std::copy(s.mode_labels[static_cast<std::size_t>(k)].begin(), s.mode_labels[static_cast<std::size_t>(k)].end(),
                      &b.labels(i, k, 0));
        }
        b.orders.push_back(s.order);
    }
    return b;
}

bool well_separated(const core::DmcModel& model, double min_separation, double min_snr_db) {
    const auto& modes = model.modes();
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (mode_snr_db(modes[i], model.alpha0()) < min_snr_db) return false;
        for (std::size_t j = i + 1; j < modes.size(); ++j) {
            if (std::abs(modes[i].delta3 - modes[j].delta3) < min_separation) return false;
        }
    }
    return true;
}

std::vector<TrainSample> filtered_samples(const SampleStream& stream, std::size_t count, double min_separation,
                                          double min_snr_db) {
    std::vector<TrainSample> out;
    for (std::uint64_t i = 0; out.size() < count; ++i) {
        if (well_separated(stream.draw_model(i), min_separation, min_snr_db)) out.push_back(stream.sample(i));
    }
    return out;
}

}  // namespace dmc::nn
