// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmc/core/model.hpp"
#include "dmc/nn/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace dmc::nn {

/// Sampling distributions of the synthetic training data.
struct GenConfig {
    int n_f = 512;
    int max_order = 3;
    double delta3_max = 0.85;          // delta3 ~ U[0, delta3_max]
    double width_min_bins = 2.0;       // 3 dB width ~ log-U, delta2 = n_f ln2 / width
    double width_max_bins = 100.0;
    double snr_min_db = 5.0;           // (delta1 / delta2) / alpha0 ~ log-U in dB
    double snr_max_db = 40.0;
    double alpha0_min = 1e-3;          // alpha0 ~ log-U
    double alpha0_max = 1e1;
    int m_min = 8;                     // snapshots ~ U{m_min..m_max}
    int m_max = 64;
    double label_floor = 1e-6;         // labels clamp at label_floor * scale

    void validate() const;
    bool operator==(const GenConfig&) const = default;
};

nlohmann::json to_json(const GenConfig& c);
GenConfig gen_config_from_json(const nlohmann::json& j);

struct TrainSample {
    std::vector<double> input;                     // normalized PDP, max exactly 0
    std::vector<std::vector<double>> mode_labels;  // max_order entries, zero when absent
    int order = 0;
    core::DmcModel model{{}, 1.0, 2};               // generating model (canonical order)
    double scale = 1.0;                            // max of the linear PDP
};

/// Mode SNR (delta1 / delta2) / alpha0 in dB.
double mode_snr_db(const core::ModeParams& mode, double alpha0);

/// Infinite deterministic stream: sample(i) depends only on (seed, i).
class SampleStream {
public:
    SampleStream(GenConfig cfg, std::uint64_t seed);
    const GenConfig& config() const { return cfg_; }
    core::DmcModel draw_model(std::uint64_t index) const;
    int draw_snapshots(std::uint64_t index) const;
    std::uint64_t observation_seed(std::uint64_t index) const;
    TrainSample sample(std::uint64_t index) const;

private:
    GenConfig cfg_;
    std::uint64_t seed_;
};

/// Builds a sample (input and labels) from a given model.
TrainSample make_sample(const core::DmcModel& model, int m_snapshots, std::uint64_t seed, const GenConfig& cfg);
/// Same, from an observation already drawn from `model`.
TrainSample sample_from_observation(const core::DmcModel& model, const core::ChannelObservation& obs,
                                    const GenConfig& cfg);

struct Batch {
    Tensor3 input;   // [B, 1, n_f]
    Tensor3 labels;  // [B, max_order, n_f]
    std::vector<int> orders;
};

Batch make_batch(const std::vector<TrainSample>& samples, int max_order);

/// Pairwise delta3 gaps >= min_separation and every mode SNR >= min_snr_db.
bool well_separated(const core::DmcModel& model, double min_separation, double min_snr_db);

/// First `count` samples of the stream that pass well_separated.
std::vector<TrainSample> filtered_samples(const SampleStream& stream, std::size_t count, double min_separation,
                                          double min_snr_db);

}  // namespace dmc::nn
