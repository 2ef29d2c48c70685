// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmc/nn/adam.hpp"
#include "dmc/nn/dataset.hpp"
#include "dmc/nn/loss.hpp"
#include "dmc/nn/network.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace dmc::nn {

struct TrainOptions {
    std::int64_t steps = 20000;
    int batch_size = 64;
    int eval_every = 500;            // metrics row + checkpoint cadence
    int val_samples = 512;           // held-out, well-separated samples
    double val_min_separation = 0.15;
    double val_min_snr_db = 15.0;
    AdamOptions adam;
    LossWeights weights;
    std::uint64_t seed = 0;
    int threads = 1;                 // data generation workers

    void validate() const;
};

nlohmann::json to_json(const TrainOptions& o);
TrainOptions train_options_from_json(const nlohmann::json& j);

struct MetricsRow {
    std::int64_t step = 0;
    double loss_mode = 0.0;    // mean over the steps since the previous row
    double loss_order = 0.0;
    double val_order_acc = 0.0;
};

struct TrainResult {
    std::vector<MetricsRow> metrics;
    std::int64_t steps_done = 0;
    bool resumed = false;
};

/// Held-out set: disjoint stream, filtered by the separation/SNR rule.
std::vector<TrainSample> validation_set(const GenConfig& gen, const TrainOptions& opts);

/// Fraction of samples whose argmax order equals the label (eval mode).
double order_accuracy(Network& net, const std::vector<TrainSample>& samples, int batch_size = 64);

/// Trains into `out_dir` (checkpoint/ and metrics.csv). With `resume`, an
/// existing checkpoint whose configs match is continued and yields the same
/// files as an uninterrupted run. Throws DivergedLoss on a non-finite loss.
TrainResult train(const NetConfig& net_cfg, const GenConfig& gen_cfg, const TrainOptions& opts,
                  const std::filesystem::path& out_dir, bool resume = true);

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Per-sample mini-batch of the training stream for a 1-based step.
Batch training_batch(const SampleStream& stream, std::int64_t step, int batch_size, int threads);

}  // namespace dmc::nn
