// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmc/nn/adam.hpp"
#include "dmc/nn/network.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>

namespace dmc::nn {

/// Writes manifest.json plus one DMCT file per parameter, buffer and (when
/// given) Adam moment. The directory is replaced atomically via rename.
/// `extra` is stored verbatim under "extra" in the manifest.
void save_checkpoint(const std::filesystem::path& dir, Network& net, Adam* adam, std::int64_t step,
                     const nlohmann::json& extra = nlohmann::json::object());

/// Reads and validates the manifest. Throws IoError.
nlohmann::json read_manifest(const std::filesystem::path& dir);

/// Network built from the manifest's config with weights and buffers loaded.
std::unique_ptr<Network> load_network(const std::filesystem::path& dir);

/// Loads weights into an existing network; names and shapes must match.
void load_weights(const std::filesystem::path& dir, Network& net);

/// Restores Adam moments and step count. Throws IoError if absent.
void load_optimizer(const std::filesystem::path& dir, Adam& adam);

}  // namespace dmc::nn
