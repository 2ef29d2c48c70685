// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dmc/core/model.hpp"
#include "dmc/crb/crb.hpp"
#include "dmc/estimator/estimator.hpp"
#include "dmc/likelihood/likelihood.hpp"

#include <json.hpp>

#include <filesystem>

namespace dmc::io {

using Json = nlohmann::json;

Json to_json(const core::DmcModel& model);
core::DmcModel model_from_json(const Json& j);

Json to_json(const likelihood::EtaVector& eta);
likelihood::EtaVector eta_from_json(const Json& j);

Json to_json(const estimator::FitReport& report);
estimator::FitReport fit_report_from_json(const Json& j);

Json to_json(const estimator::LmOptions& opts);
/// Missing keys keep their defaults.
estimator::LmOptions lm_options_from_json(const Json& j);

/// Throws IoError when the file is missing or not valid JSON.
Json to_json(const crb::MismatchExperimentConfig& cfg);
/// Starts from crb::default_mismatch_config() and applies the keys present.
crb::MismatchExperimentConfig mismatch_config_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
/// Pretty-printed, newline-terminated.
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace dmc::io
