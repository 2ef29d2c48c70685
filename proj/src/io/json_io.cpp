// SPDX-License-Identifier: Apache-2.0

#include "dmc/io/json_io.hpp"

#include "dmc/errors.hpp"

#include <fstream>

namespace dmc::io {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InvalidParam(std::string("missing JSON field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw InvalidParam(std::string("bad JSON field '") + key + "': " + e.what());
    }
}

template <typename T>
void optional_field(const Json& j, const char* key, T& out) {
    if (j.contains(key)) out = field<T>(j, key);
}

Json mode_json(const core::ModeParams& m) { return {{"delta1", m.delta1}, {"delta2", m.delta2}, {"delta3", m.delta3}}; }

core::ModeParams mode_from_json(const Json& m) {
    return {field<double>(m, "delta1"), field<double>(m, "delta2"), field<double>(m, "delta3")};
}

}  // namespace

Json to_json(const core::DmcModel& model) {
    Json modes = Json::array();
    for (const auto& m : model.modes()) modes.push_back(mode_json(m));
    return {{"alpha0", model.alpha0()}, {"modes", modes}, {"n_f", model.n_f()}};
}

core::DmcModel model_from_json(const Json& j) {
    std::vector<core::ModeParams> modes;
    const auto arr = field<Json>(j, "modes");
    if (!arr.is_array()) throw InvalidParam("'modes' must be an array");
    for (const auto& m : arr) modes.push_back(mode_from_json(m));
    return core::DmcModel(std::move(modes), field<double>(j, "alpha0"), field<int>(j, "n_f"));
}

Json to_json(const likelihood::EtaVector& eta) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < eta.size(); ++i) arr.push_back(eta.values()(i));
    return arr;
}

likelihood::EtaVector eta_from_json(const Json& j) {
    if (!j.is_array()) throw InvalidParam("eta must be a JSON array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InvalidParam("eta entries must be numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return likelihood::EtaVector(std::move(v));
}

Json to_json(const estimator::FitReport& report) {
    return {{"eta_hat", to_json(report.eta_hat)},
            {"nll_trace", report.nll_trace},
            {"iterations", report.iterations},
            {"converged", report.converged},
            {"termination_reason", estimator::to_string(report.termination_reason)}};
}

estimator::FitReport fit_report_from_json(const Json& j) {
    estimator::FitReport r;
    r.eta_hat = eta_from_json(field<Json>(j, "eta_hat"));
    r.nll_trace = field<std::vector<double>>(j, "nll_trace");
    r.iterations = field<int>(j, "iterations");
    r.converged = field<bool>(j, "converged");
    r.termination_reason = estimator::termination_from_string(field<std::string>(j, "termination_reason"));
    return r;
}

Json to_json(const estimator::LmOptions& o) {
    return {{"mu0", o.mu0},           {"mu_up", o.mu_up},       {"mu_down", o.mu_down},
            {"max_iters", o.max_iters}, {"grad_tol", o.grad_tol}, {"step_tol", o.step_tol},
            {"max_inflations", o.max_inflations}};
}

estimator::LmOptions lm_options_from_json(const Json& j) {
    estimator::LmOptions o;
    if (!j.is_object()) throw InvalidParam("LM options must be a JSON object");
    optional_field(j, "mu0", o.mu0);
    optional_field(j, "mu_up", o.mu_up);
    optional_field(j, "mu_down", o.mu_down);
    optional_field(j, "max_iters", o.max_iters);
    optional_field(j, "grad_tol", o.grad_tol);
    optional_field(j, "step_tol", o.step_tol);
    optional_field(j, "max_inflations", o.max_inflations);
    o.validate();
    return o;
}

Json to_json(const crb::MismatchExperimentConfig& c) {
    return {{"n_f", c.n_f},
            {"m_snapshots", c.m_snapshots},
            {"alpha0", c.alpha0},
            {"mode1", mode_json(c.mode1)},
            {"mode2", mode_json(c.mode2)},
            {"specular", {{"gamma_re", c.specular.gamma_re}, {"gamma_im", c.specular.gamma_im}, {"tau", c.specular.tau}}},
            {"sweep", c.sweep},
            {"trials_per_level", c.trials_per_level},
            {"seed", c.seed},
            {"fit_two_mode", c.fit_two_mode},
            {"lm", to_json(c.lm)}};
}

crb::MismatchExperimentConfig mismatch_config_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidParam("crb config must be a JSON object");
    auto c = crb::default_mismatch_config();
    optional_field(j, "n_f", c.n_f);
    optional_field(j, "m_snapshots", c.m_snapshots);
    optional_field(j, "alpha0", c.alpha0);
    if (j.contains("mode1")) c.mode1 = mode_from_json(j.at("mode1"));
    if (j.contains("mode2")) c.mode2 = mode_from_json(j.at("mode2"));
    if (j.contains("specular")) {
        const auto& s = j.at("specular");
        optional_field(s, "gamma_re", c.specular.gamma_re);
        optional_field(s, "gamma_im", c.specular.gamma_im);
        optional_field(s, "tau", c.specular.tau);
    }
    optional_field(j, "sweep", c.sweep);
    optional_field(j, "trials_per_level", c.trials_per_level);
    optional_field(j, "seed", c.seed);
    optional_field(j, "fit_two_mode", c.fit_two_mode);
    if (j.contains("lm")) c.lm = lm_options_from_json(j.at("lm"));
    c.validate();
    return c;
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw IoError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace dmc::io
