// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include "dmc/core/pdp.hpp"
#include "dmc/core/sampling.hpp"
#include "dmc/crb/crb.hpp"
#include "dmc/errors.hpp"
#include "dmc/estimator/estimator.hpp"
#include "dmc/io/json_io.hpp"
#include "dmc/io/tensor_file.hpp"
#include "dmc/nn/checkpoint.hpp"
#include "dmc/nn/dataset.hpp"
#include "dmc/nn/predict.hpp"
#include "dmc/nn/trainer.hpp"
#include "dmc/util/log.hpp"

#include <CLI11.hpp>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

namespace dmc::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

// Flag values as parsed; unset optionals fall back to the config file.
struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int threads = 1;
    std::optional<int> order;
    std::optional<std::string> weights;
    std::vector<std::string> separations;
    std::optional<std::string> observation;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Config document plus the directory relative paths resolve against.
struct Context {
    std::string command;
    Json section = Json::object();
    fs::path base = ".";
    std::uint64_t seed = 0;
    fs::path out;
    Flags flags;

    fs::path resolve(const std::string& p) const {
        const fs::path path(p);
        return path.is_absolute() ? path : base / path;
    }
};

const std::set<std::string> kSections = {"generate", "train", "infer", "estimate", "crb"};

void require_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

Context load_context(const std::string& command, const Flags& flags) {
    Context ctx;
    ctx.command = command;
    ctx.flags = flags;
    std::optional<std::string> out_from_file;
    if (!flags.config.empty()) {
        const fs::path cfg_path(flags.config);
        Json doc;
        {
            std::ifstream in(cfg_path);
            if (!in) throw IoError("cannot open config " + cfg_path.string());
            try {
                doc = Json::parse(in);
            } catch (const Json::parse_error& e) {
                throw ConfigError("config is not valid JSON: " + std::string(e.what()));
            }
        }
        std::set<std::string> top = kSections;
        top.insert({"seed", "out"});
        require_keys(doc, top, "config");
        ctx.base = cfg_path.parent_path().empty() ? fs::path(".") : cfg_path.parent_path();
        if (doc.contains("seed")) {
            if (!doc["seed"].is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
            ctx.seed = doc["seed"].get<std::uint64_t>();
        }
        if (doc.contains("out")) {
            if (!doc["out"].is_string()) throw ConfigError("'out' must be a string");
            out_from_file = ctx.resolve(doc["out"].get<std::string>()).string();
        }
        if (!doc.contains(command)) throw ConfigError("config has no '" + command + "' section");
        ctx.section = doc[command];
        if (!ctx.section.is_object()) throw ConfigError("'" + command + "' section must be a JSON object");
    }
    if (flags.seed) ctx.seed = *flags.seed;
    if (flags.out) {
        ctx.out = *flags.out;
    } else if (out_from_file) {
        ctx.out = *out_from_file;
    } else {
        throw ConfigError("no output directory: pass --out or set 'out' in the config");
    }
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw IoError("cannot create output directory " + ctx.out.string() + ": " + ec.message());
    return ctx;
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

std::string indexed(const std::string& stem, std::size_t i, const std::string& ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu", i);
    return stem + "_" + buf + ext;
}

// ---- generate --------------------------------------------------------------

int cmd_generate(const Context& ctx) {
    const auto& s = ctx.section;
    require_keys(s, {"count", "gen", "model", "m_snapshots", "filter"}, "generate section");
    const nn::GenConfig gen = nn::gen_config_from_json(get_or<Json>(s, "gen", Json::object()));
    const auto count = get_or<std::int64_t>(s, "count", 1);
    if (count < 1) throw ConfigError("'count' must be >= 1");

    std::optional<core::DmcModel> fixed;
    if (s.contains("model")) fixed = io::model_from_json(s.at("model"));
    std::optional<int> m_fixed;
    if (s.contains("m_snapshots")) m_fixed = get_or<int>(s, "m_snapshots", 0);
    if (m_fixed && *m_fixed < 1) throw ConfigError("'m_snapshots' must be >= 1");

    const Json filter = get_or<Json>(s, "filter", Json());
    std::optional<int> want_order;
    double min_sep = 0.0, min_snr = -1e300;
    if (!filter.is_null()) {
        require_keys(filter, {"order", "min_separation", "min_snr_db"}, "generate.filter");
        if (filter.contains("order")) want_order = get_or<int>(filter, "order", 0);
        min_sep = get_or<double>(filter, "min_separation", min_sep);
        min_snr = get_or<double>(filter, "min_snr_db", min_snr);
        if (want_order && (*want_order < 0 || *want_order > gen.max_order)) {
            throw ConfigError("filter order must lie in [0, max_order]");
        }
    }

    const nn::SampleStream stream(gen, ctx.seed);
    const auto n = static_cast<std::uint64_t>(gen.n_f);
    const auto total = static_cast<std::uint64_t>(count);
    io::RealTensor inputs{{total, n}, {}}, labels{{total, static_cast<std::uint64_t>(gen.max_order), n}, {}};
    io::RealTensor orders{{total}, {}}, scales{{total}, {}};
    Json entries = Json::array();

    std::uint64_t index = 0;
    for (std::uint64_t produced = 0; produced < total; ++index) {
        const auto model = fixed ? *fixed : stream.draw_model(index);
        if (!fixed) {
            if (want_order && model.num_modes() != *want_order) continue;
            if (!filter.is_null() && !nn::well_separated(model, min_sep, min_snr)) continue;
        }
        const int m = m_fixed ? *m_fixed : stream.draw_snapshots(index);
        const auto obs = core::sample_observation(model, m, stream.observation_seed(index));
        const auto sample = nn::sample_from_observation(model, obs, gen);

        const auto obs_file = indexed("observation", produced, ".dmct");
        const auto model_file = indexed("model", produced, ".json");
        io::write_tensor(ctx.out / obs_file, io::to_tensor(obs));
        io::write_json(ctx.out / model_file, io::to_json(model));
        inputs.data.insert(inputs.data.end(), sample.input.begin(), sample.input.end());
        for (const auto& l : sample.mode_labels) labels.data.insert(labels.data.end(), l.begin(), l.end());
        orders.data.push_back(sample.order);
        scales.data.push_back(sample.scale);
        entries.push_back({{"observation", obs_file}, {"model", model_file}, {"stream_index", index}, {"m_snapshots", m}});
        ++produced;
    }
    io::write_tensor(ctx.out / "shard_inputs.dmct", inputs);
    io::write_tensor(ctx.out / "shard_labels.dmct", labels);
    io::write_tensor(ctx.out / "shard_orders.dmct", orders);
    io::write_tensor(ctx.out / "shard_scales.dmct", scales);
    io::write_json(ctx.out / "manifest.json", {{"seed", ctx.seed}, {"count", count}, {"gen", nn::to_json(gen)}, {"samples", entries}});
    util::log(util::LogLevel::Info, "generated " + std::to_string(count) + " samples into " + ctx.out.string());
    return kOk;
}

// ---- train -----------------------------------------------------------------

int cmd_train(const Context& ctx) {
    const auto& s = ctx.section;
    require_keys(s, {"net", "gen", "options", "resume"}, "train section");
    nn::NetConfig net;
    nn::GenConfig gen;
    nn::TrainOptions opts;
    try {
        net = nn::net_config_from_json(get_or<Json>(s, "net", Json::object()));
        gen = nn::gen_config_from_json(get_or<Json>(s, "gen", Json::object()));
        opts = nn::train_options_from_json(get_or<Json>(s, "options", Json::object()));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    opts.seed = ctx.seed;
    opts.threads = ctx.flags.threads;
    const auto result = nn::train(net, gen, opts, ctx.out, get_or<bool>(s, "resume", true));
    util::log(util::LogLevel::Info, "trained to step " + std::to_string(result.steps_done));
    return kOk;
}

// ---- infer -----------------------------------------------------------------

fs::path observation_path(const Context& ctx) {
    if (ctx.flags.observation) return *ctx.flags.observation;
    if (!ctx.section.contains("observation")) throw ConfigError("no observation: pass --observation or set 'observation'");
    return ctx.resolve(get_or<std::string>(ctx.section, "observation", ""));
}

std::optional<fs::path> weights_path(const Context& ctx) {
    if (ctx.flags.weights) return fs::path(*ctx.flags.weights);
    if (ctx.section.contains("weights")) return ctx.resolve(get_or<std::string>(ctx.section, "weights", ""));
    return std::nullopt;
}

Json write_prediction(const fs::path& out, const nn::Prediction& p) {
    Json seps = Json::array();
    for (std::size_t k = 0; k < p.separations.size(); ++k) {
        const auto file = "separation_" + std::to_string(k) + ".dmct";
        io::write_tensor(out / file, io::to_tensor(p.separations[k]));
        seps.push_back(file);
    }
    Json j = {{"order", p.order}, {"probabilities", p.probabilities}, {"separations", seps}};
    io::write_json(out / "prediction.json", j);
    return j;
}

int cmd_infer(const Context& ctx) {
    require_keys(ctx.section, {"observation", "weights"}, "infer section");
    const auto weights = weights_path(ctx);
    if (!weights) throw ConfigError("infer needs --weights or 'weights'");
    const auto obs = io::observation_from_tensor(io::read_complex_tensor(observation_path(ctx)));
    auto net = nn::load_network(*weights);
    const auto p = nn::predict(*net, obs);
    write_prediction(ctx.out, p);
    util::log(util::LogLevel::Info, "predicted order " + std::to_string(p.order));
    return kOk;
}

// ---- estimate --------------------------------------------------------------

int cmd_estimate(const Context& ctx) {
    const auto& s = ctx.section;
    require_keys(s, {"observation", "weights", "order", "separations", "lm"}, "estimate section");
    estimator::LmOptions lm;
    try {
        if (s.contains("lm")) lm = io::lm_options_from_json(s.at("lm"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto obs_path = observation_path(ctx);

    std::optional<int> order = ctx.flags.order;
    if (!order && s.contains("order")) order = get_or<int>(s, "order", 0);
    std::vector<std::string> sep_files = ctx.flags.separations;
    if (sep_files.empty() && s.contains("separations")) {
        for (const auto& f : get_or<std::vector<std::string>>(s, "separations", {})) sep_files.push_back(ctx.resolve(f).string());
    }

    std::vector<core::Pdp> separations;
    int m = 0;
    if (order) {
        m = *order;
        if (m < 0) throw ConfigError("--order must be >= 0");
        if (static_cast<int>(sep_files.size()) != m) {
            throw ConfigError("--order " + std::to_string(m) + " needs exactly " + std::to_string(m) + " separation files");
        }
    } else if (!weights_path(ctx)) {
        throw ConfigError("estimate needs --weights, or --order with --separations");
    }
    const auto obs = io::observation_from_tensor(io::read_complex_tensor(obs_path));
    if (order) {
        for (const auto& f : sep_files) separations.push_back(io::pdp_from_tensor(io::read_real_tensor(f)));
    } else {
        auto net = nn::load_network(*weights_path(ctx));
        auto p = nn::predict(*net, obs);
        m = p.order;
        separations = std::move(p.separations);
    }

    const auto est = estimator::estimate_multimode(obs, separations, m, lm);
    io::write_json(ctx.out / "model.json", io::to_json(est.model));
    io::write_json(ctx.out / "fit_report.json", io::to_json(est.report));
    util::log(util::LogLevel::Info, "estimated " + std::to_string(m) + " mode(s), " + estimator::to_string(est.report.termination_reason));
    return kOk;
}

// ---- crb -------------------------------------------------------------------

int cmd_crb(const Context& ctx) {
    crb::MismatchExperimentConfig cfg;
    try {
        cfg = io::mismatch_config_from_json(ctx.section);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (ctx.flags.seed || !ctx.section.contains("seed")) cfg.seed = ctx.seed;
    const auto records = crb::run_mismatch_experiment(cfg, ctx.flags.threads);
    std::ofstream f(ctx.out / "crb.csv", std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write " + (ctx.out / "crb.csv").string());
    crb::write_mismatch_csv(f, records);
    if (!f) throw IoError("write failed: " + (ctx.out / "crb.csv").string());
    return kOk;
}

void write_diagnostic(const Context* ctx, const std::string& kind, const std::string& what) {
    std::cerr << "dmc: " << kind << ": " << what << '\n';
    if (ctx == nullptr) return;
    try {
        io::write_json(ctx->out / "error.json", {{"command", ctx->command}, {"kind", kind}, {"message", what}});
    } catch (const std::exception&) {
    }
}

}  // namespace

void tune_allocator() {
#ifdef __GLIBC__
    // Covariance factors are a few MB each; keep them off the mmap path so
    // repeated allocations do not page-fault.
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"Multi-modal dense multipath component estimation"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags flags;
    std::string log_name;
    app.add_option("--log", log_name, "log level (error|warn|info|debug); overrides DMC_LOG");

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", flags.config, "JSON run config")->check(CLI::ExistingFile);
        if (config_required) c->required();
        sub->add_option("--seed", flags.seed, "global seed");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    };
    auto* gen = app.add_subcommand("generate", "draw synthetic observations, models and training shards");
    add_common(gen, true);
    auto* train = app.add_subcommand("train", "train the order/separation network");
    add_common(train, true);
    auto* infer = app.add_subcommand("infer", "predict model order and separated PDPs");
    add_common(infer, false);
    infer->add_option("--weights", flags.weights, "checkpoint directory");
    infer->add_option("--observation", flags.observation, "observation tensor (.dmct)");
    auto* est = app.add_subcommand("estimate", "fit a multi-mode DMC model");
    add_common(est, false);
    est->add_option("--weights", flags.weights, "checkpoint directory");
    est->add_option("--observation", flags.observation, "observation tensor (.dmct)");
    est->add_option("--order", flags.order, "model order; bypasses the network");
    est->add_option("--separations", flags.separations, "separated PDP tensors, one per mode");
    auto* crb = app.add_subcommand("crb", "one-mode vs two-mode CRB mismatch sweep");
    add_common(crb, true);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }
    if (!log_name.empty()) {
        util::LogLevel lvl;
        if (!util::parse_log_level(log_name, lvl)) {
            std::cerr << "dmc: unknown log level '" << log_name << "'\n";
            return kConfigError;
        }
        util::set_log_level(lvl);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    std::optional<Context> ctx;
    try {
        ctx = load_context(command, flags);
        if (command == "generate") return cmd_generate(*ctx);
        if (command == "train") return cmd_train(*ctx);
        if (command == "infer") return cmd_infer(*ctx);
        if (command == "estimate") return cmd_estimate(*ctx);
        return cmd_crb(*ctx);
    } catch (const ConfigError& e) {
        write_diagnostic(ctx ? &*ctx : nullptr, "config", e.what());
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        write_diagnostic(ctx ? &*ctx : nullptr, "config", e.what());
        return kConfigError;
    } catch (const IoError& e) {
        write_diagnostic(ctx ? &*ctx : nullptr, "io", e.what());
        return kIoError;
    } catch (const NumericalError& e) {
        write_diagnostic(ctx ? &*ctx : nullptr, "numerical", e.what());
        return kNumericalError;
    } catch (const std::exception& e) {
        write_diagnostic(ctx ? &*ctx : nullptr, "io", e.what());
        return kIoError;
    }
}

}  // namespace dmc::cli
