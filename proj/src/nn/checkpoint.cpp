// SPDX-License-Identifier: Apache-2.0

#include "dmc/nn/checkpoint.hpp"

#include "dmc/errors.hpp"
#include "dmc/io/json_io.hpp"
#include "dmc/io/tensor_file.hpp"

#include <map>

namespace dmc::nn {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "dmc-checkpoint";
constexpr int kVersion = 1;

std::string file_name(const std::string& prefix, const std::string& name) {
    std::string out = prefix;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_') ? c : '_';
    return out + ".dmct";
}

io::RealTensor as_tensor(const Param& p, const Eigen::VectorXd& v) {
    io::RealTensor t;
    for (int d : p.shape) t.dims.push_back(static_cast<std::uint64_t>(d));
    t.data.assign(v.data(), v.data() + v.size());
    return t;
}

Eigen::VectorXd read_into(const fs::path& path, const Param& p) {
    const auto t = io::read_real_tensor(path);
    std::vector<std::uint64_t> dims;
    for (int d : p.shape) dims.push_back(static_cast<std::uint64_t>(d));
    if (t.dims != dims) throw IoError("shape mismatch for " + p.name + " in " + path.string());
    return Eigen::Map<const Eigen::VectorXd>(t.data.data(), static_cast<Eigen::Index>(t.data.size()));
}

}  // namespace

void save_checkpoint(const fs::path& dir, Network& net, Adam* adam, std::int64_t step, const nlohmann::json& extra) {
    const fs::path tmp = dir.string() + ".tmp";
    std::error_code ec;
    fs::remove_all(tmp, ec);
    fs::create_directories(tmp, ec);
    if (ec) throw IoError("cannot create " + tmp.string() + ": " + ec.message());

    nlohmann::json tensors = nlohmann::json::array();
    for (auto* p : net.params()) {
        const auto f = file_name("param.", p->name);
        io::write_tensor(tmp / f, as_tensor(*p, p->value));
        tensors.push_back({{"name", p->name}, {"file", f}, {"trainable", p->trainable}});
    }
    nlohmann::json manifest = {{"format", kFormat}, {"version", kVersion}, {"net_config", to_json(net.config())},
                               {"step", step},      {"tensors", tensors},  {"extra", extra}};
    if (adam != nullptr) {
        nlohmann::json moments = nlohmann::json::array();
        auto& m = adam->first_moments();
        auto& v = adam->second_moments();
        const auto& ps = adam->trainable();
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const auto fm = file_name("adam_m.", ps[i]->name);
            const auto fv = file_name("adam_v.", ps[i]->name);
            io::write_tensor(tmp / fm, as_tensor(*ps[i], m[i]));
            io::write_tensor(tmp / fv, as_tensor(*ps[i], v[i]));
            moments.push_back({{"name", ps[i]->name}, {"m", fm}, {"v", fv}});
        }
        manifest["optimizer"] = {{"kind", "adam"}, {"t", adam->steps()}, {"moments", moments}};
    }
    io::write_json(tmp / "manifest.json", manifest);

    fs::remove_all(dir, ec);
    fs::rename(tmp, dir, ec);
    if (ec) throw IoError("cannot move checkpoint into " + dir.string() + ": " + ec.message());
}

nlohmann::json read_manifest(const fs::path& dir) {
    const auto j = io::read_json(dir / "manifest.json");
    if (!j.is_object() || j.value("format", "") != kFormat || j.value("version", 0) != kVersion) {
        throw IoError("not a checkpoint manifest: " + (dir / "manifest.json").string());
    }
    if (!j.contains("net_config") || !j.contains("tensors") || !j.at("tensors").is_array()) {
        throw IoError("incomplete checkpoint manifest in " + dir.string());
    }
    return j;
}

void load_weights(const fs::path& dir, Network& net) {
    const auto j = read_manifest(dir);
    std::map<std::string, std::string> files;
    for (const auto& t : j.at("tensors")) files[t.at("name").get<std::string>()] = t.at("file").get<std::string>();
    for (auto* p : net.params()) {
        const auto it = files.find(p->name);
        if (it == files.end()) throw IoError("checkpoint lacks tensor " + p->name);
        p->value = read_into(dir / it->second, *p);
        p->grad.setZero();
    }
}

std::unique_ptr<Network> load_network(const fs::path& dir) {
    const auto j = read_manifest(dir);
    NetConfig cfg;
    try {
        cfg = net_config_from_json(j.at("net_config"));
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("bad net_config in checkpoint: ") + e.what());
    }
    auto net = std::make_unique<Network>(cfg, 0);
    load_weights(dir, *net);
    return net;
}

void load_optimizer(const fs::path& dir, Adam& adam) {
    const auto j = read_manifest(dir);
    if (!j.contains("optimizer")) throw IoError("checkpoint has no optimizer state");
    const auto& o = j.at("optimizer");
    std::map<std::string, std::pair<std::string, std::string>> files;
    for (const auto& t : o.at("moments")) {
        files[t.at("name").get<std::string>()] = {t.at("m").get<std::string>(), t.at("v").get<std::string>()};
    }
    const auto& ps = adam.trainable();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const auto it = files.find(ps[i]->name);
        if (it == files.end()) throw IoError("checkpoint lacks moments for " + ps[i]->name);
        adam.first_moments()[i] = read_into(dir / it->second.first, *ps[i]);
        adam.second_moments()[i] = read_into(dir / it->second.second, *ps[i]);
    }
    adam.set_steps(o.at("t").get<std::int64_t>());
}

}  // namespace dmc::nn
