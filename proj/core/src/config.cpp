#include "keymesh/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "keymesh/errors.hpp"

namespace keymesh {

void SimConfig::validate() const {
    if (!(side > 0.0) || !std::isfinite(side)) {
        throw ConfigError("side must be positive");
    }
    if (!(radio_r > 0.0) || radio_r >= side) {
        throw ConfigError("radio_r must satisfy 0 < r < side");
    }
    if (n_nodes < 1) {
        throw ConfigError("n_nodes must be >= 1");
    }
    if (hops < 1) {
        throw ConfigError("hops must be >= 1");
    }
    if (t_key < 1) {
        throw ConfigError("t_key must be >= 1");
    }
    if (keys_per_group < 1 || keys_per_group > pool_m) {
        throw ConfigError("keys_per_group must satisfy 1 <= k <= pool_m");
    }
    if (!(beta > 0.0)) {
        throw ConfigError("beta must be positive");
    }
    if (!tagged_auto() && tagged >= n_nodes) {
        throw ConfigError("tagged must satisfy 1 <= T < n_nodes");
    }
}

namespace {

using nlohmann::json;

SimConfig from_json(const json& j) {
    SimConfig cfg;
    try {
        cfg.side = j.at("side").get<double>();
        cfg.n_nodes = j.at("n_nodes").get<std::uint32_t>();
        cfg.radio_r = j.at("radio_r").get<double>();
        cfg.hops = j.at("hops").get<std::uint32_t>();
        cfg.t_key = j.at("t_key").get<std::uint32_t>();
        cfg.keys_per_group = j.at("keys_per_group").get<std::uint32_t>();
        cfg.pool_m = j.at("pool_m").get<std::uint32_t>();
        if (j.contains("beta")) {
            cfg.beta = j.at("beta").get<double>();
        }
        const auto& tagged = j.at("tagged");
        if (tagged.is_string()) {
            if (tagged.get<std::string>() != "auto") {
                throw ConfigError("tagged must be an integer or \"auto\"");
            }
            cfg.tagged = 0;
        } else {
            cfg.tagged = tagged.get<std::uint32_t>();
            if (cfg.tagged == 0) {
                throw ConfigError("tagged must be >= 1 (use \"auto\" to plan it)");
            }
        }
        cfg.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

SimConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return from_json(j);
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string canonical_json(const SimConfig& cfg) {
    std::ostringstream out;
    out << "{\"beta\":" << format_double(cfg.beta)
        << ",\"hops\":" << cfg.hops
        << ",\"keys_per_group\":" << cfg.keys_per_group
        << ",\"n_nodes\":" << cfg.n_nodes
        << ",\"pool_m\":" << cfg.pool_m
        << ",\"radio_r\":" << format_double(cfg.radio_r)
        << ",\"rng_seed\":" << cfg.rng_seed
        << ",\"side\":" << format_double(cfg.side)
        << ",\"t_key\":" << cfg.t_key
        << ",\"tagged\":";
    if (cfg.tagged_auto()) {
        out << "\"auto\"";
    } else {
        out << cfg.tagged;
    }
    out << "}";
    return out.str();
}

} // namespace keymesh
