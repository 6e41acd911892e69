#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace keymesh {

// Calibrated so that the inter-group planner reproduces the reference
// tagged-node count (1863 for the 1000 m / 10000-node / 40 m / 1-hop setup).
inline constexpr double kDefaultBeta = 0.1054;

// Every experiment parameter. `tagged == 0` means "auto": derive the
// tagged-node count from the coverage and inter-group planners.
struct SimConfig {
    double side = 1000.0;              // square deployment area, A = side^2
    std::uint32_t n_nodes = 10000;     // N
    double radio_r = 40.0;             // unit-disk radius, meters
    std::uint32_t hops = 1;            // broadcast TTL H
    std::uint32_t t_key = 2;           // max groups per node
    std::uint32_t keys_per_group = 20; // k
    std::uint32_t pool_m = 1000;       // per-group pool size M
    double beta = kDefaultBeta;        // isolation-probability parameter
    std::uint32_t tagged = 0;          // T; 0 = auto (planner)
    std::uint64_t rng_seed = 1;

    double area() const { return side * side; }
    bool tagged_auto() const { return tagged == 0; }

    // Throws ConfigError on any violated invariant.
    void validate() const;
};

SimConfig load_config(const std::filesystem::path& path);
SimConfig parse_config(const std::string& json_text);

// Canonical single-line JSON rendering; hashing it gives a stable config id.
std::string canonical_json(const SimConfig& cfg);

} // namespace keymesh
