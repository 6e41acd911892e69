#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "keymesh/config.hpp"
#include "keymesh/crypto.hpp"

namespace keymesh {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Node placement plus the unit-disk radio graph. Immutable after
// construction except for add_position(), which appends one node.
class Deployment {
public:
    // N uniform positions, T tagged nodes drawn without replacement;
    // fully reproducible from rng_seed.
    static Deployment random(const SimConfig& cfg, std::uint64_t rng_seed);
    // Hand-built topology for tests and node addition oracles. Tagged ids
    // get tag ids 1..T in ascending node-id order.
    static Deployment from_positions(std::vector<Vec2> positions,
                                     std::vector<NodeId> tagged_nodes,
                                     double radio_r, double side);

    std::uint32_t size() const { return std::uint32_t(positions_.size()); }
    double side() const { return side_; }
    double radio_r() const { return radio_r_; }

    const Vec2& position(NodeId u) const { return positions_[u]; }
    const std::vector<Vec2>& positions() const { return positions_; }

    std::uint32_t tagged_count() const { return std::uint32_t(tagged_nodes_.size()); }
    const std::vector<NodeId>& tagged_nodes() const { return tagged_nodes_; }
    bool is_tagged(NodeId u) const { return tag_of_[u] != 0; }
    // 1..T for tagged nodes, 0 otherwise.
    TagId tag_of(NodeId u) const { return tag_of_[u]; }
    NodeId node_of_tag(TagId j) const { return tagged_nodes_[j - 1]; }

    const std::vector<NodeId>& neighbors(NodeId u) const { return adjacency_[u]; }
    // Unordered radio-neighbor pairs in the whole graph.
    std::uint64_t neighbor_pair_count() const;

    // Appends a node at p (not tagged); rebuilds only its adjacency.
    // Throws ConfigError when p lies outside the deployment square.
    NodeId add_position(Vec2 p);

    // CSV dump: node_id,x,y,is_tagged
    void dump_csv(std::ostream& out) const;

private:
    Deployment() = default;
    void build_adjacency();
    void link_node(NodeId u);

    double side_ = 0.0;
    double radio_r_ = 0.0;
    std::vector<Vec2> positions_;
    std::vector<NodeId> tagged_nodes_; // ascending node ids; index = tag id - 1
    std::vector<TagId> tag_of_;
    std::vector<std::vector<NodeId>> adjacency_;

    // uniform grid with cell size radio_r for neighbor queries
    std::uint32_t grid_cols_ = 0;
    std::vector<std::vector<NodeId>> grid_;
    std::uint32_t cell_of(const Vec2& p) const;
};

struct FloodResult {
    // Per node, ascending tag ids whose broadcast reached it within H hops;
    // a tagged node contains its own tag (distance 0).
    std::vector<std::vector<TagId>> b_sets;
    // Total packet transmissions during the broadcast phase (origins plus
    // every TTL-gated re-broadcast).
    std::uint64_t transmissions = 0;
};

// TTL-scoped flooding from every tagged node over the unit-disk graph.
// A node stores a tag id on first reception only and re-broadcasts while the
// decremented TTL stays positive.
FloodResult flood(const Deployment& dep, std::uint32_t hops);

struct CoverageStats {
    std::uint32_t uncovered_count = 0; // normal nodes with empty B
    double expected_uncovered = 0.0;   // closed-form value at this T
    std::vector<std::uint32_t> groups_per_node_hist; // hist[i] = #nodes with |B| == i
};

CoverageStats coverage_stats(const Deployment& dep, const FloodResult& fr,
                             const SimConfig& cfg);

// (N - n) * exp(-(n / A) * pi * (H r)^2): expected normal nodes missed by
// every broadcast when n tagged nodes are deployed.
double expected_uncovered(const SimConfig& cfg, double n_tagged);

// Threshold radius (unit square) at which the two-type geometric graph on
// n tagged and N - n normal nodes connects with high probability.
double intergroup_threshold_radius(const SimConfig& cfg, double n_tagged);

// Smallest integer n with expected_uncovered(n) <= 1.
std::uint32_t plan_coverage(const SimConfig& cfg);
// Smallest integer n whose threshold radius drops to H*r/side.
std::uint32_t plan_intergroup(const SimConfig& cfg);
// max of the two planners.
std::uint32_t plan_tagged(const SimConfig& cfg);

// Explicit tagged count from the config, or the planned one when auto.
std::uint32_t resolve_tagged(const SimConfig& cfg);

} // namespace keymesh
