#pragma once

#include <cstdint>
#include <vector>

#include "keymesh/protocol.hpp"

namespace keymesh {

struct KeyGraphEdge {
    NodeId node_a = 0; // < node_b
    NodeId node_b = 0;
    std::vector<std::pair<TagId, KeyIndex>> shared_tuples;
    Key link_key;
};

// Radio-neighbor pairs that completed shared-key discovery. Vertices are all
// node ids, so isolated nodes count against global connectivity.
struct KeyGraph {
    std::uint32_t node_count = 0;
    std::vector<KeyGraphEdge> edges; // (node_a, node_b) lexicographically ascending
};

KeyGraph build_key_graph(const Deployment& dep, const std::vector<NodeState>& states,
                         const SimConfig& cfg);
KeyGraph build_key_graph(const Network& net);

// Fraction of radio-neighbor pairs sharing at least one key.
double local_connectivity(const KeyGraph& graph, const Deployment& dep);

// Percentage of all nodes inside the largest connected component.
double global_connectivity(const KeyGraph& graph);

struct GroupGraphReport {
    bool connected = false;
    std::uint32_t component_count = 0;
    std::uint32_t vertex_count = 0;      // groups selected by at least one node
    std::uint32_t largest_component = 0; // vertices in the biggest component
};

// Group-level reachability: groups are linked when some node selected both
// (that node is the gateway between their disjoint pools).
GroupGraphReport group_graph_connected(const std::vector<NodeState>& states);

struct CaptureReport {
    std::uint32_t captured = 0;          // x
    double empirical_fraction = 0.0;     // compromised / eligible links
    double analytic_bound = 0.0;         // 1 - (1 - L/S)^x
    std::uint64_t eligible_links = 0;    // links between non-captured nodes
    std::uint64_t compromised_links = 0;
    std::uint64_t ring_size = 0;         // L = T_key * k
    std::uint64_t pool_total = 0;        // S = T * M
};

// Captures x uniform nodes; a link between surviving nodes is compromised
// only when the adversary learned every tuple the link key is XORed from.
CaptureReport simulate_capture(const KeyGraph& graph, const std::vector<NodeState>& states,
                               const SimConfig& cfg, std::uint32_t tagged_count,
                               std::uint32_t x, std::uint64_t rng_seed);

// Probability two random L-subsets of an S-key pool intersect (the classic
// random-predistribution sharing probability), evaluated in log space.
double eg_local_connectivity(std::uint64_t pool_s, std::uint32_t ring_l);

// 1 - (1 - L/S)^x
double resilience_bound(std::uint64_t ring_l, std::uint64_t pool_s, std::uint32_t x);

// Largest pool size whose sharing probability still reaches target_p, for a
// fixed ring size (baseline sizing for equal-connectivity comparisons).
std::uint64_t eg_pool_for_connectivity(double target_p, std::uint32_t ring_l);

} // namespace keymesh
