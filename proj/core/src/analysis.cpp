#include "keymesh/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "keymesh/errors.hpp"
#include "keymesh/rng.hpp"

namespace keymesh {

namespace {

std::uint64_t pack_tuple(TagId t, KeyIndex i) {
    return (std::uint64_t(t) << 32) | i;
}

// union-find with path halving
class Dsu {
public:
    explicit Dsu(std::uint32_t n) : parent_(n), size_(n, 1) {
        for (std::uint32_t i = 0; i < n; ++i) parent_[i] = i;
    }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

    std::uint32_t component_size(std::uint32_t x) { return size_[find(x)]; }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> size_;
};

} // namespace

KeyGraph build_key_graph(const Deployment& dep, const std::vector<NodeState>& states,
                         const SimConfig& cfg) {
    KeyGraph graph;
    graph.node_count = dep.size();
    IndexCache cache;
    for (NodeId u = 0; u < dep.size(); ++u) {
        const DiscoveryMessage msg = discovery_message(states[u]);
        for (NodeId v : dep.neighbors(u)) {
            if (v <= u) {
                continue;
            }
            auto link = discover_shared(states[v], msg, cfg.keys_per_group, cfg.pool_m,
                                        cfg.t_key, dep.size(), &cache);
            if (link) {
                graph.edges.push_back({link->node_a, link->node_b,
                                       std::move(link->shared_tuples), link->key});
            }
        }
    }
    return graph;
}

KeyGraph build_key_graph(const Network& net) {
    return build_key_graph(net.deployment, net.states, net.config);
}

double local_connectivity(const KeyGraph& graph, const Deployment& dep) {
    const std::uint64_t pairs = dep.neighbor_pair_count();
    if (pairs == 0) {
        throw UndefinedMetricError("no radio-neighbor pairs in the deployment");
    }
    return double(graph.edges.size()) / double(pairs);
}

double global_connectivity(const KeyGraph& graph) {
    if (graph.node_count == 0) {
        return 0.0;
    }
    Dsu dsu(graph.node_count);
    for (const auto& e : graph.edges) {
        dsu.unite(e.node_a, e.node_b);
    }
    std::uint32_t largest = 1;
    for (std::uint32_t u = 0; u < graph.node_count; ++u) {
        largest = std::max(largest, dsu.component_size(u));
    }
    return 100.0 * double(largest) / double(graph.node_count);
}

GroupGraphReport group_graph_connected(const std::vector<NodeState>& states) {
    TagId max_tag = 0;
    for (const NodeState& st : states) {
        for (TagId t : st.selected_groups()) {
            max_tag = std::max(max_tag, t);
        }
    }
    GroupGraphReport report;
    if (max_tag == 0) {
        report.connected = true; // vacuously: no groups selected
        return report;
    }

    std::vector<std::uint8_t> present(max_tag + 1, 0);
    Dsu dsu(max_tag + 1);
    for (const NodeState& st : states) {
        const auto& sel = st.selected_groups();
        for (TagId t : sel) {
            present[t] = 1;
        }
        for (std::size_t i = 1; i < sel.size(); ++i) {
            dsu.unite(sel[0], sel[i]); // this node gateways all its groups
        }
    }

    std::unordered_set<std::uint32_t> roots;
    for (TagId t = 1; t <= max_tag; ++t) {
        if (present[t]) {
            report.vertex_count += 1;
            roots.insert(dsu.find(t));
            report.largest_component =
                std::max(report.largest_component, dsu.component_size(t));
        }
    }
    report.component_count = std::uint32_t(roots.size());
    report.connected = report.component_count <= 1;
    return report;
}

CaptureReport simulate_capture(const KeyGraph& graph, const std::vector<NodeState>& states,
                               const SimConfig& cfg, std::uint32_t tagged_count,
                               std::uint32_t x, std::uint64_t rng_seed) {
    const auto n = std::uint32_t(states.size());
    if (x > n) {
        throw ConfigError("cannot capture more nodes than deployed");
    }

    CaptureReport report;
    report.captured = x;
    report.ring_size = std::uint64_t(cfg.t_key) * cfg.keys_per_group;
    report.pool_total = std::uint64_t(tagged_count) * cfg.pool_m;
    report.analytic_bound = resilience_bound(report.ring_size, report.pool_total, x);

    // uniform capture draw without replacement
    std::vector<NodeId> ids(n);
    for (std::uint32_t i = 0; i < n; ++i) ids[i] = i;
    Rng rng(rng_seed);
    std::vector<std::uint8_t> captured(n, 0);
    for (std::uint32_t i = 0; i < x; ++i) {
        const auto j = std::uint32_t(i + rng.next_below(n - i));
        std::swap(ids[i], ids[j]);
        captured[ids[i]] = 1;
    }

    std::unordered_set<std::uint64_t> known;
    for (std::uint32_t i = 0; i < x; ++i) {
        for (const RingEntry& e : states[ids[i]].ring()) {
            known.insert(pack_tuple(e.tag_id, e.key_index));
        }
    }

    for (const KeyGraphEdge& edge : graph.edges) {
        if (captured[edge.node_a] || captured[edge.node_b]) {
            continue; // links touching captured nodes are excluded from the metric
        }
        report.eligible_links += 1;
        bool all_known = true;
        for (const auto& [tag, idx] : edge.shared_tuples) {
            if (!known.contains(pack_tuple(tag, idx))) {
                all_known = false;
                break;
            }
        }
        if (all_known) {
            report.compromised_links += 1;
        }
    }
    report.empirical_fraction =
        report.eligible_links == 0
            ? 0.0
            : double(report.compromised_links) / double(report.eligible_links);
    return report;
}

double eg_local_connectivity(std::uint64_t pool_s, std::uint32_t ring_l) {
    if (ring_l == 0) {
        return 0.0;
    }
    if (2ULL * ring_l > pool_s) {
        return 1.0; // two rings cannot fit disjointly
    }
    double log_miss = 0.0;
    for (std::uint64_t i = 0; i < ring_l; ++i) {
        log_miss += std::log(double(pool_s - ring_l - i)) - std::log(double(pool_s - i));
    }
    return 1.0 - std::exp(log_miss);
}

double resilience_bound(std::uint64_t ring_l, std::uint64_t pool_s, std::uint32_t x) {
    if (ring_l == 0 || ring_l > pool_s) {
        throw ConfigError("resilience_bound needs 0 < L <= S");
    }
    return 1.0 - std::pow(1.0 - double(ring_l) / double(pool_s), double(x));
}

std::uint64_t eg_pool_for_connectivity(double target_p, std::uint32_t ring_l) {
    if (ring_l == 0 || !(target_p > 0.0) || target_p > 1.0) {
        throw ConfigError("eg_pool_for_connectivity needs L >= 1 and 0 < p <= 1");
    }
    const std::uint64_t lo_start = 2ULL * ring_l;
    if (eg_local_connectivity(lo_start, ring_l) < target_p) {
        return lo_start; // even the tightest pool cannot reach it
    }
    // p falls as the pool grows; find the largest pool still reaching target_p
    std::uint64_t lo = lo_start, hi = 2 * lo_start + 1;
    while (eg_local_connectivity(hi, ring_l) >= target_p) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (eg_local_connectivity(mid, ring_l) >= target_p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

} // namespace keymesh
