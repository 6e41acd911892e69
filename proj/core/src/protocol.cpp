#include "keymesh/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>
#include <queue>

#include "keymesh/errors.hpp"
#include "keymesh/rng.hpp"

namespace keymesh {

namespace {

constexpr std::uint64_t kStreamGlobalKey = 11;
constexpr std::uint64_t kStreamRootKey = 12;

// The network simulation stores every chain value; unit tests exercise the
// sparse-checkpoint path separately.
constexpr std::uint32_t kNetworkCheckpointStride = 1;

Key key_from_rng(std::uint64_t seed) {
    Rng rng(seed);
    Key k;
    for (std::size_t i = 0; i < kKeyBytes; i += 8) {
        const std::uint64_t w = rng.next_u64();
        for (std::size_t b = 0; b < 8; ++b) {
            k.bytes[i + b] = std::uint8_t(w >> (8 * b));
        }
    }
    return k;
}

} // namespace

Seed seed_base_for(NodeId u, std::uint32_t t_key) {
    return Seed(t_key) * u;
}

Seed rescue_seed_base_for(NodeId u, std::uint32_t t_key, std::uint32_t n_nodes) {
    return Seed(t_key) * (Seed(n_nodes) + 1 + u);
}

const Key& NodeState::global_key() const {
    if (!global_key_) {
        throw InvalidStageError("node holds no global key");
    }
    return *global_key_;
}

void NodeState::install_predeployment_keys(const Key& global_key, const Key& root_key) {
    if (stage_ != Stage::predeployed) {
        throw InvalidStageError("predeployment keys can only be installed before broadcast");
    }
    global_key_ = global_key;
    root_key_ = root_key;
}

void NodeState::receive_tag(TagId j) {
    if (stage_ != Stage::predeployed) {
        throw InvalidStageError("broadcast reception after the broadcast phase ended");
    }
    auto it = std::lower_bound(b_.begin(), b_.end(), j);
    if (it == b_.end() || *it != j) {
        b_.insert(it, j);
    }
}

void NodeState::finish_broadcast(std::uint32_t t_key) {
    if (stage_ != Stage::predeployed) {
        throw InvalidStageError("broadcast phase already finished");
    }
    t_sel_ = select_groups(b_, t_key);
    stage_ = Stage::broadcast_done;
}

void NodeState::mark_discovered() {
    if (stage_ != Stage::keys_generated) {
        throw InvalidStageError("discovery requires generated keys");
    }
    stage_ = Stage::discovered;
}

void NodeState::install_rescue(TagId group, std::vector<RingEntry> entries, Seed seed_base) {
    if (stage_ < Stage::keys_generated) {
        throw InvalidStageError("rescue happens after network-wide key generation");
    }
    if (!ring_.empty()) {
        throw InvalidStageError("rescue target already holds keys");
    }
    b_.assign(1, group);
    t_sel_.assign(1, group);
    ring_ = std::move(entries);
    seed_base_ = seed_base;
    rescued_ = true;
}

std::vector<TagId> select_groups(std::vector<TagId> b, std::uint32_t t_key) {
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    if (b.size() > t_key) {
        b.resize(t_key);
    }
    return b;
}

std::vector<std::pair<TagId, KeyIndex>> pair_tuples(
    const std::vector<TagId>& groups_ascending,
    const std::vector<std::vector<KeyIndex>>& index_sets) {
    if (groups_ascending.size() != index_sets.size()) {
        throw ConfigError("pair_tuples: one index set per group required");
    }
    std::vector<std::pair<TagId, KeyIndex>> tuples;
    for (std::size_t s = 0; s < groups_ascending.size(); ++s) {
        for (KeyIndex idx : index_sets[s]) {
            tuples.emplace_back(groups_ascending[s], idx);
        }
    }
    return tuples;
}

void generate_ring(NodeState& node, const ChainCheckpoints& checkpoints,
                   std::uint32_t k, std::uint32_t m, std::uint32_t t_key) {
    if (node.stage_ != Stage::broadcast_done) {
        throw InvalidStageError("key generation requires a finished broadcast phase (once)");
    }
    if (!node.root_key_) {
        throw InvalidStageError("key generation requires the root key");
    }

    node.seed_base_ = seed_base_for(node.id_, t_key);
    node.ring_.clear();
    node.ring_.reserve(std::size_t(k) * node.t_sel_.size());
    node.group_keys_.reserve(node.t_sel_.size());

    for (std::size_t s = 0; s < node.t_sel_.size(); ++s) {
        const TagId j = node.t_sel_[s];
        node.group_keys_.push_back(group_key(j, *node.root_key_, checkpoints));
        const Key& gk = node.group_keys_.back();
        for (KeyIndex idx : key_indices(node.seed_base_ + s + 1, k, m)) {
            node.ring_.push_back({j, idx, derive_key(gk, idx)});
        }
    }

    // zeroization: the root key and all group keys leave memory here
    for (Key& gk : node.group_keys_) {
        secure_erase(gk);
    }
    node.group_keys_.clear();
    secure_erase(*node.root_key_);
    node.root_key_.reset();
    node.stage_ = Stage::keys_generated;
}

DiscoveryMessage discovery_message(const NodeState& node) {
    if (node.stage() < Stage::keys_generated) {
        throw InvalidStageError("discovery message requires generated keys");
    }
    return {node.id(), node.selected_groups(), node.rescued()};
}

std::string encode_discovery(const DiscoveryMessage& msg) {
    std::string out = "u:" + std::to_string(msg.node_id) + ";T:";
    for (std::size_t i = 0; i < msg.groups.size(); ++i) {
        if (i > 0) {
            out.push_back(',');
        }
        out += std::to_string(msg.groups[i]);
    }
    if (msg.rescued) {
        out += ";R:1";
    }
    return out;
}

namespace {

std::uint64_t parse_u64(std::string_view text) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw IoError("bad integer in discovery message");
    }
    return value;
}

} // namespace

DiscoveryMessage parse_discovery(std::string_view text) {
    if (!text.starts_with("u:")) {
        throw IoError("discovery message must start with u:");
    }
    text.remove_prefix(2);
    const auto semi = text.find(';');
    if (semi == std::string_view::npos) {
        throw IoError("discovery message missing T field");
    }
    DiscoveryMessage msg;
    msg.node_id = NodeId(parse_u64(text.substr(0, semi)));
    text.remove_prefix(semi + 1);
    if (!text.starts_with("T:")) {
        throw IoError("discovery message missing T field");
    }
    text.remove_prefix(2);
    std::string_view tags = text;
    const auto extra = text.find(';');
    if (extra != std::string_view::npos) {
        tags = text.substr(0, extra);
        const auto rest = text.substr(extra + 1);
        if (rest == "R:1") {
            msg.rescued = true;
        } else {
            throw IoError("unknown discovery message field");
        }
    }
    while (!tags.empty()) {
        const auto comma = tags.find(',');
        const auto tok = tags.substr(0, comma);
        msg.groups.push_back(TagId(parse_u64(tok)));
        if (comma == std::string_view::npos) {
            break;
        }
        tags.remove_prefix(comma + 1);
    }
    if (!std::is_sorted(msg.groups.begin(), msg.groups.end())) {
        throw IoError("discovery message tags must be ascending");
    }
    return msg;
}

const std::vector<KeyIndex>& IndexCache::get(Seed seed, std::uint32_t k, std::uint32_t m) {
    auto it = lists_.find(seed);
    if (it == lists_.end()) {
        it = lists_.emplace(seed, key_indices(seed, k, m)).first;
    }
    return it->second;
}

std::optional<LinkKey> discover_shared(const NodeState& v, const DiscoveryMessage& msg,
                                       std::uint32_t k, std::uint32_t m,
                                       std::uint32_t t_key, std::uint32_t n_nodes,
                                       IndexCache* cache) {
    if (v.stage() < Stage::keys_generated) {
        throw InvalidStageError("shared-key discovery requires generated keys");
    }
    const auto& own = v.selected_groups();
    const auto& theirs = msg.groups;
    if (own.empty() || theirs.empty()) {
        return std::nullopt;
    }

    const Seed sender_base = msg.rescued
                                 ? rescue_seed_base_for(msg.node_id, t_key, n_nodes)
                                 : seed_base_for(msg.node_id, t_key);

    LinkKey link;
    link.node_a = std::min(v.id(), msg.node_id);
    link.node_b = std::max(v.id(), msg.node_id);
    Key acc{};
    bool any = false;

    // walk the two ascending group lists; ranks are 1-based positions
    std::size_t a = 0, b = 0;
    IndexCache local_cache;
    IndexCache& idx_cache = cache ? *cache : local_cache;
    while (a < theirs.size() && b < own.size()) {
        if (theirs[a] < own[b]) {
            ++a;
        } else if (own[b] < theirs[a]) {
            ++b;
        } else {
            const TagId tag = own[b];
            const auto& sender_idx =
                idx_cache.get(sender_base + a + 1, k, m);
            // receiver's slot b+1 values live in its ring at [b*k, (b+1)*k)
            if (v.ring().size() < (b + 1) * std::size_t(k)) {
                throw InvalidStageError("ring shorter than its selected groups imply");
            }
            const auto slot_begin = v.ring().begin() + std::ptrdiff_t(b * k);
            std::vector<KeyIndex> sorted_sender(sender_idx);
            std::sort(sorted_sender.begin(), sorted_sender.end());
            for (std::uint32_t e = 0; e < k; ++e) {
                const RingEntry& entry = *(slot_begin + e);
                if (!std::binary_search(sorted_sender.begin(), sorted_sender.end(),
                                        entry.key_index)) {
                    continue;
                }
                const auto tuple = std::make_pair(tag, entry.key_index);
                if (std::find(link.shared_tuples.begin(), link.shared_tuples.end(), tuple) !=
                    link.shared_tuples.end()) {
                    continue; // duplicate draw inside the slot
                }
                link.shared_tuples.push_back(tuple);
                acc = xor_keys(acc, entry.key);
                any = true;
            }
            ++a;
            ++b;
        }
    }
    if (!any) {
        return std::nullopt;
    }
    std::sort(link.shared_tuples.begin(), link.shared_tuples.end());
    link.key = acc;
    return link;
}

BroadcastPacket make_broadcast_packet(TagId j, std::uint8_t ttl, const Key& global_key) {
    std::uint8_t payload[4] = {std::uint8_t(j >> 24), std::uint8_t(j >> 16),
                               std::uint8_t(j >> 8), std::uint8_t(j)};
    return {j, ttl, mac_tag(global_key, payload)};
}

bool accept_broadcast(NodeState& node, const BroadcastPacket& pkt, const Key& global_key) {
    std::uint8_t payload[4] = {std::uint8_t(pkt.tag_id >> 24), std::uint8_t(pkt.tag_id >> 16),
                               std::uint8_t(pkt.tag_id >> 8), std::uint8_t(pkt.tag_id)};
    if (!mac_verify(global_key, payload, pkt.mac)) {
        return false;
    }
    node.receive_tag(pkt.tag_id);
    return true;
}

namespace {

Network assemble_network(Deployment dep, SimConfig resolved, std::uint64_t rng_seed) {
    Network net{
        .config = resolved,
        .deployment = std::move(dep),
        .states = {},
        .flood = {},
        .global_key = key_from_rng(substream_seed(rng_seed, kStreamGlobalKey)),
        .root_key = key_from_rng(substream_seed(rng_seed, kStreamRootKey)),
        .checkpoints = {},
        .packets_accepted = 0,
        .packets_rejected = 0,
    };
    net.checkpoints = ChainCheckpoints(net.root_key, kNetworkCheckpointStride,
                                       net.deployment.tagged_count());
    const std::uint32_t n = net.deployment.size();
    net.states.reserve(n);
    for (NodeId u = 0; u < n; ++u) {
        net.states.emplace_back(u);
        net.states.back().install_predeployment_keys(net.global_key, net.root_key);
    }
    return net;
}

} // namespace

Network make_network(const SimConfig& cfg, std::uint64_t rng_seed) {
    SimConfig resolved = cfg;
    resolved.tagged = resolve_tagged(cfg);
    resolved.rng_seed = rng_seed;
    return assemble_network(Deployment::random(resolved, rng_seed), resolved, rng_seed);
}

Network make_network_on(Deployment dep, const SimConfig& cfg, std::uint64_t rng_seed) {
    SimConfig resolved = cfg;
    resolved.side = dep.side();
    resolved.radio_r = dep.radio_r();
    resolved.n_nodes = dep.size();
    resolved.tagged = dep.tagged_count();
    resolved.rng_seed = rng_seed;
    return assemble_network(std::move(dep), resolved, rng_seed);
}

void run_broadcast_phase(Network& net) {
    net.flood = flood(net.deployment, net.config.hops);

    // one authenticated packet per tag; every reception verifies the MAC
    std::vector<BroadcastPacket> packets;
    packets.reserve(net.deployment.tagged_count());
    for (TagId j = 1; j <= net.deployment.tagged_count(); ++j) {
        packets.push_back(
            make_broadcast_packet(j, std::uint8_t(net.config.hops), net.global_key));
    }

    for (NodeId u = 0; u < net.states.size(); ++u) {
        NodeState& st = net.states[u];
        for (TagId j : net.flood.b_sets[u]) {
            if (net.deployment.node_of_tag(j) == u) {
                st.receive_tag(j); // its own broadcast, no packet involved
                continue;
            }
            if (accept_broadcast(st, packets[j - 1], st.global_key())) {
                net.packets_accepted += 1;
            } else {
                net.packets_rejected += 1;
            }
        }
        st.finish_broadcast(net.config.t_key);
    }
}

void run_key_generation(Network& net) {
    for (NodeState& st : net.states) {
        generate_ring(st, net.checkpoints, net.config.keys_per_group, net.config.pool_m,
                      net.config.t_key);
    }
}

Network run_protocol(const SimConfig& cfg, std::uint64_t rng_seed) {
    Network net = make_network(cfg, rng_seed);
    run_broadcast_phase(net);
    run_key_generation(net);
    return net;
}

Network run_protocol_on(Deployment dep, const SimConfig& cfg, std::uint64_t rng_seed) {
    Network net = make_network_on(std::move(dep), cfg, rng_seed);
    run_broadcast_phase(net);
    run_key_generation(net);
    return net;
}

std::vector<NodeId> rescue_uncovered(Network& net) {
    std::vector<NodeId> rescued;
    const std::uint32_t n = net.deployment.size();
    for (NodeId u = 0; u < n; ++u) {
        NodeState& st = net.states[u];
        if (!st.ring().empty() || st.stage() < Stage::keys_generated) {
            continue;
        }
        // smallest group selected by any radio neighbor
        TagId group = 0;
        for (NodeId v : net.deployment.neighbors(u)) {
            const auto& sel = net.states[v].selected_groups();
            if (!sel.empty() && (group == 0 || sel.front() < group)) {
                group = sel.front();
            }
        }
        if (group == 0) {
            continue; // no keyed neighbor; stays isolated
        }
        const Seed base = rescue_seed_base_for(u, net.config.t_key, n);
        const Key gk = group_key(group, net.root_key, net.checkpoints);
        std::vector<RingEntry> entries;
        entries.reserve(net.config.keys_per_group);
        for (KeyIndex idx :
             key_indices(base + 1, net.config.keys_per_group, net.config.pool_m)) {
            entries.push_back({group, idx, derive_key(gk, idx)});
        }
        st.install_rescue(group, std::move(entries), base);
        rescued.push_back(u);
    }
    return rescued;
}

NodeId add_node(Network& net, Vec2 position) {
    const NodeId u = net.deployment.add_position(position);
    NodeState st(u);
    st.install_predeployment_keys(net.global_key, net.root_key);

    // tagged nodes re-broadcast: collect tags within H hops of the new node
    std::vector<TagId> tags;
    {
        const std::uint32_t n = net.deployment.size();
        std::vector<std::uint8_t> seen(n, 0);
        std::vector<NodeId> frontier{u}, next;
        seen[u] = 1;
        for (std::uint32_t d = 1; d <= net.config.hops && !frontier.empty(); ++d) {
            next.clear();
            for (NodeId w : frontier) {
                for (NodeId v : net.deployment.neighbors(w)) {
                    if (!seen[v]) {
                        seen[v] = 1;
                        next.push_back(v);
                    }
                }
            }
            frontier.swap(next);
        }
        for (NodeId v = 0; v < n; ++v) {
            if (seen[v] && net.deployment.is_tagged(v)) {
                tags.push_back(net.deployment.tag_of(v));
            }
        }
        std::sort(tags.begin(), tags.end());
    }

    for (TagId j : tags) {
        const auto pkt = make_broadcast_packet(j, std::uint8_t(net.config.hops), net.global_key);
        if (accept_broadcast(st, pkt, st.global_key())) {
            net.packets_accepted += 1;
        } else {
            net.packets_rejected += 1;
        }
    }
    st.finish_broadcast(net.config.t_key);
    generate_ring(st, net.checkpoints, net.config.keys_per_group, net.config.pool_m,
                  net.config.t_key);

    net.flood.b_sets.push_back(st.received_tags());
    net.states.push_back(std::move(st));
    return u;
}

std::pair<std::uint64_t, std::uint64_t> count_setup_broadcasts(const Deployment& dep,
                                                               std::uint32_t hops) {
    return {flood(dep, hops).transmissions, dep.size()};
}

void dump_rings_csv(const std::vector<NodeState>& states, std::ostream& out) {
    out << "node_id,tag_id,key_index,key_hex\n";
    for (const NodeState& st : states) {
        for (const RingEntry& e : st.ring()) {
            out << st.id() << ',' << e.tag_id << ',' << e.key_index << ','
                << to_hex(e.key) << '\n';
        }
    }
}

void dump_discovery_transcripts(const std::vector<NodeState>& states, std::ostream& out) {
    for (const NodeState& st : states) {
        out << encode_discovery(discovery_message(st)) << '\n';
    }
}

} // namespace keymesh
