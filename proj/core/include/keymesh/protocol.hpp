#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "keymesh/config.hpp"
#include "keymesh/crypto.hpp"
#include "keymesh/topology.hpp"

namespace keymesh {

enum class Stage {
    predeployed,
    broadcast_done,
    keys_generated,
    discovered,
};

struct RingEntry {
    TagId tag_id = 0;
    KeyIndex key_index = 0;
    Key key;
};

// Seed ranges: node u consumes seeds T_key*u + 1 .. T_key*u + |T_u|. Rescued
// nodes draw from a reserved band past every deployed node's range.
Seed seed_base_for(NodeId u, std::uint32_t t_key);
Seed rescue_seed_base_for(NodeId u, std::uint32_t t_key, std::uint32_t n_nodes);

// Per-node protocol state. Key material lives here only between the phases
// that need it; generate_ring() wipes the root key on completion.
class NodeState {
public:
    explicit NodeState(NodeId id) : id_(id) {}

    NodeId id() const { return id_; }
    Stage stage() const { return stage_; }
    bool rescued() const { return rescued_; }

    const std::vector<TagId>& received_tags() const { return b_; }      // B_u
    const std::vector<TagId>& selected_groups() const { return t_sel_; } // T_u
    const std::vector<RingEntry>& ring() const { return ring_; }

    bool global_key_present() const { return global_key_.has_value(); }
    bool root_key_present() const { return root_key_.has_value(); }
    // True while group keys K_{G_j} sit in memory; must be false from the
    // keys_generated stage onward.
    bool holds_group_keys() const { return !group_keys_.empty(); }

    const Key& global_key() const;
    Seed seed_base() const { return seed_base_; }

    void install_predeployment_keys(const Key& global_key, const Key& root_key);

    // Broadcast phase: store a tag id on first reception.
    void receive_tag(TagId j);
    // Select groups from B and move to broadcast_done.
    void finish_broadcast(std::uint32_t t_key);

    void mark_discovered();

    // Sink-side install path for rescued nodes; keeps T_sel consistent with B.
    void install_rescue(TagId group, std::vector<RingEntry> entries, Seed seed_base);

    friend void generate_ring(NodeState&, const ChainCheckpoints&, std::uint32_t,
                              std::uint32_t, std::uint32_t);

private:
    NodeId id_ = 0;
    Stage stage_ = Stage::predeployed;
    bool rescued_ = false;
    Seed seed_base_ = 0;
    std::vector<TagId> b_;
    std::vector<TagId> t_sel_;
    std::vector<RingEntry> ring_;
    std::optional<Key> global_key_;
    std::optional<Key> root_key_;
    std::vector<Key> group_keys_; // transient during ring generation
};

// The min(T_key, |B|) smallest received tag ids, ascending. Neighbor nodes
// hearing the same tagged nodes then pick the same groups deterministically.
std::vector<TagId> select_groups(std::vector<TagId> b, std::uint32_t t_key);

// Pairing rule: the s-th smallest selected tag id gets the s-th index set.
std::vector<std::pair<TagId, KeyIndex>> pair_tuples(
    const std::vector<TagId>& groups_ascending,
    const std::vector<std::vector<KeyIndex>>& index_sets);

// Key generation phase for one node: derive k keys per selected group from
// the stored root key, then erase the root and every group key.
void generate_ring(NodeState& node, const ChainCheckpoints& checkpoints,
                   std::uint32_t k, std::uint32_t m, std::uint32_t t_key);

struct DiscoveryMessage {
    NodeId node_id = 0;
    std::vector<TagId> groups; // ascending
    bool rescued = false;      // peers derive the seed base from this
};

DiscoveryMessage discovery_message(const NodeState& node);
// Wire form "u:<id>;T:<comma-separated tag ids>", plus ";R:1" for rescued
// nodes.
std::string encode_discovery(const DiscoveryMessage& msg);
DiscoveryMessage parse_discovery(std::string_view text);

struct LinkKey {
    NodeId node_a = 0; // < node_b
    NodeId node_b = 0;
    std::vector<std::pair<TagId, KeyIndex>> shared_tuples; // sorted, distinct
    Key key; // XOR of the final keys of all shared tuples
};

// Memoizes key-index streams by seed so network-wide discovery does not
// recompute the same PRNG output per neighbor pair. Not synchronized; give
// each worker its own instance.
class IndexCache {
public:
    const std::vector<KeyIndex>& get(Seed seed, std::uint32_t k, std::uint32_t m);

private:
    std::unordered_map<Seed, std::vector<KeyIndex>> lists_;
};

// Receiver side of shared-key discovery: v matches msg's groups against its
// own, regenerates the sender's index streams by rank, and XORs the keys of
// every matching tuple. Returns nullopt when no tuple is shared.
std::optional<LinkKey> discover_shared(const NodeState& v, const DiscoveryMessage& msg,
                                       std::uint32_t k, std::uint32_t m,
                                       std::uint32_t t_key, std::uint32_t n_nodes,
                                       IndexCache* cache = nullptr);

struct BroadcastPacket {
    TagId tag_id = 0;
    std::uint8_t ttl = 0;
    Key mac; // over the tag id only; the TTL mutates per hop
};

BroadcastPacket make_broadcast_packet(TagId j, std::uint8_t ttl, const Key& global_key);
// Verifies the MAC before touching state; returns false on mismatch.
bool accept_broadcast(NodeState& node, const BroadcastPacket& pkt, const Key& global_key);

// A fully simulated network. The sink keeps the root key (nodes wipe theirs)
// for rescue and post-deployment node addition.
struct Network {
    SimConfig config; // tagged count materialized
    Deployment deployment;
    std::vector<NodeState> states;
    FloodResult flood;
    Key global_key;
    Key root_key;
    ChainCheckpoints checkpoints;
    std::uint64_t packets_accepted = 0;
    std::uint64_t packets_rejected = 0;
};

Network make_network(const SimConfig& cfg, std::uint64_t rng_seed);
// Wraps a hand-built deployment; geometry fields of cfg are replaced by the
// deployment's own.
Network make_network_on(Deployment dep, const SimConfig& cfg, std::uint64_t rng_seed);
void run_broadcast_phase(Network& net);
void run_key_generation(Network& net);
// deploy + broadcast + key generation in one call
Network run_protocol(const SimConfig& cfg, std::uint64_t rng_seed);
Network run_protocol_on(Deployment dep, const SimConfig& cfg, std::uint64_t rng_seed);

// Sink-mediated rescue of nodes that heard no broadcast: install k keys from
// the pool of the smallest group selected by any radio neighbor, drawn from
// the reserved seed band. Returns the rescued node ids.
std::vector<NodeId> rescue_uncovered(Network& net);

// Post-deployment addition: tagged nodes re-broadcast, the new node builds
// its ring from its own seed range and wipes the root key. Existing rings
// are untouched.
NodeId add_node(Network& net, Vec2 position);

// (flooding transmissions of the broadcast phase, one-broadcast-per-node
// proxy N) - the vulnerable-time comparison metric.
std::pair<std::uint64_t, std::uint64_t> count_setup_broadcasts(const Deployment& dep,
                                                               std::uint32_t hops);

// Ring dump CSV: node_id,tag_id,key_index,key_hex
void dump_rings_csv(const std::vector<NodeState>& states, std::ostream& out);
// One encoded discovery message per line, ascending node id.
void dump_discovery_transcripts(const std::vector<NodeState>& states, std::ostream& out);

} // namespace keymesh
