#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "keymesh/key.hpp"
#include "keymesh/sha256.hpp"

namespace keymesh {

using NodeId = std::uint32_t;
// Group numbers handed out by tagged nodes; 1-based so that the group key
// h^j(K_r) is always at least one hash away from the root.
using TagId = std::uint32_t;
// Position inside a per-group key pool, 1..M.
using KeyIndex = std::uint32_t;
using Seed = std::uint64_t;

// Precomputed hash-chain values h^(j*stride)(root) so a node does not have
// to walk the whole chain for large tag ids. Built offline, handed to nodes
// for the key generation phase.
class ChainCheckpoints {
public:
    ChainCheckpoints() = default;
    ChainCheckpoints(const Key& root, std::uint32_t stride, TagId max_tag);

    bool empty() const { return entries_.empty(); }
    std::uint32_t stride() const { return stride_; }

    // Largest stored chain position <= j (0 when the walk starts at the root).
    TagId start_position(TagId j) const;
    // Chain value at start_position(j); only valid when start_position(j) > 0.
    const Key& value_at_start(TagId j) const;
    // Number of hash applications group_key() needs for tag j.
    std::uint32_t hops_for(TagId j) const { return j - start_position(j); }

private:
    std::uint32_t stride_ = 0;
    std::vector<Key> entries_; // entries_[i] = h^((i+1)*stride)(root)
};

// h^j(root); throws InvalidTagIdError for j == 0.
Key group_key(TagId j, const Key& root);
Key group_key(TagId j, const Key& root, const ChainCheckpoints& checkpoints);

// Deterministic key-index stream: index_i = 1 + (H(seed_be64 || i_be32) mod m)
// for i = 1..k, the digest read as a big-endian integer. Duplicates are
// retained as drawn.
std::vector<KeyIndex> key_indices(Seed seed, std::uint32_t k, std::uint32_t m);

// Final key of pool position idx in the pool rooted at gk: H(gk || idx_be32).
Key derive_key(const Key& gk, KeyIndex idx);

// Authentication tag for broadcast-phase packets: H(key || message).
Key mac_tag(const Key& key, std::span<const std::uint8_t> message);
bool mac_verify(const Key& key, std::span<const std::uint8_t> message, const Key& tag);

} // namespace keymesh
