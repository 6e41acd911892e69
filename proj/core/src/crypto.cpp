#include "keymesh/crypto.hpp"

#include "keymesh/errors.hpp"

namespace keymesh {

namespace {

void put_be32(std::uint8_t* p, std::uint32_t v) {
    p[0] = std::uint8_t(v >> 24);
    p[1] = std::uint8_t(v >> 16);
    p[2] = std::uint8_t(v >> 8);
    p[3] = std::uint8_t(v);
}

void put_be64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        p[i] = std::uint8_t(v >> (56 - 8 * i));
    }
}

// Digest read as a big-endian integer, reduced mod m. Horner over the bytes
// keeps the accumulator below m * 256 <= 2^40.
std::uint32_t digest_mod(const Key& digest, std::uint32_t m) {
    std::uint64_t acc = 0;
    for (std::uint8_t b : digest.bytes) {
        acc = ((acc << 8) | b) % m;
    }
    return std::uint32_t(acc);
}

} // namespace

ChainCheckpoints::ChainCheckpoints(const Key& root, std::uint32_t stride, TagId max_tag)
    : stride_(stride) {
    if (stride == 0) {
        throw ConfigError("checkpoint stride must be positive");
    }
    entries_.reserve(max_tag / stride);
    Key current = root;
    for (TagId j = 1; j <= max_tag; ++j) {
        current = sha256(std::span<const std::uint8_t>(current.bytes.data(), kKeyBytes));
        if (j % stride == 0) {
            entries_.push_back(current);
        }
    }
}

TagId ChainCheckpoints::start_position(TagId j) const {
    if (entries_.empty() || stride_ == 0 || j < stride_) {
        return 0;
    }
    const TagId multiples = std::min<TagId>(j / stride_, TagId(entries_.size()));
    return multiples * stride_;
}

const Key& ChainCheckpoints::value_at_start(TagId j) const {
    return entries_[start_position(j) / stride_ - 1];
}

Key group_key(TagId j, const Key& root) {
    static const ChainCheckpoints kNone;
    return group_key(j, root, kNone);
}

Key group_key(TagId j, const Key& root, const ChainCheckpoints& checkpoints) {
    if (j == 0) {
        throw InvalidTagIdError("tag id must be >= 1");
    }
    TagId start = checkpoints.start_position(j);
    Key current = (start > 0) ? checkpoints.value_at_start(j) : root;
    for (TagId step = start; step < j; ++step) {
        current = sha256(std::span<const std::uint8_t>(current.bytes.data(), kKeyBytes));
    }
    return current;
}

std::vector<KeyIndex> key_indices(Seed seed, std::uint32_t k, std::uint32_t m) {
    std::vector<KeyIndex> out;
    out.reserve(k);
    std::uint8_t msg[12];
    put_be64(msg, seed);
    for (std::uint32_t i = 1; i <= k; ++i) {
        put_be32(msg + 8, i);
        const Key digest = sha256(std::span<const std::uint8_t>(msg, sizeof msg));
        out.push_back(1 + digest_mod(digest, m));
    }
    return out;
}

Key derive_key(const Key& gk, KeyIndex idx) {
    std::uint8_t msg[kKeyBytes + 4];
    std::copy(gk.bytes.begin(), gk.bytes.end(), msg);
    put_be32(msg + kKeyBytes, idx);
    return sha256(std::span<const std::uint8_t>(msg, sizeof msg));
}

Key mac_tag(const Key& key, std::span<const std::uint8_t> message) {
    Sha256 h;
    h.update(std::span<const std::uint8_t>(key.bytes.data(), kKeyBytes));
    h.update(message);
    return h.finish();
}

bool mac_verify(const Key& key, std::span<const std::uint8_t> message, const Key& tag) {
    return mac_tag(key, message) == tag;
}

} // namespace keymesh
