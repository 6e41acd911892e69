#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "keymesh/key.hpp"

namespace keymesh {

// SHA-256 (FIPS 180-4). Streaming interface plus one-shot helpers.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    Sha256& update(std::span<const std::uint8_t> data);
    Sha256& update(std::string_view data);
    Key finish();

private:
    void compress(const std::uint8_t* block);

    std::uint32_t state_[8];
    std::uint8_t buffer_[64];
    std::uint64_t total_len_ = 0;
    std::size_t buffer_len_ = 0;
};

Key sha256(std::span<const std::uint8_t> data);
Key sha256(std::string_view data);

} // namespace keymesh
