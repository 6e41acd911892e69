#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace keymesh {

// Hash output width c = 256 bits; every key in the system is one digest wide.
inline constexpr std::size_t kKeyBytes = 32;

struct Key {
    std::array<std::uint8_t, kKeyBytes> bytes{};

    auto operator<=>(const Key&) const = default;
    bool operator==(const Key&) const = default;
};

Key xor_keys(const Key& a, const Key& b);

// Overwrites the key material before the object is reused or dropped.
void secure_erase(Key& k);

std::string to_hex(std::span<const std::uint8_t> data);
std::string to_hex(const Key& k);
std::vector<std::uint8_t> from_hex(std::string_view hex);
Key key_from_hex(std::string_view hex);

} // namespace keymesh
