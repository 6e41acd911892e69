#include "keymesh/key.hpp"

#include "keymesh/errors.hpp"

namespace keymesh {

Key xor_keys(const Key& a, const Key& b) {
    Key out;
    for (std::size_t i = 0; i < kKeyBytes; ++i) {
        out.bytes[i] = a.bytes[i] ^ b.bytes[i];
    }
    return out;
}

void secure_erase(Key& k) {
    volatile std::uint8_t* p = k.bytes.data();
    for (std::size_t i = 0; i < kKeyBytes; ++i) {
        p[i] = 0;
    }
}

namespace {

char hex_digit(unsigned v) {
    return v < 10 ? char('0' + v) : char('a' + v - 10);
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::string to_hex(std::span<const std::uint8_t> data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(hex_digit(b >> 4));
        out.push_back(hex_digit(b & 0x0f));
    }
    return out;
}

std::string to_hex(const Key& k) {
    return to_hex(std::span<const std::uint8_t>(k.bytes.data(), k.bytes.size()));
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        throw IoError("hex string has odd length");
    }
    std::vector<std::uint8_t> out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = hex_value(hex[i]);
        const int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) {
            throw IoError("invalid hex digit");
        }
        out.push_back(std::uint8_t(hi << 4 | lo));
    }
    return out;
}

Key key_from_hex(std::string_view hex) {
    const auto raw = from_hex(hex);
    if (raw.size() != kKeyBytes) {
        throw IoError("key hex must encode exactly 32 octets");
    }
    Key k;
    std::copy(raw.begin(), raw.end(), k.bytes.begin());
    return k;
}

} // namespace keymesh
