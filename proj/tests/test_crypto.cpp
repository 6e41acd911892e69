#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "keymesh/crypto.hpp"
#include "keymesh/errors.hpp"

using namespace keymesh;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (std::getline(in, tok, sep)) {
        out.push_back(tok);
    }
    return out;
}

std::vector<std::vector<std::string>> load_tsv(const std::string& name) {
    std::ifstream in(std::string(KEYMESH_TEST_DATA_DIR) + "/" + name);
    EXPECT_TRUE(in.is_open()) << "missing test vector file " << name;
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            rows.push_back(split(line, '\t'));
        }
    }
    return rows;
}

Key test_root() {
    return key_from_hex("000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f");
}

} // namespace

TEST(Sha256, PublishedVectors) {
    const auto rows = load_tsv("sha256_vectors.tsv");
    ASSERT_FALSE(rows.empty());
    for (const auto& row : rows) {
        ASSERT_EQ(row.size(), 2u);
        const auto msg = from_hex(row[0]);
        EXPECT_EQ(to_hex(sha256(std::span<const std::uint8_t>(msg))), row[1]);
    }
    // the classic one-million-'a' vector, streamed in uneven chunks
    Sha256 h;
    std::string chunk(997, 'a');
    std::size_t fed = 0;
    while (fed < 1000000) {
        const std::size_t take = std::min<std::size_t>(chunk.size(), 1000000 - fed);
        h.update(std::string_view(chunk).substr(0, take));
        fed += take;
    }
    EXPECT_EQ(to_hex(h.finish()),
              "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST(Sha256, DeterministicAndStreamingEquivalence) {
    const std::string msg = "the same input hashes the same way";
    EXPECT_EQ(sha256(msg), sha256(msg));
    Sha256 h;
    h.update(msg.substr(0, 7));
    h.update(msg.substr(7));
    EXPECT_EQ(h.finish(), sha256(msg));
}

TEST(Sha256, NoCollisionsOnShortStringCorpus) {
    // 10^5 distinct short inputs; a single collision would break tuple
    // identification throughout the scheme
    std::vector<Key> digests;
    digests.reserve(100000);
    for (int i = 0; i < 100000; ++i) {
        digests.push_back(sha256("case-" + std::to_string(i)));
    }
    std::sort(digests.begin(), digests.end());
    EXPECT_EQ(std::adjacent_find(digests.begin(), digests.end()), digests.end());
}

TEST(GroupKey, MatchesChainDefinition) {
    const Key root = test_root();
    EXPECT_EQ(group_key(1, root), sha256(std::span<const std::uint8_t>(root.bytes)));
    const Key h1 = sha256(std::span<const std::uint8_t>(root.bytes));
    EXPECT_EQ(group_key(2, root), sha256(std::span<const std::uint8_t>(h1.bytes)));
}

TEST(GroupKey, RejectsTagZero) {
    EXPECT_THROW(group_key(0, test_root()), InvalidTagIdError);
}

TEST(GroupKey, FrozenVectors) {
    for (const auto& row : load_tsv("kdf_vectors.tsv")) {
        if (row[0] != "group_key") continue;
        ASSERT_EQ(row.size(), 4u);
        const Key root = key_from_hex(row[1]);
        const auto j = TagId(std::stoul(row[2]));
        EXPECT_EQ(to_hex(group_key(j, root)), row[3]) << "j=" << j;
    }
}

TEST(ChainCheckpoints, RejectsZeroStride) {
    EXPECT_THROW(ChainCheckpoints(test_root(), 0, 100), ConfigError);
}

TEST(ChainCheckpoints, EqualsDirectChain) {
    const Key root = test_root();
    for (std::uint32_t stride : {1u, 7u, 50u}) {
        const ChainCheckpoints cp(root, stride, 200);
        for (TagId j : {1u, 2u, 6u, 7u, 8u, 49u, 50u, 51u, 149u, 200u, 230u}) {
            EXPECT_EQ(group_key(j, root, cp), group_key(j, root))
                << "stride=" << stride << " j=" << j;
        }
    }
}

TEST(ChainCheckpoints, AmortizedHashCountNearTwentyFive) {
    // 1800 tags, stride 50: about 25 hash applications per lookup on average
    const ChainCheckpoints cp(test_root(), 50, 1800);
    double total = 0;
    for (TagId j = 1; j <= 1800; ++j) {
        total += cp.hops_for(j);
        EXPECT_LT(cp.hops_for(j), 50u);
    }
    const double mean = total / 1800.0;
    EXPECT_NEAR(mean, 25.0, 1.0);
}

TEST(KeyIndices, FrozenVectors) {
    for (const auto& row : load_tsv("kdf_vectors.tsv")) {
        if (row[0] != "key_indices") continue;
        ASSERT_EQ(row.size(), 5u);
        const auto seed = Seed(std::stoull(row[1]));
        const auto k = std::uint32_t(std::stoul(row[2]));
        const auto m = std::uint32_t(std::stoul(row[3]));
        std::vector<KeyIndex> expected;
        for (const auto& tok : split(row[4], ',')) {
            expected.push_back(KeyIndex(std::stoul(tok)));
        }
        EXPECT_EQ(key_indices(seed, k, m), expected) << "seed=" << seed;
    }
}

TEST(KeyIndices, PureFunctionOfArguments) {
    EXPECT_EQ(key_indices(42, 20, 1000), key_indices(42, 20, 1000));
    EXPECT_EQ(key_indices(7, 1, 1), std::vector<KeyIndex>{1});
}

TEST(KeyIndices, RangeAndUniformity) {
    // seed 0, 10^5 draws over 1000 bins: every bin within 5 sigma of the
    // uniform expectation, and the chi-square statistic in its 5-sigma band
    constexpr std::uint32_t kDraws = 100000;
    constexpr std::uint32_t kBins = 1000;
    const auto idx = key_indices(0, kDraws, kBins);
    std::vector<std::uint32_t> counts(kBins + 1, 0);
    for (KeyIndex i : idx) {
        ASSERT_GE(i, 1u);
        ASSERT_LE(i, kBins);
        counts[i] += 1;
    }
    const double expect = double(kDraws) / kBins;
    const double sigma = std::sqrt(expect * (1.0 - 1.0 / kBins));
    double chi2 = 0.0;
    for (std::uint32_t b = 1; b <= kBins; ++b) {
        EXPECT_NEAR(double(counts[b]), expect, 5.0 * sigma) << "bin " << b;
        chi2 += (counts[b] - expect) * (counts[b] - expect) / expect;
    }
    const double dof = kBins - 1;
    EXPECT_NEAR(chi2, dof, 5.0 * std::sqrt(2.0 * dof));
}

TEST(DeriveKey, FrozenVectors) {
    for (const auto& row : load_tsv("kdf_vectors.tsv")) {
        if (row[0] != "derive_key") continue;
        ASSERT_EQ(row.size(), 4u);
        EXPECT_EQ(to_hex(derive_key(key_from_hex(row[1]), KeyIndex(std::stoul(row[2])))),
                  row[3]);
    }
}

TEST(DeriveKey, PoolsOfDistinctGroupsAreDisjoint) {
    // 50 groups x 100 indices: every derived key distinct
    const Key root = test_root();
    std::set<Key> pool_union;
    for (TagId j = 1; j <= 50; ++j) {
        const Key gk = group_key(j, root);
        for (KeyIndex i = 1; i <= 100; ++i) {
            EXPECT_TRUE(pool_union.insert(derive_key(gk, i)).second)
                << "duplicate key at group " << j << " index " << i;
        }
    }
    EXPECT_EQ(pool_union.size(), 5000u);
}

TEST(DeriveKey, CheckpointPathEqualsDirectPath) {
    const Key root = test_root();
    const ChainCheckpoints cp(root, 50, 1800);
    for (TagId j : {3u, 50u, 777u, 1800u}) {
        EXPECT_EQ(derive_key(group_key(j, root, cp), 12),
                  derive_key(group_key(j, root), 12));
    }
}

TEST(MacTag, FrozenVectors) {
    for (const auto& row : load_tsv("kdf_vectors.tsv")) {
        if (row[0] != "mac") continue;
        ASSERT_EQ(row.size(), 4u);
        const Key key = key_from_hex(row[1]);
        const auto msg = from_hex(row[2]);
        EXPECT_EQ(to_hex(mac_tag(key, std::span<const std::uint8_t>(msg))), row[3]);
    }
}

TEST(MacTag, AcceptsUntamperedRejectsModified) {
    const Key key = sha256("packet key");
    std::vector<std::uint8_t> msg = {1, 2, 3, 4, 5, 6, 7, 8};
    const Key tag = mac_tag(key, std::span<const std::uint8_t>(msg));
    EXPECT_TRUE(mac_verify(key, std::span<const std::uint8_t>(msg), tag));

    auto tampered = msg;
    tampered[3] ^= 0x01; // single flipped bit
    EXPECT_FALSE(mac_verify(key, std::span<const std::uint8_t>(tampered), tag));
}

TEST(MacTag, WrongKeyRejectsWholeCorpus) {
    const Key key = sha256("right key");
    const Key wrong = sha256("wrong key");
    for (int i = 0; i < 500; ++i) {
        const std::string payload = "packet payload #" + std::to_string(i);
        const std::span<const std::uint8_t> bytes(
            reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size());
        const Key tag = mac_tag(key, bytes);
        EXPECT_TRUE(mac_verify(key, bytes, tag));
        EXPECT_FALSE(mac_verify(wrong, bytes, tag));
    }
}

TEST(KeyHelpers, XorAndHexRoundTrip) {
    const Key a = sha256("a");
    const Key b = sha256("b");
    const Key x = xor_keys(a, b);
    EXPECT_EQ(xor_keys(x, b), a);
    EXPECT_EQ(key_from_hex(to_hex(a)), a);
    Key z = a;
    secure_erase(z);
    EXPECT_EQ(z, Key{});
}
