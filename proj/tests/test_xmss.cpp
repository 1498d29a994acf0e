#include <doctest.h>

#include <random>
#include <stdexcept>

#include "pqbfl/errors.hpp"
#include "pqbfl/xmss.hpp"
#include "support.hpp"

using namespace pqbfl;
using namespace pqbfl::xmss;

namespace {

const Bytes kSecret = test::seed_bytes("sec", 7);
const Bytes kPublic = test::seed_bytes("pub", 7);

// Per leaf: seed (1) + secret chains (len) + full chains (len * (w-1) * 2) + compression (1).
std::uint64_t expected_build_calls(unsigned h) {
    const std::uint64_t len = 67, w = 16;
    const std::uint64_t per_leaf = 1 + len + len * (w - 1) * 2 + 1;
    const std::uint64_t leaves = 1ull << h;
    return leaves * per_leaf + (leaves - 1) + 1;
}

}  // namespace

TEST_CASE("leaf count and exact build cost") {
    for (unsigned h : {1u, 2u, 3u, 4u}) {
        const XmssTree t = XmssTree::build(h, kSecret, kPublic, 0);
        CHECK(t.leaf_count() == (1u << h));
        CHECK(t.build_hash_calls() == expected_build_calls(h));
    }
    CHECK(expected_build_calls(4) == 4 * expected_build_calls(2));
    CHECK_THROWS_AS(XmssTree::build(0, kSecret, kPublic, 0), ParameterError);
    CHECK_THROWS_AS(XmssTree::build(21, kSecret, kPublic, 0), ParameterError);
}

TEST_CASE("auth path of a height-2 tree") {
    const XmssTree t = XmssTree::build(2, kSecret, kPublic, 0);
    // Leaf 0 needs leaf 1 and the right subtree node; leaf 2 needs leaf 3 and the left one.
    auto p0 = t.auth_path(0);
    REQUIRE(p0.size() == 2);
    CHECK(p0[0] == t.leaf_hash(1));
    CHECK(p0[1] == t.node(1, 1));
    auto p2 = t.auth_path(2);
    CHECK(p2[0] == t.leaf_hash(3));
    CHECK(p2[1] == t.node(1, 0));
    const Digest n10 = hash_tree_node(kPublic, 0, 1, 0, t.leaf_hash(0), t.leaf_hash(1));
    const Digest n11 = hash_tree_node(kPublic, 0, 1, 1, t.leaf_hash(2), t.leaf_hash(3));
    const Digest top = hash_tree_node(kPublic, 0, 2, 0, n10, n11);
    CHECK(t.root() == finalize_root(kPublic, 0, 2, top));
}

TEST_CASE("leaf hashes are compressed WOTS+ keys") {
    const XmssTree t = XmssTree::build(2, kSecret, kPublic, 3);
    for (std::uint32_t i = 0; i < 4; ++i) {
        const hbs::Address a{3, i, 0, 0};
        const auto kp = hbs::wots_keygen(kSecret, kPublic, {}, a);
        CHECK(t.leaf_hash(i) == hbs::wots_pk_digest(kp.pk(), kPublic, a));
    }
}

TEST_CASE("every leaf signs and verifies, then the tree is exhausted") {
    XmssTree t = XmssTree::build(3, kSecret, kPublic, 1);
    for (std::uint32_t i = 0; i < 8; ++i) {
        const Digest msg = hash(test::seed_bytes("msg", i));
        const XmssSignature sig = t.sign(msg);
        CHECK(sig.key_index == i);
        CHECK(sig.auth_path.size() == 3);
        CHECK(compute_root(msg, sig, kPublic, 1) == t.root());
        CHECK(xmss_verify(msg, sig, t.root(), kPublic, 1));
        CHECK_FALSE(xmss_verify(msg, sig, t.root(), kPublic, 2));
        CHECK_FALSE(xmss_verify(hash(to_bytes("other")), sig, t.root(), kPublic, 1));
    }
    CHECK(t.exhausted());
    CHECK(t.remaining() == 0);
    CHECK_THROWS_AS(t.sign(Digest{}), TreeExhausted);
}

TEST_CASE("corrupting any signature field fails verification") {
    XmssTree t = XmssTree::build(4, kSecret, kPublic, 0);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 16; ++trial) {
        const Digest msg = hash(test::seed_bytes("m", static_cast<std::uint32_t>(trial)));
        const XmssSignature good = t.sign(msg);
        for (int field = 0; field < 4; ++field) {
            XmssSignature bad = good;
            const auto flip = static_cast<std::uint8_t>(1 + rng() % 255);
            switch (field) {
                case 0: bad.key_index ^= 1u << (rng() % 4); break;
                case 1: bad.wots_sig.sig_chains[rng() % 67][rng() % 32] ^= flip; break;
                case 2: bad.wots_pk[rng() % 67][rng() % 32] ^= flip; break;
                default: bad.auth_path[rng() % 4][rng() % 32] ^= flip; break;
            }
            CHECK_FALSE(xmss_verify(msg, bad, t.root(), kPublic, 0));
        }
    }
}

TEST_CASE("persist failure withholds the signature but consumes the leaf") {
    XmssTree t = XmssTree::build(2, kSecret, kPublic, 0);
    std::uint32_t seen = 0;
    t.set_persist_hook([&](const XmssTree& tree) {
        seen = tree.next_index();
        if (seen == 2) throw std::runtime_error("disk full");
    });
    (void)t.sign(Digest{});
    CHECK(seen == 1);
    CHECK_THROWS_AS(t.sign(Digest{}), StateWriteError);
    CHECK(t.next_index() == 2);
    CHECK(t.sign(Digest{}).key_index == 2);
}

TEST_CASE("restoring the counter never moves backwards") {
    XmssTree t = XmssTree::build(2, kSecret, kPublic, 0);
    t.restore_next_index(3);
    CHECK(t.sign(Digest{}).key_index == 3);
    CHECK_THROWS_AS(t.restore_next_index(1), ParameterError);
    CHECK_THROWS_AS(t.restore_next_index(5), ParameterError);
}
