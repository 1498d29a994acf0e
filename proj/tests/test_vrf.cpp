#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "pqbfl/errors.hpp"
#include "pqbfl/vrf.hpp"
#include "support.hpp"

using namespace pqbfl;
using namespace pqbfl::vrf;

TEST_CASE("prove is deterministic and verifies") {
    const Bytes dev = test::seed_bytes("dev", 1);
    const Bytes alpha = to_bytes("prev block hash");
    VrfKeypair a = vrf_keygen(dev, 3);
    VrfKeypair b = vrf_keygen(dev, 3);
    CHECK(a.public_key() == b.public_key());
    const VrfOutput oa = vrf_prove(a, alpha);
    const VrfOutput ob = vrf_prove(b, alpha);
    CHECK(oa.beta == ob.beta);
    CHECK(oa.unit_value == prob(oa.beta));
    CHECK(vrf_verify(a.public_key(), alpha, oa));
    CHECK_FALSE(vrf_verify(a.public_key(), to_bytes("other alpha"), oa));
    CHECK_THROWS_AS(vrf_prove(a, alpha), OneTimeViolation);
}

TEST_CASE("keys rotate per round") {
    const Bytes dev = test::seed_bytes("dev", 2);
    const VrfKeypair r0 = vrf_keygen(dev, 0);
    const VrfKeypair r1 = vrf_keygen(dev, 1);
    CHECK(r0.vrf_pk != r1.vrf_pk);
    VrfKeypair r0b = vrf_keygen(dev, 0);
    const VrfOutput out = vrf_prove(r0b, to_bytes("a"));
    CHECK_FALSE(vrf_verify(r1.public_key(), to_bytes("a"), out));
}

TEST_CASE("any corrupted field is rejected") {
    const Bytes dev = test::seed_bytes("dev", 3);
    std::mt19937_64 rng(3);
    for (std::uint64_t round = 0; round < 60; ++round) {
        const Bytes alpha = test::seed_bytes("alpha", static_cast<std::uint32_t>(round));
        VrfKeypair kp = vrf_keygen(dev, round);
        const VrfOutput good = vrf_prove(kp, alpha);
        const auto flip = static_cast<std::uint8_t>(1 + rng() % 255);
        VrfOutput bad = good;
        switch (round % 5) {
            case 0: bad.beta[rng() % 32] ^= flip; break;
            case 1: bad.proof[rng() % 32] ^= flip; break;
            case 2: bad.wots_sig.sig_chains[rng() % 67][rng() % 32] ^= flip; break;
            case 3: bad.wots_sig.msg_digest[rng() % 32] ^= flip; break;
            default: bad.unit_value = std::nextafter(bad.unit_value, 2.0); break;
        }
        CHECK_FALSE(vrf_verify(kp.public_key(), alpha, bad));
        VrfPublicKey wrong = kp.public_key();
        wrong.vrf_pk[rng() % 32] ^= flip;
        CHECK_FALSE(vrf_verify(wrong, alpha, good));
    }
}

TEST_CASE("prob maps into [0, 1)") {
    Digest zero{};
    CHECK(prob(zero) == 0.0);
    Digest ones;
    ones.fill(0xff);
    CHECK(prob(ones) < 1.0);
    CHECK(prob(ones) > 0.999999);
    Digest half{};
    half[0] = 0x80;
    CHECK(prob(half) == 0.5);
}

TEST_CASE("unit values look uniform and betas do not collide") {
    const Bytes dev = test::seed_bytes("dev", 4);
    std::vector<double> u;
    std::set<Digest> betas;
    for (std::uint64_t r = 0; r < 2000; ++r) {
        VrfKeypair kp = vrf_keygen(dev, r);
        const VrfOutput out = vrf_prove(kp, to_bytes("alpha"));
        u.push_back(out.unit_value);
        betas.insert(out.beta);
    }
    CHECK(betas.size() == 2000);
    std::sort(u.begin(), u.end());
    double ks = 0.0;
    const double n = static_cast<double>(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        ks = std::max({ks, (i + 1) / n - u[i], u[i] - i / n});
    }
    // 1.63 / sqrt(n) is the 1% critical value.
    CHECK(ks < 1.63 / std::sqrt(n));
}
