#pragma once

// Hash-based VRF with a WOTS+ proof layer. Each round gets a fresh one-time
// key: proof = PRF(sk, alpha), beta = H(proof), and the WOTS+ key signs
// H(round, alpha, proof). The compressed WOTS+ public key is the VRF public key.

#include <cstdint>

#include "pqbfl/wots.hpp"

namespace pqbfl::vrf {

struct VrfPublicKey {
    std::uint64_t round = 0;
    Bytes public_seed;
    // Compressed WOTS+ public key of the round.
    Digest vrf_pk{};

    bool operator==(const VrfPublicKey&) const = default;
};

struct VrfKeypair {
    std::uint64_t round = 0;
    hbs::WotsKeypair wots_kp;
    Digest vrf_sk{};
    Digest vrf_pk{};

    VrfPublicKey public_key() const { return {round, wots_kp.public_seed(), vrf_pk}; }
};

struct VrfOutput {
    Digest beta{};
    Digest proof{};
    hbs::WotsSignature wots_sig;
    double unit_value = 0.0;
};

VrfKeypair vrf_keygen(ByteView device_seed, std::uint64_t round);

// One prove per keypair; a second call throws OneTimeViolation.
VrfOutput vrf_prove(VrfKeypair& kp, ByteView alpha);

// Public-data check: beta == H(proof), unit_value == prob(beta), and the WOTS+
// signature over H(round, alpha, proof) recovers the published key.
bool vrf_verify(const VrfPublicKey& pk, ByteView alpha, const VrfOutput& out);

// Top 53 bits of the big-endian first 8 bytes, scaled into [0, 1).
double prob(const Digest& beta);

// Digest the WOTS+ layer signs.
Digest proof_message(std::uint64_t round, ByteView alpha, const Digest& proof);

}  // namespace pqbfl::vrf
