#pragma once

// WOTS+ one-time signatures over n = 32 byte digests.

#include <cstdint>
#include <vector>

#include "pqbfl/hash.hpp"

namespace pqbfl::hbs {

struct HashParams {
    std::size_t n = kHashBytes;
    unsigned w = 16;

    unsigned log_w() const;
    // Message chains: ceil(8n / log2 w).
    std::size_t len1() const;
    // Checksum chains: floor(log2(len1 (w-1)) / log2 w) + 1.
    std::size_t len2() const;
    std::size_t len() const { return len1() + len2(); }

    // Throws ParameterError unless n == 32 and w is 4 or 16.
    void validate() const;
};

// Position of a hash-chain step. tree_no/leaf identify the keypair,
// chain/step the position within it. tree_no kVrfTree is reserved for
// per-round VRF keys.
struct Address {
    std::uint32_t tree_no = 0;
    std::uint32_t leaf = 0;
    std::uint32_t chain = 0;
    std::uint32_t step = 0;

    static constexpr std::uint32_t kVrfTree = 0xffffffffu;
};

// Applies `steps` iterations of bitmask-XOR-then-hash starting at position
// `start`. Requires start + steps <= w - 1.
Digest chain(const Digest& x, unsigned start, unsigned steps, ByteView public_seed, Address addr,
             const HashParams& params = {});

// Base-w digits of the digest followed by the checksum digits (len values).
std::vector<unsigned> chain_lengths(const Digest& digest, const HashParams& params = {});

struct WotsSignature {
    std::vector<Digest> sig_chains;
    Digest msg_digest{};
};

class WotsKeypair {
public:
    WotsKeypair() = default;

    const Digest& seed() const { return seed_; }
    const std::vector<Digest>& sk_chains() const { return sk_chains_; }
    const std::vector<Digest>& pk() const { return pk_; }
    const Bytes& public_seed() const { return public_seed_; }
    Address address() const { return addr_; }
    const HashParams& params() const { return params_; }
    bool used() const { return used_; }

private:
    friend WotsKeypair wots_keygen(ByteView, ByteView, const HashParams&, Address);
    friend WotsSignature wots_sign(const Digest&, WotsKeypair&);

    Digest seed_{};
    std::vector<Digest> sk_chains_;
    std::vector<Digest> pk_;
    Bytes public_seed_;
    Address addr_{};
    HashParams params_{};
    bool used_ = false;
};

// Deterministic in (secret_seed, public_seed, addr.tree_no, addr.leaf).
WotsKeypair wots_keygen(ByteView secret_seed, ByteView public_seed, const HashParams& params, Address addr);

// Consumes the keypair. A second call throws OneTimeViolation.
WotsSignature wots_sign(const Digest& digest, WotsKeypair& kp);

// Completes every chain from the signed position to w - 1.
std::vector<Digest> wots_pk_from_sig(const Digest& digest, const WotsSignature& sig, ByteView public_seed,
                                     Address addr, const HashParams& params = {});

// Compresses a full WOTS+ public key into one n-byte value bound to its address.
Digest wots_pk_digest(const std::vector<Digest>& pk, ByteView public_seed, Address addr);

}  // namespace pqbfl::hbs
