#pragma once

// SHA-256 wrapper used for every hashing role (chains, tree nodes, digests,
// VRF, block hashes). Each finalized digest bumps a process-wide counter
// that the cost model and the benchmarks read.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <sodium.h>

namespace pqbfl {

inline constexpr std::size_t kHashBytes = 32;

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, kHashBytes>;
using ByteView = std::span<const std::uint8_t>;

// Domain-separation tags, one leading byte per hashing role.
enum class HashTag : std::uint8_t {
    kMessage = 0x00,
    kWotsSeed = 0x01,
    kWotsSecret = 0x02,
    kChainMask = 0x03,
    kChainStep = 0x04,
    kWotsPk = 0x05,
    kTreeNode = 0x06,
    kTreeRoot = 0x07,
    kCertifier = 0x08,
    kVrfSecret = 0x09,
    kVrfProof = 0x0a,
    kVrfBeta = 0x0b,
    kVrfMessage = 0x0c,
    kVrfSeed = 0x0d,
    kTxDigest = 0x0e,
    kBlock = 0x0f,
    kModel = 0x10,
    kAddress = 0x11,
    kAnchor = 0x12,
};

// Incremental hasher. One call to finish() is one hash invocation.
class Hasher {
public:
    Hasher();
    explicit Hasher(HashTag tag);

    Hasher& update(ByteView data);
    Hasher& update(const Digest& d) { return update(ByteView(d)); }
    Hasher& update(std::string_view s);
    Hasher& update_u8(std::uint8_t v);
    Hasher& update_u32(std::uint32_t v);
    Hasher& update_u64(std::uint64_t v);

    Digest finish();

private:
    crypto_hash_sha256_state state_;
};

// Plain SHA-256 of the input, no tag.
Digest hash(ByteView data);

// Total SHA-256 finalizations performed by this process.
std::uint64_t hash_call_count();

std::string to_hex(ByteView data);
inline std::string to_hex(const Digest& d) { return to_hex(ByteView(d)); }
// Strict: lowercase hex digits only, even length. Throws ParameterError.
Bytes from_hex(std::string_view hex);
Digest digest_from_hex(std::string_view hex);

Bytes to_bytes(std::string_view s);

// Big-endian field appenders shared by all wire encodings.
void put_u8(Bytes& out, std::uint8_t v);
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);
void put_bytes(Bytes& out, ByteView data);

}  // namespace pqbfl
