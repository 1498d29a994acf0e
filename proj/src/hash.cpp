#include "pqbfl/hash.hpp"

#include <atomic>

#include "pqbfl/errors.hpp"

namespace pqbfl {

namespace {

std::atomic<std::uint64_t> g_hash_calls{0};

struct SodiumInit {
    SodiumInit() {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
    }
};

void ensure_sodium() { static const SodiumInit init; }

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

}  // namespace

Hasher::Hasher() {
    ensure_sodium();
    crypto_hash_sha256_init(&state_);
}

Hasher::Hasher(HashTag tag) : Hasher() { update_u8(static_cast<std::uint8_t>(tag)); }

Hasher& Hasher::update(ByteView data) {
    crypto_hash_sha256_update(&state_, data.data(), data.size());
    return *this;
}

Hasher& Hasher::update(std::string_view s) {
    return update(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

Hasher& Hasher::update_u8(std::uint8_t v) { return update(ByteView(&v, 1)); }

Hasher& Hasher::update_u32(std::uint32_t v) {
    const std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
                               static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
    return update(ByteView(b, 4));
}

Hasher& Hasher::update_u64(std::uint64_t v) {
    update_u32(static_cast<std::uint32_t>(v >> 32));
    return update_u32(static_cast<std::uint32_t>(v));
}

Digest Hasher::finish() {
    Digest out{};
    crypto_hash_sha256_final(&state_, out.data());
    g_hash_calls.fetch_add(1, std::memory_order_relaxed);
    return out;
}

Digest hash(ByteView data) {
    Hasher h;
    h.update(data);
    return h.finish();
}

std::uint64_t hash_call_count() { return g_hash_calls.load(std::memory_order_relaxed); }

std::string to_hex(ByteView data) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        s.push_back(kDigits[b >> 4]);
        s.push_back(kDigits[b & 0x0f]);
    }
    return s;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw ParameterError("hex string has odd length");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw ParameterError("invalid hex digit");
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

Digest digest_from_hex(std::string_view hex) {
    const Bytes b = from_hex(hex);
    if (b.size() != kHashBytes) throw ParameterError("digest must be 32 bytes");
    Digest d{};
    std::copy(b.begin(), b.end(), d.begin());
    return d;
}

Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }

void put_u32(Bytes& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(Bytes& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
    put_u32(out, static_cast<std::uint32_t>(v));
}

void put_bytes(Bytes& out, ByteView data) { out.insert(out.end(), data.begin(), data.end()); }

}  // namespace pqbfl
