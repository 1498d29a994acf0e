#include "pqbfl/wots.hpp"

#include <bit>

#include "pqbfl/errors.hpp"

namespace pqbfl::hbs {

namespace {

void hash_address(Hasher& h, const Address& a) {
    h.update_u32(a.tree_no).update_u32(a.leaf).update_u32(a.chain).update_u32(a.step);
}

}  // namespace

unsigned HashParams::log_w() const { return static_cast<unsigned>(std::countr_zero(w)); }

std::size_t HashParams::len1() const {
    const std::size_t bits = 8 * n;
    return (bits + log_w() - 1) / log_w();
}

std::size_t HashParams::len2() const {
    // floor(log2(len1 * (w - 1))) computed on integers.
    const std::size_t max_checksum = len1() * (w - 1);
    const unsigned floor_log2 = static_cast<unsigned>(std::bit_width(max_checksum)) - 1;
    return floor_log2 / log_w() + 1;
}

void HashParams::validate() const {
    if (n != kHashBytes) throw ParameterError("WOTS+ requires n = 32");
    if (w != 4 && w != 16) throw ParameterError("WOTS+ Winternitz parameter must be 4 or 16");
    if (8 % log_w() != 0) throw ParameterError("log2(w) must divide 8");
}

Digest chain(const Digest& x, unsigned start, unsigned steps, ByteView public_seed, Address addr,
             const HashParams& params) {
    if (start + steps > params.w - 1) throw ParameterError("chain step overflow beyond w - 1");
    Digest value = x;
    for (unsigned i = start; i < start + steps; ++i) {
        addr.step = i;
        Hasher mask_hasher(HashTag::kChainMask);
        mask_hasher.update(public_seed);
        hash_address(mask_hasher, addr);
        const Digest mask = mask_hasher.finish();
        for (std::size_t b = 0; b < value.size(); ++b) value[b] ^= mask[b];

        Hasher step_hasher(HashTag::kChainStep);
        step_hasher.update(public_seed);
        hash_address(step_hasher, addr);
        step_hasher.update(value);
        value = step_hasher.finish();
    }
    return value;
}

std::vector<unsigned> chain_lengths(const Digest& digest, const HashParams& params) {
    params.validate();
    const unsigned lw = params.log_w();
    const unsigned mask = params.w - 1;
    std::vector<unsigned> digits;
    digits.reserve(params.len());
    for (std::uint8_t byte : digest) {
        for (int shift = 8 - static_cast<int>(lw); shift >= 0; shift -= static_cast<int>(lw)) {
            digits.push_back((byte >> shift) & mask);
        }
    }
    unsigned checksum = 0;
    for (unsigned d : digits) checksum += mask - d;
    std::vector<unsigned> csum_digits(params.len2());
    for (std::size_t i = params.len2(); i-- > 0;) {
        csum_digits[i] = checksum & mask;
        checksum >>= lw;
    }
    digits.insert(digits.end(), csum_digits.begin(), csum_digits.end());
    return digits;
}

WotsKeypair wots_keygen(ByteView secret_seed, ByteView public_seed, const HashParams& params, Address addr) {
    params.validate();
    if (secret_seed.empty() || public_seed.empty()) throw ParameterError("WOTS+ seeds must be nonempty");
    addr.chain = 0;
    addr.step = 0;

    WotsKeypair kp;
    kp.params_ = params;
    kp.addr_ = addr;
    kp.public_seed_.assign(public_seed.begin(), public_seed.end());

    Hasher seed_hasher(HashTag::kWotsSeed);
    seed_hasher.update(secret_seed);
    hash_address(seed_hasher, addr);
    kp.seed_ = seed_hasher.finish();

    const std::size_t len = params.len();
    kp.sk_chains_.resize(len);
    kp.pk_.resize(len);
    for (std::size_t i = 0; i < len; ++i) {
        Address chain_addr = addr;
        chain_addr.chain = static_cast<std::uint32_t>(i);
        Hasher sk_hasher(HashTag::kWotsSecret);
        sk_hasher.update(kp.seed_);
        hash_address(sk_hasher, chain_addr);
        kp.sk_chains_[i] = sk_hasher.finish();
        kp.pk_[i] = chain(kp.sk_chains_[i], 0, params.w - 1, public_seed, chain_addr, params);
    }
    return kp;
}

WotsSignature wots_sign(const Digest& digest, WotsKeypair& kp) {
    if (kp.used_) {
        throw OneTimeViolation("WOTS+ keypair (tree " + std::to_string(kp.addr_.tree_no) + ", leaf " +
                               std::to_string(kp.addr_.leaf) + ") already signed");
    }
    kp.used_ = true;
    const std::vector<unsigned> lengths = chain_lengths(digest, kp.params_);
    WotsSignature sig;
    sig.msg_digest = digest;
    sig.sig_chains.resize(lengths.size());
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        Address chain_addr = kp.addr_;
        chain_addr.chain = static_cast<std::uint32_t>(i);
        sig.sig_chains[i] = chain(kp.sk_chains_[i], 0, lengths[i], kp.public_seed_, chain_addr, kp.params_);
    }
    return sig;
}

std::vector<Digest> wots_pk_from_sig(const Digest& digest, const WotsSignature& sig, ByteView public_seed,
                                     Address addr, const HashParams& params) {
    const std::vector<unsigned> lengths = chain_lengths(digest, params);
    if (sig.sig_chains.size() != lengths.size()) throw ParameterError("WOTS+ signature has wrong chain count");
    addr.step = 0;
    std::vector<Digest> pk(lengths.size());
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        Address chain_addr = addr;
        chain_addr.chain = static_cast<std::uint32_t>(i);
        pk[i] = chain(sig.sig_chains[i], lengths[i], params.w - 1 - lengths[i], public_seed, chain_addr, params);
    }
    return pk;
}

Digest wots_pk_digest(const std::vector<Digest>& pk, ByteView public_seed, Address addr) {
    Hasher h(HashTag::kWotsPk);
    h.update(public_seed);
    h.update_u32(addr.tree_no).update_u32(addr.leaf);
    for (const Digest& d : pk) h.update(d);
    return h.finish();
}

}  // namespace pqbfl::hbs
