#pragma once

// Single-tree XMSS: a Merkle tree over 2^h WOTS+ leaves with a
// next-unused-leaf counter. The whole tree is precomputed at build time.

#include <cstdint>
#include <functional>
#include <vector>

#include "pqbfl/wots.hpp"

namespace pqbfl::xmss {

inline constexpr unsigned kMinHeight = 1;
inline constexpr unsigned kMaxHeight = 20;

struct XmssSignature {
    std::uint32_t key_index = 0;
    hbs::WotsSignature wots_sig;
    std::vector<Digest> wots_pk;
    std::vector<Digest> auth_path;
};

class XmssTree {
public:
    // Called with the tree after next_index has advanced and before the
    // signature is returned. Throwing from it withholds the signature.
    using PersistHook = std::function<void(const XmssTree&)>;

    static XmssTree build(unsigned height, ByteView secret_seed, ByteView public_seed, std::uint32_t tree_no,
                          const hbs::HashParams& params = {});

    unsigned height() const { return height_; }
    std::uint32_t tree_no() const { return tree_no_; }
    std::size_t leaf_count() const { return leaves_.size(); }
    std::uint32_t next_index() const { return next_index_; }
    std::size_t remaining() const { return leaves_.size() - next_index_; }
    bool exhausted() const { return next_index_ >= leaves_.size(); }
    const Digest& root() const { return root_; }
    const Bytes& public_seed() const { return public_seed_; }
    const hbs::HashParams& params() const { return params_; }
    // Hash invocations spent by build().
    std::uint64_t build_hash_calls() const { return build_hash_calls_; }

    const hbs::WotsKeypair& leaf(std::uint32_t index) const;
    // Leaf-level node value (compressed WOTS+ public key).
    const Digest& leaf_hash(std::uint32_t index) const;
    // Node value at `level` (0 = leaves) and position `index` within that level.
    const Digest& node(unsigned level, std::uint32_t index) const;

    // Sibling hashes bottom-up for leaf `index`.
    std::vector<Digest> auth_path(std::uint32_t index) const;

    // Signs with leaf next_index and advances it by one. Throws TreeExhausted
    // once every leaf is used.
    XmssSignature sign(const Digest& digest);

    void set_persist_hook(PersistHook hook) { persist_ = std::move(hook); }

    // Restores the signing counter from persisted state; leaves below
    // `next_index` are marked consumed. Moving the counter backwards throws.
    void restore_next_index(std::uint32_t next_index);

private:
    XmssTree() = default;

    unsigned height_ = 0;
    std::uint32_t tree_no_ = 0;
    hbs::HashParams params_{};
    Bytes public_seed_;
    std::vector<hbs::WotsKeypair> leaves_;
    std::vector<std::vector<Digest>> levels_;
    Digest root_{};
    std::uint32_t next_index_ = 0;
    std::uint64_t build_hash_calls_ = 0;
    PersistHook persist_;
};

Digest hash_tree_node(ByteView public_seed, std::uint32_t tree_no, unsigned level, std::uint32_t index,
                      const Digest& left, const Digest& right);
// Binds the top node to the tree's ordinal and height.
Digest finalize_root(ByteView public_seed, std::uint32_t tree_no, unsigned height, const Digest& top);

// Recovers the leaf's WOTS+ key from the signature, hashes it to a leaf, and
// folds the authentication path by key_index parity.
Digest compute_root(const Digest& digest, const XmssSignature& sig, ByteView public_seed, std::uint32_t tree_no,
                    const hbs::HashParams& params = {});

// compute_root(...) == root, and the transmitted wots_pk matches the key recovered
// from the WOTS+ signature.
bool xmss_verify(const Digest& digest, const XmssSignature& sig, const Digest& root, ByteView public_seed,
                 std::uint32_t tree_no, const hbs::HashParams& params = {});

}  // namespace pqbfl::xmss
