#include "pqbfl/xmss.hpp"

#include <string>

#include "pqbfl/errors.hpp"

namespace pqbfl::xmss {

Digest hash_tree_node(ByteView public_seed, std::uint32_t tree_no, unsigned level, std::uint32_t index,
                      const Digest& left, const Digest& right) {
    Hasher h(HashTag::kTreeNode);
    h.update(public_seed).update_u32(tree_no).update_u32(level).update_u32(index);
    h.update(left).update(right);
    return h.finish();
}

Digest finalize_root(ByteView public_seed, std::uint32_t tree_no, unsigned height, const Digest& top) {
    Hasher h(HashTag::kTreeRoot);
    h.update(public_seed).update_u32(tree_no).update_u32(height).update(top);
    return h.finish();
}

XmssTree XmssTree::build(unsigned height, ByteView secret_seed, ByteView public_seed, std::uint32_t tree_no,
                         const hbs::HashParams& params) {
    if (height < kMinHeight || height > kMaxHeight) {
        throw ParameterError("XMSS height " + std::to_string(height) + " outside [1, 20]");
    }
    params.validate();
    const std::uint64_t calls_before = hash_call_count();

    XmssTree tree;
    tree.height_ = height;
    tree.tree_no_ = tree_no;
    tree.params_ = params;
    tree.public_seed_.assign(public_seed.begin(), public_seed.end());

    const std::uint32_t leaf_count = 1u << height;
    tree.leaves_.reserve(leaf_count);
    tree.levels_.assign(height + 1, {});
    tree.levels_[0].reserve(leaf_count);
    for (std::uint32_t i = 0; i < leaf_count; ++i) {
        const hbs::Address addr{tree_no, i, 0, 0};
        tree.leaves_.push_back(hbs::wots_keygen(secret_seed, public_seed, params, addr));
        tree.levels_[0].push_back(hbs::wots_pk_digest(tree.leaves_.back().pk(), public_seed, addr));
    }
    for (unsigned level = 1; level <= height; ++level) {
        const auto& below = tree.levels_[level - 1];
        auto& here = tree.levels_[level];
        here.reserve(below.size() / 2);
        for (std::uint32_t i = 0; i < below.size() / 2; ++i) {
            here.push_back(hash_tree_node(public_seed, tree_no, level, i, below[2 * i], below[2 * i + 1]));
        }
    }
    tree.root_ = finalize_root(public_seed, tree_no, height, tree.levels_[height][0]);
    tree.build_hash_calls_ = hash_call_count() - calls_before;
    return tree;
}

const hbs::WotsKeypair& XmssTree::leaf(std::uint32_t index) const {
    if (index >= leaves_.size()) throw ParameterError("leaf index out of range");
    return leaves_[index];
}

const Digest& XmssTree::leaf_hash(std::uint32_t index) const { return node(0, index); }

const Digest& XmssTree::node(unsigned level, std::uint32_t index) const {
    if (level > height_ || index >= levels_[level].size()) throw ParameterError("tree node out of range");
    return levels_[level][index];
}

std::vector<Digest> XmssTree::auth_path(std::uint32_t index) const {
    if (index >= leaves_.size()) throw ParameterError("leaf index out of range");
    std::vector<Digest> path;
    path.reserve(height_);
    for (unsigned level = 0; level < height_; ++level) {
        path.push_back(levels_[level][(index >> level) ^ 1u]);
    }
    return path;
}

XmssSignature XmssTree::sign(const Digest& digest) {
    if (exhausted()) {
        throw TreeExhausted("XMSS tree " + std::to_string(tree_no_) + " has no unused leaves");
    }
    const std::uint32_t index = next_index_;
    ++next_index_;
    if (persist_) {
        try {
            persist_(*this);
        } catch (const std::exception& e) {
            // The leaf stays consumed: a signature that may have escaped must
            // never be produced twice.
            throw StateWriteError(std::string("persisting XMSS state failed: ") + e.what());
        }
    }
    XmssSignature sig;
    sig.key_index = index;
    sig.wots_sig = hbs::wots_sign(digest, leaves_[index]);
    sig.wots_pk = leaves_[index].pk();
    sig.auth_path = auth_path(index);
    return sig;
}

void XmssTree::restore_next_index(std::uint32_t next_index) {
    if (next_index > leaves_.size()) throw ParameterError("restored index beyond leaf count");
    if (next_index < next_index_) throw ParameterError("restored index would reuse consumed leaves");
    next_index_ = next_index;
}

namespace {

Digest fold_root(const Digest& leaf, const XmssSignature& sig, ByteView public_seed, std::uint32_t tree_no) {
    Digest node = leaf;
    std::uint32_t index = sig.key_index;
    const auto height = static_cast<unsigned>(sig.auth_path.size());
    for (unsigned level = 0; level < height; ++level) {
        const std::uint32_t parent = index >> 1;
        node = (index & 1u) ? hash_tree_node(public_seed, tree_no, level + 1, parent, sig.auth_path[level], node)
                            : hash_tree_node(public_seed, tree_no, level + 1, parent, node, sig.auth_path[level]);
        index = parent;
    }
    return finalize_root(public_seed, tree_no, height, node);
}

}  // namespace

Digest compute_root(const Digest& digest, const XmssSignature& sig, ByteView public_seed, std::uint32_t tree_no,
                    const hbs::HashParams& params) {
    const hbs::Address addr{tree_no, sig.key_index, 0, 0};
    const std::vector<Digest> pk = hbs::wots_pk_from_sig(digest, sig.wots_sig, public_seed, addr, params);
    return fold_root(hbs::wots_pk_digest(pk, public_seed, addr), sig, public_seed, tree_no);
}

bool xmss_verify(const Digest& digest, const XmssSignature& sig, const Digest& root, ByteView public_seed,
                 std::uint32_t tree_no, const hbs::HashParams& params) {
    if (sig.auth_path.empty() || sig.auth_path.size() > kMaxHeight) return false;
    if (sig.key_index >= (1u << sig.auth_path.size())) return false;
    if (sig.wots_sig.sig_chains.size() != params.len() || sig.wots_pk.size() != params.len()) return false;
    if (sig.wots_sig.msg_digest != digest) return false;
    const hbs::Address addr{tree_no, sig.key_index, 0, 0};
    const std::vector<Digest> pk = hbs::wots_pk_from_sig(digest, sig.wots_sig, public_seed, addr, params);
    if (pk != sig.wots_pk) return false;
    return fold_root(hbs::wots_pk_digest(pk, public_seed, addr), sig, public_seed, tree_no) == root;
}

}  // namespace pqbfl::xmss
