#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "pqbfl/hybrid.hpp"

namespace pqbfl::test {

inline Bytes seed_bytes(std::string_view label, std::uint32_t id) {
    Bytes b = to_bytes(label);
    put_u32(b, id);
    const Digest d = hash(b);
    return Bytes(d.begin(), d.end());
}

inline hybrid::HybridKeychain make_keychain(hybrid::DeviceId id, unsigned height = 2,
                                            std::string_view preset = "dilithium5") {
    return hybrid::hybrid_keygen(id, height, seed_bytes("secret", id), seed_bytes("public", id),
                                 hybrid::make_certifier(preset));
}

// Independent SHA-256 of a flat buffer, bypassing Hasher.
inline Digest sha256(const Bytes& data) {
    Digest out{};
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(std::string_view label) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("pqbfl-" + std::string(label) + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

}  // namespace pqbfl::test
