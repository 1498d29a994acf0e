#pragma once

// Stateless certifier interface (the role Dilithium/Falcon play) plus the
// deterministic mock used by default.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pqbfl/hash.hpp"

namespace pqbfl::hybrid {

struct CertifierKeypair {
    Bytes pk;
    Bytes sk;
};

class StatelessCertifier {
public:
    virtual ~StatelessCertifier() = default;

    virtual std::string name() const = 0;
    virtual std::size_t pk_size() const = 0;
    virtual std::size_t sig_size() const = 0;

    virtual CertifierKeypair keygen(ByteView seed) const = 0;
    virtual Bytes sign(ByteView sk, ByteView message) const = 0;
    virtual bool verify(ByteView pk, ByteView message, ByteView signature) const = 0;
};

// Published key/signature sizes of the lattice schemes, for byte accounting.
struct SchemeConstants {
    std::string name;
    std::size_t pk_size = 0;
    std::size_t sig_size = 0;
};

// dilithium2, dilithium5, falcon512, falcon1024. Throws ParameterError otherwise.
const SchemeConstants& scheme_constants(std::string_view name);
std::vector<std::string> scheme_names();

// Keyed-hash test double with the byte sizes of a real scheme. The signature
// is recomputable from the public key, so it detects corruption but offers
// no unforgeability; swap in a real provider for that.
class MockCertifier final : public StatelessCertifier {
public:
    explicit MockCertifier(SchemeConstants constants);

    std::string name() const override { return constants_.name; }
    std::size_t pk_size() const override { return constants_.pk_size; }
    std::size_t sig_size() const override { return constants_.sig_size; }

    CertifierKeypair keygen(ByteView seed) const override;
    Bytes sign(ByteView sk, ByteView message) const override;
    bool verify(ByteView pk, ByteView message, ByteView signature) const override;

private:
    Bytes expand(const Digest& seed, std::size_t size) const;
    Bytes tag_for(ByteView pk, ByteView message) const;

    SchemeConstants constants_;
};

// Mock certifier sized like the named preset.
std::shared_ptr<const StatelessCertifier> make_certifier(std::string_view preset);

}  // namespace pqbfl::hybrid
