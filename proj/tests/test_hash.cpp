#include <doctest.h>

#include "pqbfl/errors.hpp"
#include "pqbfl/hash.hpp"
#include "support.hpp"

using namespace pqbfl;

TEST_CASE("sha256 known answers") {
    CHECK(to_hex(hash(to_bytes("abc"))) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(to_hex(hash(Bytes{})) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("tagged hasher equals one-shot hash of tag byte and big-endian fields") {
    const Digest got = Hasher(HashTag::kBlock).update("xy").update_u32(0x01020304).update_u64(5).finish();
    Bytes flat{static_cast<std::uint8_t>(HashTag::kBlock), 'x', 'y', 1, 2, 3, 4, 0, 0, 0, 0, 0, 0, 0, 5};
    CHECK(got == test::sha256(flat));
}

TEST_CASE("each finish counts as one hash call") {
    const auto before = hash_call_count();
    Hasher h;
    h.update("a");
    h.update("b");
    (void)h.finish();
    (void)hash(to_bytes("c"));
    CHECK(hash_call_count() - before == 2);
}

TEST_CASE("hex codec is strict") {
    const Bytes b{0x00, 0xab, 0xff};
    CHECK(to_hex(b) == "00abff");
    CHECK(from_hex("00abff") == b);
    CHECK_THROWS_AS(from_hex("abc"), ParameterError);
    CHECK_THROWS_AS(from_hex("AB"), ParameterError);
    CHECK_THROWS_AS(from_hex("zz"), ParameterError);
    CHECK_THROWS_AS(digest_from_hex("00"), ParameterError);
}

TEST_CASE("field appenders are big-endian") {
    Bytes out;
    put_u8(out, 7);
    put_u32(out, 0xdeadbeef);
    put_u64(out, 0x0102030405060708ull);
    CHECK(out == Bytes{7, 0xde, 0xad, 0xbe, 0xef, 1, 2, 3, 4, 5, 6, 7, 8});
}
