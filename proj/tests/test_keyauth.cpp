#include <doctest.h>

#include <array>

#include "krlab/keyauth.hpp"

using namespace krlab;
using namespace krlab::auth;

namespace {

gf2::BitVector bits(const std::string& s) { return gf2::BitVector::fromString(s); }

}  // namespace

TEST_SUITE("keyauth") {

TEST_CASE("zero key and single block") {
  const HashParams p{3, 1};
  for (std::uint32_t x = 0; x < 8; ++x) {
    const auto fx = gf2::fieldElement(3, x);
    CHECK(polyHash(p, fx, bits("000")) == 0);
    // c1 = 0b101
    CHECK(polyHash(p, fx, bits("101")) == gf2::fieldMul(gf2::fieldElement(3, 5), fx).value);
  }
}

TEST_CASE("two blocks by hand") {
  // key 010|100: c1 = x, c2 = x^2; at point x: x*x + x^2*x^2 = x^2 + x^4 = x^2 + x^2 + x = x.
  const HashParams p{3, 2};
  CHECK(polyHash(p, gf2::fieldElement(3, 0b010), bits("010100")) == 0b010);
}

TEST_CASE("hash is linear in the key") {
  const HashParams p{4, 3};
  for (std::uint32_t x = 0; x < 16; ++x) {
    const auto fx = gf2::fieldElement(4, x);
    const auto a = bits("101100111000");
    const auto b = bits("011011001101");
    CHECK((polyHash(p, fx, a) ^ polyHash(p, fx, b)) == polyHash(p, fx, a ^ b));
  }
}

TEST_CASE("m=3 l=2 differential bound by exhaustion") {
  const auto rep = checkDeltaUniversal({3, 2});
  CHECK(rep.pairs == 64 * 63 / 2);
  CHECK(rep.worstCount <= 2);
  CHECK(rep.withinBound);
  CHECK(rep.complete);
}

TEST_CASE("rejection rate for an unequal pair") {
  const HashParams p{3, 2};
  const auto a = bits("110001");
  const auto b = bits("010111");
  int rejected = 0;
  for (std::uint32_t x = 0; x < 8; ++x) {
    const auto fx = gf2::fieldElement(3, x);
    const auto c = makeVerificationMessage(p, a, fx, 0b011);
    rejected += !verifyKeys(p, c, b, fx, 0b011);
  }
  CHECK(rejected >= 6);
}

TEST_CASE("one-time pad on the tag") {
  const HashParams p{3, 2};
  const auto key = bits("111000");
  const auto fx = gf2::fieldElement(3, 6);
  const auto sigma = polyHash(p, fx, key);
  CHECK(makeVerificationMessage(p, key, fx, 0) == sigma);
  // Uniform pad gives a uniform ciphertext.
  std::array<int, 8> seen{};
  for (std::uint32_t pad = 0; pad < 8; ++pad) ++seen[makeVerificationMessage(p, key, fx, pad)];
  for (int c : seen) CHECK(c == 1);
  // Flipping tag bits by delta is the same as checking against sigma ^ delta.
  for (std::uint32_t delta = 1; delta < 8; ++delta) {
    const auto c = makeVerificationMessage(p, key, fx, 5) ^ delta;
    CHECK_FALSE(verifyKeys(p, c, key, fx, 5));
    CHECK(((c ^ 5) ^ sigma) == delta);
  }
}

TEST_CASE("parameter and length errors") {
  const HashParams p{3, 2};
  const auto fx = gf2::fieldElement(3, 1);
  CHECK_THROWS_AS(polyHash(p, fx, bits("101")), AuthError);
  CHECK_THROWS_AS(polyHash(p, gf2::fieldElement(4, 1), bits("101101")), AuthError);
  CHECK_THROWS_AS(makeVerificationMessage(p, bits("101101"), fx, 8), AuthError);
  CHECK_THROWS_AS((HashParams{2, 5}).check(), AuthError);
  CHECK_THROWS_AS((HashParams{0, 1}).check(), AuthError);
  CHECK(padKey(p, bits("11")).toString() == "110000");
  CHECK_THROWS_AS(padKey(p, bits("1111111")), AuthError);
}

TEST_CASE("hex helpers") {
  CHECK(keyFromHex("a5", 8).toString() == "10100101");
  CHECK(keyFromHex("0xa", 3).toString() == "101");
  CHECK_THROWS_AS(keyFromHex("b", 3), AuthError);  // low bit set beyond width
  CHECK_THROWS_AS(keyFromHex("g1", 8), AuthError);
  CHECK(toHex(0xb, 4) == "b");
  CHECK(toHex(0x1f, 12) == "01f");
}

}
