#include <doctest.h>

#include <random>
#include <set>

#include "krlab/gf2.hpp"

using namespace krlab::gf2;

namespace {

BitMatrix randomMatrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  BitMatrix m(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    BitVector v(cols);
    for (std::size_t c = 0; c < cols; ++c) v.set(c, rng() & 1);
    m.addRow(v);
  }
  return m;
}

// Row space by enumerating all 2^rows combinations.
std::set<std::string> span(const BitMatrix& m) {
  std::set<std::string> out;
  for (std::uint64_t mask = 0; mask < (1ull << m.rowCount()); ++mask) {
    BitVector v(m.colCount());
    for (std::size_t r = 0; r < m.rowCount(); ++r) {
      if (mask >> r & 1) v ^= m.row(r);
    }
    out.insert(v.toString());
  }
  return out;
}

std::size_t log2Exact(std::size_t x) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < x) ++k;
  REQUIRE((std::size_t{1} << k) == x);
  return k;
}

// Polynomial remainder over GF(2), for the irreducibility oracle.
std::uint32_t polyMod(std::uint32_t a, std::uint32_t b) {
  const int db = 31 - __builtin_clz(b);
  while (a && 31 - __builtin_clz(a) >= db) a ^= b << ((31 - __builtin_clz(a)) - db);
  return a;
}

}  // namespace

TEST_SUITE("gf2") {

TEST_CASE("bit vector basics") {
  auto v = BitVector::fromString("0110010");
  CHECK(v.size() == 7);
  CHECK(v.popcount() == 3);
  CHECK(v.lowestSet() == 1);
  CHECK(v.toString() == "0110010");
  CHECK(BitVector(70).lowestSet() == 70);
  auto w = BitVector::unit(7, 2);
  CHECK(v.dot(w));
  v ^= w;
  CHECK(v.toString() == "0100010");
  CHECK_THROWS_AS(BitVector::fromString("01x"), std::invalid_argument);
  CHECK_THROWS_AS(v ^= BitVector(8), std::invalid_argument);

  BitVector big(130);
  big.set(129);
  big.set(64);
  CHECK(big.popcount() == 2);
  CHECK(big.lowestSet() == 64);
  CHECK(big.prefix(100).popcount() == 1);
}

TEST_CASE("rank matches span enumeration") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = randomMatrix(rng, rng() % 9, 1 + rng() % 10);
    CHECK(rank(m) == log2Exact(span(m).size()));
  }
  CHECK(rank(BitMatrix::identity(100)) == 100);
  CHECK(rank(BitMatrix::fromStrings({"110", "011", "101"})) == 2);
}

TEST_CASE("wide matrices cross word boundaries") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = randomMatrix(rng, 8, 150);
    CHECK(rank(m) == log2Exact(span(m).size()));
  }
}

TEST_CASE("intersection dimension matches enumeration") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t cols = 1 + rng() % 8;
    const auto a = randomMatrix(rng, rng() % 6, cols);
    const auto b = randomMatrix(rng, rng() % 6, cols);
    const auto sa = span(a);
    const auto sb = span(b);
    std::size_t common = 0;
    for (const auto& x : sa) common += sb.count(x);
    const std::size_t expect = log2Exact(common);
    CHECK(intersectionDim(a, b) == expect);

    const auto basis = intersectionBasis(a, b);
    CHECK(rank(basis) == expect);
    for (const auto& row : basis.rows()) {
      CHECK(sa.count(row.toString()) == 1);
      CHECK(sb.count(row.toString()) == 1);
    }
  }
}

TEST_CASE("intersection rejects mismatched widths") {
  CHECK_THROWS_AS(intersectionDim(BitMatrix(3), BitMatrix(4)), std::invalid_argument);
  CHECK_THROWS_AS(intersectionBasis(BitMatrix(3), BitMatrix(4)), std::invalid_argument);
}

TEST_CASE("echelon basis") {
  EchelonBasis e(4);
  CHECK(e.insert(BitVector::fromString("1100")));
  CHECK(e.insert(BitVector::fromString("0110")));
  CHECK_FALSE(e.insert(BitVector::fromString("1010")));
  CHECK(e.contains(BitVector::fromString("1010")));
  CHECK_FALSE(e.contains(BitVector::fromString("0001")));
  CHECK(e.rank() == 2);
}

TEST_CASE("GF(2^3) table") {
  const auto x = fieldElement(3, 0b010);
  const auto x2 = fieldMul(x, x);
  CHECK(x2.value == 0b100);
  // x^3 = x + 1 modulo x^3 + x + 1
  CHECK(fieldMul(x2, x).value == 0b011);
  CHECK(fieldPow(x, 7).value == 1);
  CHECK(fieldAdd(x, x2).value == 0b110);
}

TEST_CASE("field inverses and degree checks") {
  for (int m = 1; m <= 8; ++m) {
    for (std::uint32_t a = 1; a < (1u << m); ++a) {
      const auto fa = fieldElement(m, a);
      CHECK(fieldMul(fa, fieldInv(fa)).value == 1);
    }
    CHECK_THROWS_AS(fieldInv(fieldElement(m, 0)), std::invalid_argument);
  }
  CHECK_THROWS_AS(fieldMul(fieldElement(3, 1), fieldElement(4, 1)), std::invalid_argument);
  CHECK_THROWS_AS(fieldElement(3, 8), std::invalid_argument);
  CHECK_THROWS_AS(irreducible(9), std::invalid_argument);
}

TEST_CASE("fixed moduli are irreducible") {
  for (int m = 1; m <= 8; ++m) {
    const std::uint32_t f = irreducible(m);
    CHECK((f >> m) == 1u);
    for (std::uint32_t d = 2; d < (1u << (m / 2 + 1)); ++d) {
      if (31 - __builtin_clz(d) >= 1 && 31 - __builtin_clz(d) <= m / 2) {
        CHECK_MESSAGE(polyMod(f, d) != 0, "m=" << m << " divisor " << d);
      }
    }
  }
  CHECK(irreducible(3) == 0xB);
  CHECK(irreducible(8) == 0x11B);
}

}
