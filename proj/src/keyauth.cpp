#include "krlab/keyauth.hpp"

#include <algorithm>
#include <vector>

namespace krlab::auth {

double HashParams::epsilon() const { return static_cast<double>(l) / static_cast<double>(1u << m); }

void HashParams::check() const {
  if (m < 1 || m > 8) throw AuthError("tag length m must be in 1..8");
  if (l < 1) throw AuthError("block count l must be positive");
  if (l > (1u << m)) throw AuthError("l / 2^m exceeds 1");
}

gf2::BitVector padKey(const HashParams& p, const gf2::BitVector& key) {
  p.check();
  if (key.size() > p.n()) {
    throw AuthError("key has " + std::to_string(key.size()) + " bits, expected at most " +
                    std::to_string(p.n()));
  }
  gf2::BitVector out(p.n());
  for (std::size_t i = 0; i < key.size(); ++i) out.set(i, key.get(i));
  return out;
}

namespace {

std::uint32_t block(const HashParams& p, const gf2::BitVector& key, unsigned j) {
  std::uint32_t c = 0;
  for (unsigned b = 0; b < p.m; ++b) c = c << 1 | key.get(j * p.m + b);
  return c;
}

void checkPoint(const HashParams& p, const gf2::FieldElement& x) {
  if (x.m != static_cast<int>(p.m)) throw AuthError("hash point lies in the wrong field");
}

void checkPad(const HashParams& p, std::uint32_t pad) {
  if (pad >> p.m) throw AuthError("pad is longer than m bits");
}

}  // namespace

std::uint32_t polyHash(const HashParams& p, const gf2::FieldElement& x, const gf2::BitVector& key) {
  p.check();
  checkPoint(p, x);
  if (key.size() != p.n()) {
    throw AuthError("key has " + std::to_string(key.size()) + " bits, expected " +
                    std::to_string(p.n()));
  }
  // Horner on c_1 x + ... + c_l x^l = x (c_1 + x (c_2 + ...)).
  gf2::FieldElement acc = gf2::fieldElement(p.m, 0);
  for (unsigned j = p.l; j-- > 0;) {
    acc = gf2::fieldAdd(acc, gf2::fieldElement(p.m, block(p, key, j)));
    acc = gf2::fieldMul(acc, x);
  }
  return acc.value;
}

std::uint32_t makeVerificationMessage(const HashParams& p, const gf2::BitVector& key,
                                      const gf2::FieldElement& x, std::uint32_t pad) {
  checkPad(p, pad);
  return polyHash(p, x, key) ^ pad;
}

bool verifyKeys(const HashParams& p, std::uint32_t cipher, const gf2::BitVector& keyB,
                const gf2::FieldElement& x, std::uint32_t pad) {
  checkPad(p, pad);
  if (cipher >> p.m) throw AuthError("tag is longer than m bits");
  return (cipher ^ pad) == polyHash(p, x, keyB);
}

DeltaUReport checkDeltaUniversal(const HashParams& p) {
  p.check();
  if (p.n() > 16) throw AuthError("exhaustive check limited to n <= 16");
  const std::uint32_t keys = 1u << p.n();
  const std::uint32_t points = 1u << p.m;
  auto keyOf = [&](std::uint32_t a) {
    gf2::BitVector k(p.n());
    for (unsigned b = 0; b < p.n(); ++b) k.set(b, a >> b & 1u);
    return k;
  };
  // h[x * keys + a]
  std::vector<std::uint8_t> h(static_cast<std::size_t>(points) * keys);
  for (std::uint32_t a = 0; a < keys; ++a) {
    const auto k = keyOf(a);
    for (std::uint32_t x = 0; x < points; ++x) {
      h[static_cast<std::size_t>(x) * keys + a] =
          static_cast<std::uint8_t>(polyHash(p, gf2::fieldElement(p.m, x), k));
    }
  }
  DeltaUReport rep;
  rep.params = p;
  std::vector<std::uint32_t> count(points);
  for (std::uint32_t a = 0; a < keys; ++a) {
    for (std::uint32_t b = a + 1; b < keys; ++b) {
      std::fill(count.begin(), count.end(), 0);
      for (std::uint32_t x = 0; x < points; ++x) {
        const std::size_t row = static_cast<std::size_t>(x) * keys;
        ++count[h[row + a] ^ h[row + b]];
      }
      rep.worstCount = std::max(rep.worstCount, *std::max_element(count.begin(), count.end()));
      ++rep.pairs;
    }
  }
  rep.withinBound = rep.worstCount <= p.l;
  rep.complete = true;
  for (std::uint32_t a = 0; a < keys && rep.complete; ++a) {
    const auto k = keyOf(a);
    for (std::uint32_t x = 0; x < points && rep.complete; ++x) {
      const auto fx = gf2::fieldElement(p.m, x);
      for (std::uint32_t pad = 0; pad < points && rep.complete; ++pad) {
        rep.complete = verifyKeys(p, h[static_cast<std::size_t>(x) * keys + a] ^ pad, k, fx, pad);
      }
    }
  }
  return rep;
}

gf2::BitVector keyFromHex(const std::string& hex, std::size_t bits) {
  std::string digits = hex;
  if (digits.rfind("0x", 0) == 0 || digits.rfind("0X", 0) == 0) digits = digits.substr(2);
  if (digits.empty()) throw AuthError("empty hex string");
  if (digits.size() * 4 < bits) throw AuthError("hex string shorter than " + std::to_string(bits) + " bits");
  gf2::BitVector out(bits);
  for (std::size_t i = 0; i < digits.size(); ++i) {
    const char c = digits[i];
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw AuthError(std::string("bad hex digit '") + c + "'");
    for (int b = 0; b < 4; ++b) {
      const std::size_t pos = i * 4 + b;
      const bool bit = v >> (3 - b) & 1;
      if (pos < bits) out.set(pos, bit);
      else if (bit) throw AuthError("hex string has set bits beyond " + std::to_string(bits));
    }
  }
  return out;
}

std::string toHex(std::uint32_t value, unsigned bits) {
  static const char* kDigits = "0123456789abcdef";
  const unsigned nd = std::max(1u, (bits + 3) / 4);
  std::string s(nd, '0');
  for (unsigned i = 0; i < nd; ++i) s[nd - 1 - i] = kDigits[value >> (4 * i) & 0xf];
  return s;
}

}  // namespace krlab::auth
