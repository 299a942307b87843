#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "krlab/gf2.hpp"

namespace krlab::auth {

class AuthError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Tag length m, l blocks, key length n = m * l, differential bound l / 2^m.
struct HashParams {
  unsigned m = 1;
  unsigned l = 1;

  unsigned n() const { return m * l; }
  double epsilon() const;
  void check() const;
};

// sum_{j=1..l} c_j x^j with c_1 the leading m bits of the key.
std::uint32_t polyHash(const HashParams& p, const gf2::FieldElement& x, const gf2::BitVector& key);
std::uint32_t makeVerificationMessage(const HashParams& p, const gf2::BitVector& key,
                                      const gf2::FieldElement& x, std::uint32_t pad);
bool verifyKeys(const HashParams& p, std::uint32_t cipher, const gf2::BitVector& keyB,
                const gf2::FieldElement& x, std::uint32_t pad);

// Keys shorter than n are zero-padded on the right.
gf2::BitVector padKey(const HashParams& p, const gf2::BitVector& key);

struct DeltaUReport {
  HashParams params;
  std::uint64_t pairs = 0;
  std::uint32_t worstCount = 0;  // max over a != b and delta of #{x : h_x(a) ^ h_x(b) = delta}
  bool withinBound = false;      // worstCount * 2^m <= l * 2^m, i.e. worstCount <= l
  bool complete = false;         // equal keys accepted for every x and pad
};

DeltaUReport checkDeltaUniversal(const HashParams& p);

gf2::BitVector keyFromHex(const std::string& hex, std::size_t bits);
std::string toHex(std::uint32_t value, unsigned bits);

}  // namespace krlab::auth
