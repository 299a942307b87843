#pragma once

#include <cstdint>
#include <vector>

#include "krlab/protocol.hpp"

namespace krlab::testing {

struct RandomCase {
  LinearProtocol protocol;
  std::vector<EdgeId> member;  // one wiretap set to check
};

// Valid random linear protocol on a small connected graph with at most
// `maxBits` fundamental bits. Deterministic in `seed`.
RandomCase randomProtocol(std::uint64_t seed, unsigned maxBits = 12);

}  // namespace krlab::testing
