#pragma once

#include "krlab/graph.hpp"
#include "krlab/protocol.hpp"

namespace krlab::fixtures {

// u1 - v - u2; v announces r[e1] ^ r[e2] on both edges.
LinearProtocol fig1();
// Serial relay with n edges and n-1 relays announcing r[e_i] ^ r[e_{i+1}].
LinearProtocol fig3a(int n);
// Two parallel two-hop relays; k2 = sum_i (r[e_i2] ^ dr_i).
LinearProtocol fig3b();
// Same relays with k2 = (r[e21] ^ dr1) ^ (r[e22] ^ dr2); does not reproduce k1.
LinearProtocol fig3bLiteral();

WiretapCollection fig3bWiretap();

}  // namespace krlab::fixtures
