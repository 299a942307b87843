#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "krlab/graph.hpp"
#include "krlab/protocol.hpp"
#include "krlab/security.hpp"

namespace krlab::g0 {

class NotG0Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Parity {
  std::string name;  // e.g. "p[v0,1]"
  int alpha;         // node v^(alpha) computing it
  LinExpr value;
};

// The nine per-node parities of subgraph (s,i).
std::vector<Parity> lkrpParities(const G0Labels& L, int s, int i);
// p^(0) (aggregate of the e0/e1 side) and p^(1) (e2/e3 side) as sums of the parities.
LinExpr parityAggregate(const G0Labels& L, int s, int i, int which);
LinExpr relayedKeyExpr(const G0Labels& L, int i);

LinearProtocol buildLkrp();
LinearProtocol buildLkrpInteractive();
SecurityReport verifyLkrp(const WiretapCollection& w = WiretapCollection::emptyOnly());

bool isG0(const Graph& g);

struct SubgraphRequirements {
  SubgraphId id;
  bool evaluable = true;
  std::string note;
  bool r1 = false, r2 = false, r3 = false, r4 = false;
  std::array<std::size_t, 4> usePosition{};
  std::array<std::string, 4> sender{};
  std::array<std::string, 4> receiver{};
  std::size_t dim01 = 0, dim23 = 0, dim02 = 0;

  bool all() const { return evaluable && r1 && r2 && r3 && r4; }
};

struct RequirementReport {
  std::vector<SubgraphRequirements> subgraphs;
  std::size_t satisfyingAll() const;
};

RequirementReport checkRequirements(const LinearProtocol& p);

struct PathEdgeConsistency {
  EdgeId edge;
  bool used = false;
  bool consistent = false;
  int d = 0;
  std::size_t position = 0;
  int senderPosition = -1;
};

struct PathConsistency {
  int path = 0;
  bool evaluable = true;
  std::array<PathEdgeConsistency, 5> edges;
  int firstGamma = -1;
  bool leftChain = false;
  bool rightChain = false;
  bool flowDirections = false;

  bool consistent() const;
  bool orderConformant() const { return evaluable && leftChain && rightChain && flowDirections; }
};

struct PathConsistencyReport {
  std::vector<PathConsistency> paths;
  bool allConsistent() const;
  bool allOrderConformant() const;
};

PathConsistencyReport checkPathConsistency(const LinearProtocol& p);

struct CandidateSubset {
  std::string tag;
  std::array<std::uint8_t, 9> allowed{};  // bit gamma set when e_i^<gamma> is in E'
  std::vector<EdgeId> edges(const G0Labels& L) const;
};

std::vector<CandidateSubset> subsetFamilies();

struct ItemsCheck {
  bool ok = true;
  std::string violation;
};

ItemsCheck checkItems234(const CandidateSubset& c);

struct CoverReport {
  std::uint64_t sequences = 0;
  std::uint64_t covered = 0;
  std::vector<std::array<int, 9>> uncovered;  // first few counterexamples
  std::vector<std::uint64_t> familyHits;     // per member
};

CoverReport coverSearch(const std::vector<CandidateSubset>& families, unsigned workers = 1);

// Per-path plan for a KRP-by-SNC relay attempt on G0: where the key of
// path i originates (0 = u_i^1, 1..4 subgraphs, 5 = u_i^2), whether that
// subgraph copies the key of the other path crossing it, and the time slot
// of each boundary edge e_i^<gamma>.
struct RelayPathPlan {
  int origin = 0;
  bool derived = false;
  std::array<int, 5> time{};
};

using RelayPlan = std::array<RelayPathPlan, 9>;

class RelayPlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RelayPlan shippedRelayPlan();
RelayPlan userSeededPlan();
LinearProtocol buildRelayFixture(const RelayPlan& plan);

nlohmann::ordered_json toJson(const RequirementReport& r);
nlohmann::ordered_json toJson(const PathConsistencyReport& r);
nlohmann::ordered_json toJson(const CoverReport& r, const std::vector<CandidateSubset>& families);

}  // namespace krlab::g0
