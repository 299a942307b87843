#include <doctest.h>

#include <set>

#include "krlab/g0.hpp"
#include "krlab/transforms.hpp"

using namespace krlab;
using namespace krlab::g0;

namespace {

std::size_t publicRows(const LinearProtocol& p) {
  const auto t = symbolicExecute(p);
  return buildAdversaryView(t, p, {}).rows.rowCount();
}

}  // namespace

TEST_SUITE("g0") {

TEST_CASE("parity aggregates") {
  const G0Labels L;
  auto r = [&](int s, int i, int a) { return LinExpr::of(Variable::localKey(L.edge(s, i, a))); };
  for (int s = 1; s <= 2; ++s) {
    for (int i = 0; i < 9; ++i) {
      CHECK(parityAggregate(L, s, i, 0) == (r(s, i, 0) ^ r(s, i, 1)));
      CHECK(parityAggregate(L, s, i, 1) == (r(s, i, 2) ^ r(s, i, 3)));
      CHECK(lkrpParities(L, s, i).size() == 9);
    }
  }
  // The four aggregates along path i telescope to e_i^<0>.
  for (int i = 0; i < 9; ++i) CHECK(relayedKeyExpr(L, i) == LinExpr::of(Variable::localKey(L.pathEdge(i, 0))));
}

TEST_CASE("L_KRP^m is sound and secret") {
  const auto p = buildLkrp();
  REQUIRE(validate(p).ok());
  const auto rep = verifyLkrp();
  CHECK(rep.soundness.pass);
  CHECK(rep.soundness.keyRank == 9);
  CHECK(rep.secrecy.pass);
  CHECK(rep.secrecy.members[0].leak == 0);
  CHECK(publicRows(p) == 162);
  const G0Labels L;
  const auto t = symbolicExecute(p);
  for (int i = 0; i < 9; ++i) {
    CHECK(t.toExpr(t.output(i, 2)->vec) == LinExpr::of(Variable::localKey(L.edge(1, i + 8, 2))));
  }
}

TEST_CASE("interactive construction yields the same keys") {
  const auto a = symbolicExecute(buildLkrp());
  const auto b = symbolicExecute(buildLkrpInteractive());
  for (int i = 0; i < 9; ++i) {
    for (int end = 1; end <= 2; ++end) {
      CHECK(a.toExpr(a.output(i, end)->vec) == b.toExpr(b.output(i, end)->vec));
    }
  }
  CHECK(analyze(buildLkrpInteractive(), WiretapCollection::emptyOnly()).secure());
}

TEST_CASE("isG0") {
  CHECK(isG0(buildG0()));
  auto spec = TopologySpec{};
  const Graph g = buildG0();
  spec.nodes = g.nodes();
  spec.edges = g.edges();
  spec.edges.erase(spec.edges.begin());  // an internal edge
  spec.users = g.userPairs();
  CHECK_FALSE(isG0(buildGraph(spec)));
}

TEST_CASE("diagnostics refuse non-G0 input") {
  TopologySpec spec{{"a", "b"}, {{"e", "a", "b"}}, {{0, "a", "b", 1}}};
  LinearProtocol p;
  p.graph = std::make_shared<Graph>(buildGraph(spec));
  p.setting = Setting::KRP_BY_SNC;
  CHECK_THROWS_AS(checkRequirements(p), NotG0Error);
  CHECK_THROWS_AS(checkPathConsistency(p), NotG0Error);
  CHECK_THROWS_AS(checkRequirements(buildLkrp()), NotG0Error);  // KRP, not KRP-by-SNC
}

TEST_CASE("family has 77 members satisfying items 2 to 4") {
  const auto fam = subsetFamilies();
  CHECK(fam.size() == 77);
  std::set<std::string> tags;
  for (const auto& c : fam) {
    tags.insert(c.tag);
    const auto res = checkItems234(c);
    CHECK_MESSAGE(res.ok, c.tag << ": " << res.violation);
  }
  CHECK(tags.size() == 77);
}

TEST_CASE("item checks reject bad subsets") {
  CandidateSubset all{"all", {}};
  all.allowed.fill(0x1f);
  CHECK_FALSE(checkItems234(all).ok);

  // e_0^<1> and e_1^<0> without their partners e_0^<2>, e_1^<1>.
  CandidateSubset c{"item3", {}};
  c.allowed[0] = 1u << 1;
  c.allowed[1] = 1u << 0;
  const auto res = checkItems234(c);
  CHECK_FALSE(res.ok);
  CHECK(res.violation.rfind("item 3", 0) == 0);

  CandidateSubset d{"item4", {}};
  d.allowed[0] = 1u << 3;
  d.allowed[5] = 1u << 2;
  CHECK(checkItems234(d).violation.rfind("item 4", 0) == 0);
}

TEST_CASE("cover search is exhaustive and worker independent") {
  const auto fam = subsetFamilies();
  const auto one = coverSearch(fam, 1);
  CHECK(one.sequences == 1953125);
  CHECK(one.covered == one.sequences);
  CHECK(one.uncovered.empty());
  const auto three = coverSearch(fam, 3);
  CHECK(three.covered == one.covered);
  CHECK(three.familyHits == one.familyHits);

  // Dropping E4 exposes uncovered sequences.
  std::vector<CandidateSubset> noE4(fam.begin(), fam.end() - 3);
  const auto partial = coverSearch(noE4, 1);
  CHECK(partial.covered < partial.sequences);
  CHECK_FALSE(partial.uncovered.empty());
}

TEST_CASE("user-seeded store-and-forward deadlocks") {
  CHECK_THROWS_AS(buildRelayFixture(userSeededPlan()), RelayPlanError);
}

TEST_CASE("relay fixture diagnostics") {
  const auto p = buildRelayFixture(shippedRelayPlan());
  REQUIRE(validate(p).ok());
  CHECK((p.setting == Setting::KRP_BY_SNC));

  const auto pc = checkPathConsistency(p);
  CHECK(pc.allConsistent());
  CHECK(pc.allOrderConformant());
  for (const auto& path : pc.paths) {
    for (const auto& e : path.edges) CHECK(e.d == 0);
  }

  const auto req = checkRequirements(p);
  CHECK(req.subgraphs.size() == 18);
  CHECK(req.satisfyingAll() == 0);

  // No sound KRP-by-SNC exists on G0; this one fails only through the two copied keys.
  const auto rep = analyze(p, WiretapCollection::emptyOnly());
  CHECK(rep.secrecy.pass);
  CHECK_FALSE(rep.soundness.pass);
  CHECK(rep.soundness.keyRank == 7);
  int copied = 0;
  for (const auto& ps : rep.soundness.pairs) copied += !ps.pass;
  CHECK(copied == 2);
}

TEST_CASE("lksToSc image of L_KRP^m is a G0 protocol in SNC_PC") {
  const auto img = lksToSc(buildLkrp()).protocol;
  CHECK(isG0(*img.graph));
  CHECK(analyze(img, WiretapCollection::emptyOnly()).secure());
}

}
