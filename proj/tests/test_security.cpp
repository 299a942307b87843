#include <doctest.h>

#include <cmath>
#include <map>

#include "krlab/fixtures.hpp"
#include "krlab/security.hpp"
#include "support/random_protocol.hpp"

using namespace krlab;

namespace {

// Plain floating-point MI from joint counts, used as an independent cross-check.
double floatMI(unsigned nbits, const JointSampler& f) {
  std::map<BitKey, double> px, py;
  std::map<std::pair<BitKey, BitKey>, double> pxy;
  const double N = std::ldexp(1.0, static_cast<int>(nbits));
  for (std::uint64_t a = 0; a < (1ull << nbits); ++a) {
    BitKey x, y;
    f(a, x, y);
    px[x] += 1 / N;
    py[y] += 1 / N;
    pxy[{x, y}] += 1 / N;
  }
  double mi = 0;
  for (const auto& [k, p] : pxy) mi += p * std::log2(p / (px[k.first] * py[k.second]));
  return mi;
}

LinearProtocol sncLine() {
  TopologySpec spec{{"u1", "v", "u2"}, {{"e1", "u1", "v"}, {"e2", "v", "u2"}}, {{1, "u1", "u2", 1}}};
  LinearProtocol p;
  p.graph = std::make_shared<Graph>(buildGraph(spec));
  p.setting = Setting::SNC;
  const auto m = LinExpr::of(Variable::message(1));
  p.schedule = {Step::sc("e1", "u1", m), Step::sc("e2", "v", m)};
  p.outputs = {{1, 2, m}};
  return p;
}

}  // namespace

TEST_SUITE("secanalyzer") {

TEST_CASE("fig1 verdicts") {
  const auto p = fixtures::fig1();
  const auto ok = analyze(p, WiretapCollection::emptyOnly());
  CHECK(ok.secure());
  CHECK(ok.secrecy.members[0].viewRows == 1);  // only the announcement survives dedupe
  const auto bad = analyze(p, {{{"e1"}}});
  CHECK(bad.soundness.pass);
  CHECK_FALSE(bad.secrecy.pass);
  CHECK(bad.secrecy.members[0].leak == 1);
  CHECK(bad.secrecy.members[0].witness == std::vector<std::string>{"r[e1]"});
}

TEST_CASE("fig3b verdicts") {
  CHECK(analyze(fixtures::fig3b(), fixtures::fig3bWiretap()).secure());
  CHECK_FALSE(analyze(fixtures::fig3b(), {{{"e11", "e21"}}}).secrecy.pass);
}

TEST_CASE("fig3b variant summing r[e21] is unsound") {
  const auto p = fixtures::fig3bLiteral();
  REQUIRE(validate(p).ok());
  const auto rep = checkSoundness(symbolicExecute(p), p);
  CHECK_FALSE(rep.pass);
  CHECK(rep.pairs[0].reason == "k1 and k2 differ");
}

TEST_CASE("fig3a reduces to r1 for every length") {
  for (int n = 2; n <= 6; ++n) {
    const auto p = fixtures::fig3a(n);
    const auto t = symbolicExecute(p);
    CHECK(t.toExpr(t.output(1, 2)->vec).str() == "r[e1]");
    CHECK(analyze(p, WiretapCollection::emptyOnly()).secure());
  }
}

TEST_CASE("soundness failure reasons") {
  auto p = fixtures::fig1();
  p.outputs[1].expr = LinExpr::of(Variable::localKey("e2"));
  CHECK(checkSoundness(symbolicExecute(p), p).pairs[0].reason == "k1 and k2 differ");
  p.outputs = {{1, 1, LinExpr::one()}, {1, 2, LinExpr::one()}};
  CHECK(checkSoundness(symbolicExecute(p), p).pairs[0].reason == "key is constant");
  p.outputs.pop_back();
  CHECK(checkSoundness(symbolicExecute(p), p).pairs[0].reason == "missing output");
}

TEST_CASE("message goal") {
  const auto p = sncLine();
  CHECK(analyze(p, WiretapCollection::emptyOnly()).secure());
  CHECK_FALSE(analyze(p, {{{"e2"}}}).secrecy.pass);
  auto q = p;
  q.outputs[0].expr ^= LinExpr::one();
  CHECK_FALSE(checkSoundness(symbolicExecute(q), q).pass);
}

TEST_CASE("exact MI on small joint distributions") {
  auto same = [](std::uint64_t a, BitKey& x, BitKey& y) { x = {a & 1}; y = {a & 1}; };
  CHECK(mutualInformation(1, same).isInteger());
  CHECK(mutualInformation(1, same).integerValue() == 1);

  auto indep = [](std::uint64_t a, BitKey& x, BitKey& y) { x = {a & 1}; y = {a >> 1 & 1}; };
  CHECK(mutualInformation(2, indep).integerValue() == 0);

  // X = a AND b, Y = a: I = 1.5 - 0.75 log2 3, not an integer.
  auto andGate = [](std::uint64_t a, BitKey& x, BitKey& y) { x = {a & (a >> 1) & 1}; y = {a & 1}; };
  const auto mi = mutualInformation(2, andGate);
  CHECK_FALSE(mi.isInteger());
  CHECK(mi.approx() == doctest::Approx(floatMI(2, andGate)));
  CHECK(mi.approx() == doctest::Approx(1.5 - 0.75 * std::log2(3.0)));
  CHECK(mutualInformation(2, andGate, 3) == mi);
}

TEST_CASE("brute-force MI agrees with ranks on fixtures") {
  for (const auto& [p, member] : std::vector<std::pair<LinearProtocol, std::vector<EdgeId>>>{
           {fixtures::fig1(), {}}, {fixtures::fig1(), {"e1"}}, {fixtures::fig1(), {"e1", "e2"}},
           {fixtures::fig3b(), {"e11", "e12"}}, {fixtures::fig3b(), {"e11", "e21"}},
           {sncLine(), {}}, {sncLine(), {"e1"}}}) {
    const auto t = symbolicExecute(p);
    const auto sec = checkSecrecy(t, p, {{member}});
    const auto mi = bruteForceMI(p, member);
    REQUIRE(mi.isInteger());
    CHECK(static_cast<std::size_t>(mi.integerValue()) == sec.members[0].leak);
  }
}

TEST_CASE("brute-force MI agrees with ranks on random protocols") {
  for (std::uint64_t seed = 1000; seed < 1040; ++seed) {
    const auto rc = testing::randomProtocol(seed);
    const auto t = symbolicExecute(rc.protocol);
    const auto sec = checkSecrecy(t, rc.protocol, {{rc.member}});
    const auto mi = bruteForceMI(rc.protocol, rc.member, kDefaultOracleBound, 2);
    REQUIRE(mi.isInteger());
    CHECK(static_cast<std::size_t>(mi.integerValue()) == sec.members[0].leak);
  }
}

TEST_CASE("leak grows with the wiretap set") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto rc = testing::randomProtocol(seed);
    const auto t = symbolicExecute(rc.protocol);
    std::vector<EdgeId> grow;
    std::size_t last = checkSecrecy(t, rc.protocol, {{grow}}).members[0].leak;
    for (const auto& e : rc.protocol.graph->edges()) {
      grow.push_back(e.id);
      const std::size_t now = checkSecrecy(t, rc.protocol, {{grow}}).members[0].leak;
      CHECK(now >= last);
      last = now;
    }
  }
}

TEST_CASE("oracle bound") {
  CHECK_THROWS_AS(bruteForceMI(fixtures::fig1(), {}, 25), OracleBoundError);
  CHECK_THROWS_AS(bruteForceMI(fixtures::fig3b(), {}, 3), OracleBoundError);
  CHECK_THROWS_AS(bruteForceMI(fixtures::fig1(), {"zz"}), ParseError);
}

TEST_CASE("tamper offsets are seed independent") {
  const auto p = fixtures::fig3a(4);
  for (std::size_t step = 0; step < p.schedule.size(); ++step) {
    Perturbation pt;
    pt.step = step;
    const auto rep = checkTamperLinearity(p, pt, 128);
    CHECK(rep.linear);
  }
  Perturbation key;
  key.target = Perturbation::Target::LocalKey;
  key.edge = "e2";
  key.node = "u2";
  const auto rep = checkTamperLinearity(fixtures::fig1(), key, 100);
  CHECK(rep.linear);
  CHECK(rep.outputOffset == std::vector<bool>{false, true});
}

TEST_CASE("report json is deterministic") {
  const auto a = toJson(analyze(fixtures::fig3b(), fixtures::fig3bWiretap())).dump();
  const auto b = toJson(analyze(fixtures::fig3b(), fixtures::fig3bWiretap())).dump();
  CHECK(a == b);
}

}
