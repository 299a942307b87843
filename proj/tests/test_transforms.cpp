#include <doctest.h>

#include "krlab/fixtures.hpp"
#include "krlab/g0.hpp"
#include "krlab/security.hpp"
#include "krlab/transforms.hpp"

using namespace krlab;

namespace {

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

WiretapCollection singletonsAndEmpty(const Graph& g) {
  WiretapCollection w{{{}}};
  for (const auto& e : g.edges()) w.members.push_back({e.id});
  return w;
}

std::vector<bool> verdicts(const LinearProtocol& p, const WiretapCollection& w) {
  const auto rep = analyze(p, w);
  std::vector<bool> out{rep.soundness.pass};
  for (const auto& m : rep.secrecy.members) out.push_back(m.leak == 0);
  return out;
}

}  // namespace

TEST_SUITE("transforms") {

TEST_CASE("lks-to-sc replaces local keys by fresh initiator bits") {
  const auto res = lksToSc(fixtures::fig1());
  CHECK((res.protocol.setting == Setting::SNC_PC));
  REQUIRE(validate(res.protocol).ok());
  CHECK(res.trace.variableMap.at(Variable::localKey("e1")) ==
        LinExpr::of(Variable::nodeRandom("v", 0)));
  CHECK(res.trace.variableMap.at(Variable::localKey("e2")) ==
        LinExpr::of(Variable::nodeRandom("v", 1)));
  CHECK(res.trace.stepMap.size() == fixtures::fig1().schedule.size());
  CHECK_THROWS_AS(lksToSc(sncLine()), TransformError);
}

TEST_CASE("sc-to-otp doubles each secret step") {
  const auto src = sncLine();
  const auto res = scToOtp(src);
  CHECK((res.protocol.setting == Setting::KRP));
  CHECK((res.protocol.goal() == Goal::Message));
  CHECK(res.protocol.schedule.size() == 2 * src.schedule.size());
  CHECK(res.trace.stepMap[0] == std::vector<std::size_t>{0, 1});
  CHECK(validate(res.protocol).ok());
  CHECK_THROWS_AS(scToOtp(fixtures::fig1()), TransformError);
}

TEST_CASE("snc-to-krpbysnc turns messages into sender randomness") {
  const auto res = sncToKrpBySnc(sncLine());
  CHECK((res.protocol.setting == Setting::KRP_BY_SNC));
  REQUIRE(validate(res.protocol).ok());
  CHECK(analyze(res.protocol, WiretapCollection::emptyOnly()).secure());
  CHECK_THROWS_AS(sncToKrpBySnc(fixtures::fig1()), TransformError);
}

TEST_CASE("attach-otp carries a message over the key") {
  const auto res = attachOtpMessage(fixtures::fig1());
  CHECK((res.protocol.goal() == Goal::Message));
  REQUIRE(validate(res.protocol).ok());
  CHECK(analyze(res.protocol, WiretapCollection::emptyOnly()).secure());
  CHECK_FALSE(analyze(res.protocol, {{{"e2"}}}).secrecy.pass);

  const auto flipped = attachOtpMessage(fixtures::fig1(), {{1, 2}});
  CHECK(flipped.protocol.graph->pair(1)->senderEnd == 2);
  CHECK(analyze(flipped.protocol, WiretapCollection::emptyOnly()).secure());

  CHECK_THROWS_AS(attachOtpMessage(fixtures::fig3bLiteral()), TransformError);
  CHECK_THROWS_AS(attachOtpMessage(fixtures::fig1(), {{7, 1}}), TransformError);
  CHECK_THROWS_AS(attachOtpMessage(sncLine()), TransformError);
}

TEST_CASE("images keep the verdicts of their sources") {
  std::vector<LinearProtocol> sources{fixtures::fig1(), fixtures::fig3a(4), fixtures::fig3b()};
  for (const auto& p : sources) {
    auto w = singletonsAndEmpty(*p.graph);
    if (p.name == "fig3b") {
      for (const auto& m : fixtures::fig3bWiretap().members) w.members.push_back(m);
      w.members.push_back({"e11", "e21"});
    }
    const auto base = verdicts(p, w);
    CHECK(verdicts(lksToSc(p).protocol, w) == base);
    CHECK(verdicts(scToOtp(lksToSc(p).protocol).protocol, w) == base);
    CHECK(verdicts(attachOtpMessage(p).protocol, w) == base);
  }
  const auto snc = sncLine();
  const auto w = singletonsAndEmpty(*snc.graph);
  CHECK(verdicts(scToOtp(snc).protocol, w) == verdicts(snc, w));
}

}
