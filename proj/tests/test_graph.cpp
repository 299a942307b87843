#include <doctest.h>

#include <set>

#include "krlab/graph.hpp"

using namespace krlab;

TEST_SUITE("netmodel") {

TEST_CASE("rejects malformed topologies") {
  TopologySpec ok{{"a", "b", "c"}, {{"e1", "a", "b"}, {"e2", "b", "c"}}, {{1, "a", "c", 1}}};
  CHECK_NOTHROW(buildGraph(ok));

  auto dupNode = ok;
  dupNode.nodes.push_back("a");
  CHECK_THROWS_AS(buildGraph(dupNode), ParseError);

  auto dupEdge = ok;
  dupEdge.edges.push_back({"e1", "a", "c"});
  CHECK_THROWS_AS(buildGraph(dupEdge), ParseError);

  auto loop = ok;
  loop.edges.push_back({"e3", "c", "c"});
  CHECK_THROWS_AS(buildGraph(loop), ParseError);

  auto unknown = ok;
  unknown.edges.push_back({"e3", "c", "zz"});
  CHECK_THROWS_AS(buildGraph(unknown), ParseError);

  auto split = ok;
  split.nodes.push_back("d");
  CHECK_THROWS_AS(buildGraph(split), ParseError);

  auto sameEnds = ok;
  sameEnds.users = {{1, "a", "a", 1}};
  CHECK_THROWS_AS(buildGraph(sameEnds), ParseError);
}

TEST_CASE("shortest path is deterministic and channel aware") {
  TopologySpec spec{{"a", "b", "c", "d"},
                    {{"ab", "a", "b"}, {"bd", "b", "d"}, {"ac", "a", "c", kSC}, {"cd", "c", "d"}},
                    {}};
  const Graph g = buildGraph(spec);
  CHECK(g.shortestPath("a", "d", kPC) == std::vector<EdgeId>{"ab", "bd"});
  CHECK(g.shortestPath("a", "a", kPC).empty());
  CHECK(g.shortestPath("c", "a", kSC) == std::vector<EdgeId>{"ac"});
}

TEST_CASE("topology and wiretap json") {
  const auto j = nlohmann::json::parse(R"({
    "nodes": ["u1", "v", "u2"],
    "edges": [{"id": "e1", "ends": ["u1", "v"]}, {"id": "e2", "ends": ["v", "u2"], "channels": ["sc"]}],
    "users": [{"i": 1, "u1": "u1", "u2": "u2", "sender": "u2"}]
  })");
  const Graph g = buildGraph(topologyFromJson(j));
  CHECK(g.pair(1)->senderEnd == 2);
  CHECK(g.edge("e2").channels == kSC);
  const Graph back = buildGraph(topologyFromJson(nlohmann::json::parse(topologyToJson(g).dump())));
  CHECK(topologyToJson(back) == topologyToJson(g));

  const auto w = wiretapFromJson(nlohmann::json::parse(R"({"members": [[], ["e1"]]})"));
  REQUIRE(w.members.size() == 2);
  CHECK(w.members[1] == std::vector<EdgeId>{"e1"});
  CHECK(wiretapFromJson(nlohmann::json::parse(R"([["e2"]])")).members.size() == 1);
  CHECK_NOTHROW(validateWiretap(g, w));
  CHECK_THROWS_AS(validateWiretap(g, {{{"nope"}}}), ParseError);
  CHECK_THROWS_AS(topologyFromJson(nlohmann::json::parse(R"({"nodes": 3})")), ParseError);
}

TEST_CASE("G0 counts from enumeration") {
  const Graph g = buildG0();
  const G0Labels L;
  // 18 subgraphs of six nodes plus 9 pairs of users.
  std::set<NodeId> nodes;
  for (int s = 1; s <= 2; ++s) {
    for (int i = 0; i < 9; ++i) {
      for (int a = 0; a < 6; ++a) nodes.insert(L.node(s, i, a));
    }
  }
  for (int i = 0; i < 9; ++i) {
    nodes.insert(L.user(i, 1));
    nodes.insert(L.user(i, 2));
  }
  std::set<EdgeId> boundary;
  std::set<EdgeId> internal;
  for (int s = 1; s <= 2; ++s) {
    for (int i = 0; i < 9; ++i) {
      for (int a = 0; a < 4; ++a) boundary.insert(L.edge(s, i, a));
      for (int a = 4; a <= 10; ++a) internal.insert(L.edge(s, i, a));
    }
  }
  CHECK(nodes.size() == 126);
  CHECK(boundary.size() == 45);
  CHECK(internal.size() == 126);
  CHECK(g.nodes().size() == nodes.size());
  CHECK(g.edges().size() == boundary.size() + internal.size());
  CHECK(L.standardEdges().size() == 45);
  CHECK(std::set<EdgeId>(L.standardEdges().begin(), L.standardEdges().end()) == boundary);
}

TEST_CASE("G0 boundary identities") {
  const G0Labels L;
  for (int i = 0; i < 9; ++i) {
    CHECK(L.edge(1, i, 0) == L.edge(1, i - 1, 3));
    CHECK(L.edge(2, 2 * i, 2) == L.edge(1, i, 1));
    CHECK(L.pathEdge(i, 0) == L.edge(1, i + 8, 2));
    CHECK(L.pathEdge(i, 4) == L.edge(2, 2 * i + 1, 1));
  }
}

TEST_CASE("every standard path walks from u1 to u2") {
  const Graph g = buildG0();
  const G0Labels L;
  for (int i = 0; i < 9; ++i) {
    const auto walk = walkStandardPath(g, L, i);
    REQUIRE(walk.size() == 6);
    CHECK(walk.front() == L.user(i, 1));
    CHECK(walk.back() == L.user(i, 2));
    const auto subs = L.pathSubgraphs(i);
    for (int k = 1; k <= 4; ++k) {
      CHECK(L.subgraphOf(walk[k]) == subs[k - 1]);
      CHECK(L.positionOnPath(i, walk[k]) == k);
    }
  }
  // Each subgraph lies on exactly two standard paths.
  std::map<SubgraphId, int> hits;
  for (int i = 0; i < 9; ++i) {
    for (const auto& sg : L.pathSubgraphs(i)) ++hits[sg];
  }
  CHECK(hits.size() == 18);
  for (const auto& [sg, n] : hits) CHECK(n == 2);
}

}
