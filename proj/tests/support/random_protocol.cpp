#include "random_protocol.hpp"

#include <map>
#include <random>
#include <set>

namespace krlab::testing {

RandomCase randomProtocol(std::uint64_t seed, unsigned maxBits) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  const int nodes = 3 + static_cast<int>(pick(3));
  TopologySpec spec;
  for (int v = 0; v < nodes; ++v) spec.nodes.push_back("n" + std::to_string(v));
  int edgeCount = 0;
  std::set<std::pair<int, int>> present;
  auto addEdge = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    if (a == b || !present.insert({a, b}).second) return;
    spec.edges.push_back({"e" + std::to_string(edgeCount++), spec.nodes[a], spec.nodes[b]});
  };
  for (int v = 1; v < nodes; ++v) addEdge(static_cast<int>(pick(v)), v);  // spanning tree
  for (int extra = static_cast<int>(pick(3)); extra > 0; --extra) {
    addEdge(static_cast<int>(pick(nodes)), static_cast<int>(pick(nodes)));
  }
  const int pairs = 1 + static_cast<int>(pick(2));
  for (int i = 1; i <= pairs; ++i) {
    int a = static_cast<int>(pick(nodes));
    int b = static_cast<int>(pick(nodes - 1));
    if (b >= a) ++b;
    spec.users.push_back({i, spec.nodes[a], spec.nodes[b], 1 + static_cast<int>(pick(2))});
  }

  LinearProtocol p;
  p.graph = std::make_shared<Graph>(buildGraph(spec));
  const Setting settings[] = {Setting::KRP, Setting::SNC_PC, Setting::SNC, Setting::KRP_BY_SNC};
  p.setting = settings[pick(4)];
  p.name = "random-" + std::to_string(seed);
  const Graph& g = *p.graph;
  const std::uint8_t allowed = allowedChannels(p.setting);

  std::map<NodeId, std::vector<LinExpr>> known;
  std::map<NodeId, int> nextRandom;
  unsigned bits = 0;
  if (p.goal() == Goal::Message) {
    for (const auto& up : g.userPairs()) {
      known[up.sender()].push_back(LinExpr::of(Variable::message(up.index)));
      ++bits;
    }
  }
  std::set<EdgeId> oneShotUsed;
  auto combo = [&](const NodeId& v) {
    LinExpr e;
    if (rng() % 4 == 0) e ^= LinExpr::one();
    for (const auto& k : known[v]) {
      if (rng() % 2) e ^= k;
    }
    return e;
  };

  const int steps = 8 + static_cast<int>(pick(16));
  for (int s = 0; s < steps; ++s) {
    const Edge& e = g.edges()[pick(g.edges().size())];
    const NodeId from = rng() % 2 ? e.a : e.b;
    const NodeId to = e.other(from);
    std::vector<Step::Op> ops;
    if ((allowed & kLKS) && !oneShotUsed.count(e.id) && bits < maxBits) ops.push_back(Step::Op::LKS);
    if (allowed & kPC) ops.push_back(Step::Op::PC);
    if ((allowed & kSC) && !oneShotUsed.count(e.id)) ops.push_back(Step::Op::SC);
    if (ops.empty()) continue;
    const Step::Op op = ops[pick(ops.size())];
    if (op == Step::Op::LKS) {
      oneShotUsed.insert(e.id);
      ++bits;
      p.schedule.push_back(Step::lks(e.id, from));
      known[e.a].push_back(LinExpr::of(Variable::localKey(e.id)));
      known[e.b].push_back(LinExpr::of(Variable::localKey(e.id)));
      continue;
    }
    // Occasionally draw fresh private randomness first.
    if (bits < maxBits && rng() % 2 == 0) {
      known[from].push_back(LinExpr::of(Variable::nodeRandom(from, nextRandom[from]++)));
      ++bits;
    }
    LinExpr payload = combo(from);
    if (op == Step::Op::SC) {
      oneShotUsed.insert(e.id);
      p.schedule.push_back(Step::sc(e.id, from, payload));
    } else {
      p.schedule.push_back(Step::pc(e.id, from, payload));
    }
    known[to].push_back(payload);
  }
  for (const auto& up : g.userPairs()) {
    for (int end = 1; end <= 2; ++end) {
      const NodeId& v = up.end(end);
      if (p.goal() == Goal::Message && end == up.senderEnd) continue;
      if (bits < maxBits && rng() % 3 == 0) {
        known[v].push_back(LinExpr::of(Variable::nodeRandom(v, nextRandom[v]++)));
        ++bits;
      }
      p.outputs.push_back({up.index, end, combo(v)});
    }
  }

  RandomCase rc{std::move(p), {}};
  for (const auto& e : g.edges()) {
    if (rng() % 3 == 0) rc.member.push_back(e.id);
  }
  return rc;
}

}  // namespace krlab::testing
