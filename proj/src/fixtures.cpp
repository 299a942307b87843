#include "krlab/fixtures.hpp"

#include <stdexcept>

namespace krlab::fixtures {

namespace {

LinExpr r(const std::string& e) { return LinExpr::of(Variable::localKey(e)); }

void announce(LinearProtocol& p, const NodeId& v, const LinExpr& value) {
  for (std::size_t ei : p.graph->incident(v)) {
    p.schedule.push_back(Step::pc(p.graph->edges()[ei].id, v, value));
  }
}

}  // namespace

LinearProtocol fig1() {
  TopologySpec spec;
  spec.nodes = {"u1", "v", "u2"};
  spec.edges = {{"e1", "u1", "v"}, {"e2", "v", "u2"}};
  spec.users = {{1, "u1", "u2", 1}};
  LinearProtocol p;
  p.name = "fig1";
  p.graph = std::make_shared<Graph>(buildGraph(spec));
  p.setting = Setting::KRP;
  p.schedule.push_back(Step::lks("e1", "v"));
  p.schedule.push_back(Step::lks("e2", "v"));
  const LinExpr dr = r("e1") ^ r("e2");
  announce(p, "v", dr);
  p.outputs.push_back({1, 1, r("e1")});
  p.outputs.push_back({1, 2, r("e2") ^ dr});
  return p;
}

LinearProtocol fig3a(int n) {
  if (n < 2) throw std::invalid_argument("fig3a needs at least two edges");
  auto node = [n](int k) -> NodeId {
    if (k == 0) return "u1";
    if (k == n) return "u2";
    return "v" + std::to_string(k);
  };
  auto edge = [](int k) { return "e" + std::to_string(k); };
  TopologySpec spec;
  for (int k = 0; k <= n; ++k) spec.nodes.push_back(node(k));
  for (int k = 1; k <= n; ++k) spec.edges.push_back({edge(k), node(k - 1), node(k)});
  spec.users = {{1, "u1", "u2", 1}};
  LinearProtocol p;
  p.name = "fig3a-n" + std::to_string(n);
  p.graph = std::make_shared<Graph>(buildGraph(spec));
  p.setting = Setting::KRP;
  for (int k = 1; k <= n; ++k) p.schedule.push_back(Step::lks(edge(k), node(k)));
  LinExpr k2 = r(edge(n));
  for (int k = 1; k < n; ++k) {
    const LinExpr dr = r(edge(k)) ^ r(edge(k + 1));
    announce(p, node(k), dr);
    // Forward towards u2 beyond the relay's own edges.
    for (int h = k + 1; h < n; ++h) p.schedule.push_back(Step::pc(edge(h + 1), node(h), dr));
    k2 ^= dr;
  }
  p.outputs.push_back({1, 1, r(edge(1))});
  p.outputs.push_back({1, 2, k2});
  return p;
}

static LinearProtocol fig3bWith(bool literalSum) {
  TopologySpec spec;
  spec.nodes = {"u1", "v1", "v2", "u2"};
  spec.edges = {{"e11", "u1", "v1"}, {"e12", "v1", "u2"}, {"e21", "u1", "v2"}, {"e22", "v2", "u2"}};
  spec.users = {{1, "u1", "u2", 1}};
  LinearProtocol p;
  p.name = literalSum ? "fig3b-literal" : "fig3b";
  p.graph = std::make_shared<Graph>(buildGraph(spec));
  p.setting = Setting::KRP;
  for (const char* e : {"e11", "e12", "e21", "e22"}) {
    p.schedule.push_back(Step::lks(e, std::string(e)[1] == '1' ? "v1" : "v2"));
  }
  const LinExpr dr1 = r("e11") ^ r("e12");
  const LinExpr dr2 = r("e21") ^ r("e22");
  announce(p, "v1", dr1);
  announce(p, "v2", dr2);
  p.outputs.push_back({1, 1, r("e11") ^ r("e21")});
  if (literalSum) {
    p.outputs.push_back({1, 2, (r("e21") ^ dr1) ^ (r("e22") ^ dr2)});
  } else {
    p.outputs.push_back({1, 2, (r("e12") ^ dr1) ^ (r("e22") ^ dr2)});
  }
  return p;
}

LinearProtocol fig3b() { return fig3bWith(false); }
LinearProtocol fig3bLiteral() { return fig3bWith(true); }

WiretapCollection fig3bWiretap() { return {{{"e11", "e12"}, {"e21", "e22"}}}; }

}  // namespace krlab::fixtures
