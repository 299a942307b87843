#include "krlab/g0.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>

namespace krlab::g0 {

namespace {

LinExpr r(const EdgeId& e) { return LinExpr::of(Variable::localKey(e)); }

std::shared_ptr<const Graph> g0Graph() {
  static const auto g = std::make_shared<const Graph>(buildG0());
  return g;
}

// Internal edges of a butterfly subgraph as (alpha, endpoint alpha, endpoint alpha).
constexpr int kInternal[7][3] = {{4, 0, 4}, {5, 2, 4}, {6, 0, 3}, {7, 4, 5},
                                 {8, 2, 1}, {9, 5, 3}, {10, 5, 1}};

void route(LinearProtocol& p, const NodeId& from, const NodeId& to, const LinExpr& value) {
  NodeId at = from;
  for (const auto& e : p.graph->shortestPath(from, to, kPC)) {
    p.schedule.push_back(Step::pc(e, at, value));
    at = p.graph->edge(e).other(at);
  }
}

}  // namespace

std::vector<Parity> lkrpParities(const G0Labels& L, int s, int i) {
  auto R = [&](int alpha) { return r(L.edge(s, i, alpha)); };
  return {
      {"p[v0,1]", 0, R(0) ^ R(4)},
      {"p[v0,2]", 0, R(4) ^ R(6)},
      {"p[v1]", 1, R(8) ^ R(10) ^ R(1)},
      {"p[v2,1]", 2, R(5) ^ R(8)},
      {"p[v2,2]", 2, R(2) ^ R(5)},
      {"p[v3]", 3, R(6) ^ R(9) ^ R(3)},
      {"p[v4]", 4, R(4) ^ R(5) ^ R(7)},
      {"p[v5,1]", 5, R(7) ^ R(10)},
      {"p[v5,2]", 5, R(7) ^ R(9)},
  };
}

static const std::set<std::string>& aggregateMembers(int which) {
  static const std::set<std::string> p0{"p[v0,1]", "p[v4]", "p[v2,1]", "p[v5,1]", "p[v1]"};
  static const std::set<std::string> p1{"p[v2,2]", "p[v4]", "p[v0,2]", "p[v5,2]", "p[v3]"};
  return which == 0 ? p0 : p1;
}

LinExpr parityAggregate(const G0Labels& L, int s, int i, int which) {
  LinExpr sum;
  for (const auto& p : lkrpParities(L, s, i)) {
    if (aggregateMembers(which).count(p.name)) sum ^= p.value;
  }
  return sum;
}

LinExpr relayedKeyExpr(const G0Labels& L, int i) {
  return parityAggregate(L, 2, 2 * i, 1) ^ parityAggregate(L, 1, i + 8, 1) ^
         parityAggregate(L, 1, i, 0) ^ parityAggregate(L, 2, 2 * i + 1, 0) ^
         r(L.edge(2, 2 * i + 1, 1));
}

// Pair whose k^2 consumes aggregate `which` of subgraph (s,i).
static int consumerOf(int s, int i, int which) {
  if (s == 1) return G0Labels::mod9(which == 0 ? i : i + 1);
  return G0Labels::mod9(which == 0 ? 5 * (i - 1) : 5 * i);
}

LinearProtocol buildLkrp() {
  const G0Labels L;
  LinearProtocol p;
  p.name = "lkrp-m";
  p.graph = g0Graph();
  p.setting = Setting::KRP;
  for (const auto& e : p.graph->edges()) p.schedule.push_back(Step::lks(e.id, e.a));
  for (const auto& sg : L.subgraphs()) {
    for (const auto& par : lkrpParities(L, sg.s, sg.i)) {
      for (int which = 0; which < 2; ++which) {
        if (!aggregateMembers(which).count(par.name)) continue;
        route(p, L.node(sg.s, sg.i, par.alpha), L.user(consumerOf(sg.s, sg.i, which), 2),
              par.value);
      }
    }
  }
  for (int i = 0; i < 9; ++i) {
    p.outputs.push_back({i, 1, r(L.edge(1, i + 8, 2))});
    p.outputs.push_back({i, 2, relayedKeyExpr(L, i)});
  }
  return p;
}

LinearProtocol buildLkrpInteractive() {
  const G0Labels L;
  LinearProtocol p;
  p.name = "lkrp-interactive";
  p.graph = g0Graph();
  p.setting = Setting::KRP;
  for (const auto& e : L.standardEdges()) p.schedule.push_back(Step::lks(e, p.graph->edge(e).a));
  struct Emulated {
    int alpha, from, to;
    bool a, b;
  };
  // Modified butterfly carrying a = r[e0] from v0 and b = r[e2] from v2.
  static constexpr Emulated kSends[7] = {{6, 0, 3, true, false},  {4, 0, 4, true, false},
                                         {8, 2, 1, false, true},  {5, 2, 4, false, true},
                                         {7, 4, 5, true, true},   {10, 5, 1, true, true},
                                         {9, 5, 3, true, true}};
  for (const auto& sg : L.subgraphs()) {
    const LinExpr a = r(L.edge(sg.s, sg.i, 0));
    const LinExpr b = r(L.edge(sg.s, sg.i, 2));
    for (const auto& t : kSends) {
      LinExpr value;
      if (t.a) value ^= a;
      if (t.b) value ^= b;
      const EdgeId e = L.edge(sg.s, sg.i, t.alpha);
      const NodeId from = L.node(sg.s, sg.i, t.from);
      p.schedule.push_back(Step::lks(e, from));
      p.schedule.push_back(Step::pc(e, from, value ^ r(e)));
    }
  }
  for (int i = 0; i < 9; ++i) {
    const NodeId dst = L.user(i, 2);
    const LinExpr ann[4] = {
        r(L.edge(1, i + 8, 2)) ^ r(L.edge(1, i, 0)),
        r(L.edge(1, i, 0)) ^ r(L.edge(2, 2 * i, 2)),
        r(L.edge(2, 2 * i, 2)) ^ r(L.edge(2, 2 * i + 1, 0)),
        r(L.edge(2, 2 * i + 1, 0)) ^ r(L.edge(2, 2 * i + 1, 1)),
    };
    route(p, L.node(1, i + 8, 3), dst, ann[0]);
    route(p, L.node(1, i, 1), dst, ann[1]);
    route(p, L.node(2, 2 * i, 3), dst, ann[2]);
    route(p, L.node(2, 2 * i + 1, 1), dst, ann[3]);
    p.outputs.push_back({i, 1, r(L.edge(1, i + 8, 2))});
    p.outputs.push_back({i, 2, ann[0] ^ ann[1] ^ ann[2] ^ ann[3] ^ r(L.edge(2, 2 * i + 1, 1))});
  }
  return p;
}

SecurityReport verifyLkrp(const WiretapCollection& w) { return analyze(buildLkrp(), w); }

bool isG0(const Graph& g) {
  const Graph& ref = *g0Graph();
  if (g.nodes().size() != ref.nodes().size() || g.edges().size() != ref.edges().size()) return false;
  for (const auto& v : ref.nodes()) {
    if (!g.hasNode(v)) return false;
  }
  for (const auto& e : ref.edges()) {
    if (!g.hasEdge(e.id)) return false;
    const Edge& o = g.edge(e.id);
    if (!((o.a == e.a && o.b == e.b) || (o.a == e.b && o.b == e.a))) return false;
  }
  return true;
}

namespace {

struct ScUse {
  std::size_t position;
  std::size_t step;
  NodeId sender;
  NodeId receiver;
};

struct G0Context {
  Transcript t;
  std::map<EdgeId, ScUse> sc;
};

G0Context prepare(const LinearProtocol& p) {
  if (!isG0(*p.graph)) throw NotG0Error("protocol graph is not G0");
  if (p.setting != Setting::KRP_BY_SNC) {
    throw NotG0Error("diagnostics need a KRP_BY_SNC protocol, got " + toString(p.setting));
  }
  G0Context c{symbolicExecute(p), {}};
  std::size_t pos = 0;
  for (std::size_t k = 0; k < c.t.steps.size(); ++k) {
    const auto& s = c.t.steps[k];
    if (s.op == Step::Op::PC) continue;
    c.sc[s.edge] = {pos++, k, s.sender, s.receiver};
  }
  return c;
}

gf2::BitMatrix single(const gf2::BitVector& v, std::size_t n) {
  gf2::BitMatrix m(n);
  m.addRow(v.prefix(n));
  return m;
}

}  // namespace

std::size_t RequirementReport::satisfyingAll() const {
  return static_cast<std::size_t>(std::count_if(subgraphs.begin(), subgraphs.end(),
                                                [](const auto& s) { return s.all(); }));
}

RequirementReport checkRequirements(const LinearProtocol& p) {
  const G0Context c = prepare(p);
  const G0Labels L;
  const std::size_t n = c.t.vars();
  RequirementReport rep;
  for (const auto& sg : L.subgraphs()) {
    SubgraphRequirements sr;
    sr.id = sg;
    std::array<const ScUse*, 4> use{};
    for (int a = 0; a < 4; ++a) {
      const EdgeId e = L.edge(sg.s, sg.i, a);
      auto it = c.sc.find(e);
      if (it == c.sc.end()) {
        sr.evaluable = false;
        sr.note += (sr.note.empty() ? "" : "; ") + e + " unused";
        continue;
      }
      use[a] = &it->second;
      sr.usePosition[a] = it->second.position;
      sr.sender[a] = it->second.sender;
      sr.receiver[a] = it->second.receiver;
    }
    if (!sr.evaluable) {
      rep.subgraphs.push_back(sr);
      continue;
    }
    auto S = [&](int a) { return single(c.t.steps[use[a]->step].vec, n); };
    auto inside = [&](const NodeId& v) {
      auto o = L.subgraphOf(v);
      return o && *o == sg;
    };
    sr.dim01 = gf2::intersectionDim(S(0), S(1));
    sr.dim23 = gf2::intersectionDim(S(2), S(3));
    sr.dim02 = gf2::intersectionDim(S(0), S(2));
    sr.r1 = sr.dim01 == 1 && sr.dim23 == 1;
    sr.r2 = sr.dim02 == 0;
    auto later = [&](int x, int y) { return use[x]->position > use[y]->position ? x : y; };
    sr.r3 = inside(use[later(0, 1)]->sender) && inside(use[later(2, 3)]->sender);
    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return use[x]->position < use[y]->position; });
    sr.r4 = inside(use[order[2]]->receiver);
    rep.subgraphs.push_back(sr);
  }
  return rep;
}

bool PathConsistency::consistent() const {
  return evaluable && std::all_of(edges.begin(), edges.end(),
                                  [](const auto& e) { return e.used && e.consistent; });
}

bool PathConsistencyReport::allConsistent() const {
  return std::all_of(paths.begin(), paths.end(), [](const auto& p) { return p.consistent(); });
}

bool PathConsistencyReport::allOrderConformant() const {
  return std::all_of(paths.begin(), paths.end(),
                     [](const auto& p) { return p.orderConformant(); });
}

PathConsistencyReport checkPathConsistency(const LinearProtocol& p) {
  const G0Context c = prepare(p);
  const G0Labels L;
  const std::size_t n = c.t.vars();
  PathConsistencyReport rep;
  for (int i = 0; i < 9; ++i) {
    PathConsistency pc;
    pc.path = i;
    const TranscriptOutput* key = c.t.output(i, 1);
    if (!key) key = c.t.output(i, 2);
    for (int g = 0; g < 5; ++g) {
      auto& pe = pc.edges[g];
      pe.edge = L.pathEdge(i, g);
      auto it = c.sc.find(pe.edge);
      if (it == c.sc.end()) {
        pc.evaluable = false;
        continue;
      }
      pe.used = true;
      pe.position = it->second.position;
      pe.senderPosition = L.positionOnPath(i, it->second.sender);
      const auto& vec = c.t.steps[it->second.step].vec;
      if (key) {
        pe.consistent = vec.prefix(n) == key->vec.prefix(n);
        pe.d = vec.get(n) != key->vec.get(n);
      }
    }
    if (!key) pc.evaluable = false;
    if (pc.evaluable) {
      pc.firstGamma = 0;
      for (int g = 1; g < 5; ++g) {
        if (pc.edges[g].position < pc.edges[pc.firstGamma].position) pc.firstGamma = g;
      }
      const int f = pc.firstGamma;
      pc.leftChain = pc.rightChain = pc.flowDirections = true;
      for (int g = f - 1; g >= 0; --g) {
        pc.leftChain = pc.leftChain && pc.edges[g + 1].position < pc.edges[g].position;
        pc.flowDirections = pc.flowDirections && pc.edges[g].senderPosition == g + 1;
      }
      for (int g = f + 1; g < 5; ++g) {
        pc.rightChain = pc.rightChain && pc.edges[g - 1].position < pc.edges[g].position;
        pc.flowDirections = pc.flowDirections && pc.edges[g].senderPosition == g;
      }
    }
    rep.paths.push_back(pc);
  }
  return rep;
}

std::vector<EdgeId> CandidateSubset::edges(const G0Labels& L) const {
  std::vector<EdgeId> out;
  for (int i = 0; i < 9; ++i) {
    for (int g = 0; g < 5; ++g) {
      if (allowed[i] >> g & 1u) out.push_back(L.pathEdge(i, g));
    }
  }
  return out;
}

namespace {

constexpr std::uint8_t mask(std::initializer_list<int> gammas) {
  std::uint8_t m = 0;
  for (int g : gammas) m |= static_cast<std::uint8_t>(1u << g);
  return m;
}

constexpr std::uint8_t kAll = 0x1f;

// Assigns `m` to indices from..to (inclusive, cyclic, empty when to = from - 1).
void fill(std::array<std::uint8_t, 9>& a, int from, int to, std::uint8_t m) {
  const int len = G0Labels::mod9(to - from + 1);
  const int count = (to - from + 1 == 9) ? 9 : len;
  for (int k = 0; k < count; ++k) a[G0Labels::mod9(from + k)] = m;
}

}  // namespace

std::vector<CandidateSubset> subsetFamilies() {
  std::vector<CandidateSubset> out;
  CandidateSubset e1{"E1", {}};
  e1.allowed.fill(mask({2, 3, 4}));
  out.push_back(e1);
  CandidateSubset e2{"E2", {}};
  e2.allowed.fill(mask({0, 1, 2}));
  out.push_back(e2);
  for (int ip = 0; ip < 9; ++ip) {
    for (int d = 1; d <= 4; ++d) {
      const int ipp = ip + d;
      CandidateSubset c;
      c.tag = "E3(" + std::to_string(ip) + "," + std::to_string(G0Labels::mod9(ipp)) + ")";
      c.allowed.fill(0);
      fill(c.allowed, ip, ip, mask({0, 1}));
      fill(c.allowed, ip + 1, ipp - 1, mask({2}));
      fill(c.allowed, ipp, ipp, mask({3, 4}));
      fill(c.allowed, ipp + 1, ip + 4, kAll);
      fill(c.allowed, ip + 5, ipp + 4, mask({0, 1, 2}));
      fill(c.allowed, ipp + 5, ip + 8, kAll);
      out.push_back(c);

      CandidateSubset rc;
      rc.tag = "E3(" + std::to_string(G0Labels::mod9(ipp)) + "," + std::to_string(ip) + ")";
      rc.allowed.fill(0);
      fill(rc.allowed, ip, ip, mask({3, 4}));
      fill(rc.allowed, ip + 1, ipp - 1, kAll);
      fill(rc.allowed, ipp, ipp, mask({0, 1}));
      fill(rc.allowed, ipp + 1, ip + 4, mask({2}));
      fill(rc.allowed, ip + 5, ipp + 4, mask({2, 3, 4}));
      fill(rc.allowed, ipp + 5, ip + 8, mask({2}));
      out.push_back(rc);
    }
  }
  for (int q = 0; q < 3; ++q) {
    CandidateSubset c;
    c.tag = "E4(" + std::to_string(q) + ")";
    for (int i = 0; i < 9; ++i) {
      const int cls = ((i - q) % 3 + 3) % 3;
      c.allowed[i] = cls == 0 ? mask({0, 1}) : cls == 1 ? mask({2, 3, 4}) : mask({3, 4});
    }
    out.push_back(c);
  }
  return out;
}

ItemsCheck checkItems234(const CandidateSubset& c) {
  auto in = [&](int i, int g) { return (c.allowed[G0Labels::mod9(i)] >> g & 1u) != 0; };
  ItemsCheck res;
  if (std::all_of(c.allowed.begin(), c.allowed.end(), [](auto m) { return m == kAll; })) {
    return {false, "item 2: subset equals the whole standard edge set"};
  }
  for (int i = 0; i < 9; ++i) {
    for (int g : {1, 2}) {
      for (int gp : {0, 1}) {
        if (in(i, g) && in(i + 1, gp) && !(in(i, 3 - g) && in(i + 1, 1 - gp))) {
          return {false, "item 3: i=" + std::to_string(i) + " gamma=" + std::to_string(g) +
                             " gamma'=" + std::to_string(gp)};
        }
      }
    }
    for (int g : {3, 4}) {
      for (int gp : {2, 3}) {
        if (in(i, g) && in(i + 5, gp) && !(in(i, 7 - g) && in(i + 5, 5 - gp))) {
          return {false, "item 4: i=" + std::to_string(i) + " gamma=" + std::to_string(g) +
                             " gamma'=" + std::to_string(gp)};
        }
      }
    }
  }
  return res;
}

CoverReport coverSearch(const std::vector<CandidateSubset>& families, unsigned workers) {
  constexpr std::uint64_t kTotal = 1953125;  // 5^9
  workers = std::max(1u, workers);
  struct Part {
    std::uint64_t covered = 0;
    std::vector<std::uint64_t> hits;
    std::vector<std::array<int, 9>> uncovered;
  };
  std::vector<Part> parts(workers);
  auto work = [&](unsigned w) {
    Part& part = parts[w];
    part.hits.assign(families.size(), 0);
    const std::uint64_t lo = kTotal * w / workers;
    const std::uint64_t hi = kTotal * (w + 1) / workers;
    std::array<int, 9> g{};
    for (std::uint64_t s = lo; s < hi; ++s) {
      std::uint64_t x = s;
      for (int i = 0; i < 9; ++i) {
        g[i] = static_cast<int>(x % 5);
        x /= 5;
      }
      bool any = false;
      for (std::size_t f = 0; f < families.size(); ++f) {
        const auto& a = families[f].allowed;
        bool ok = true;
        for (int i = 0; i < 9 && ok; ++i) ok = (a[i] >> g[i]) & 1u;
        if (ok) {
          ++part.hits[f];
          any = true;
        }
      }
      if (any) {
        ++part.covered;
      } else if (part.uncovered.size() < 16) {
        part.uncovered.push_back(g);
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  CoverReport rep;
  rep.sequences = kTotal;
  rep.familyHits.assign(families.size(), 0);
  for (const auto& part : parts) {
    rep.covered += part.covered;
    for (std::size_t f = 0; f < families.size(); ++f) rep.familyHits[f] += part.hits[f];
    for (const auto& u : part.uncovered) {
      if (rep.uncovered.size() < 16) rep.uncovered.push_back(u);
    }
  }
  return rep;
}

// ---- Relay fixtures -------------------------------------------------------

RelayPlan shippedRelayPlan() {
  RelayPlan p;
  p[0] = {5, false, {9, 8, 2, 1, 0}};
  p[1] = {5, false, {8, 7, 5, 4, 0}};
  p[2] = {5, false, {7, 6, 3, 2, 0}};
  p[3] = {3, false, {6, 5, 0, 1, 4}};
  p[4] = {4, true, {200, 4, 3, 2, 3}};
  p[5] = {3, true, {13, 12, 1, 2, 200}};
  p[6] = {5, false, {12, 11, 4, 3, 0}};
  p[7] = {5, false, {11, 10, 2, 1, 0}};
  p[8] = {5, false, {10, 9, 4, 3, 0}};
  return p;
}

RelayPlan userSeededPlan() {
  RelayPlan p;
  for (auto& path : p) path = {0, false, {0, 1, 2, 3, 4}};
  return p;
}

namespace {

// Knowledge inside one butterfly over at most two key classes: each node's
// span is a 4-bit mask over the vectors {0, a, b, a^b}.
using Span = std::uint8_t;

Span addToSpan(Span s, int v) {
  Span out = s;
  for (int x = 0; x < 4; ++x) {
    if (s >> x & 1u) out |= static_cast<Span>(1u << (x ^ v));
  }
  return out;
}

struct LocalEvent {
  bool inject;
  int alpha;
  int vec;
  int path = -1;
  int gamma = -1;
};

struct LocalMove {
  int edge;  // index into kInternal
  int from;  // alpha
  int vec;
  std::size_t beforeEvent;
};

struct SearchState {
  std::size_t idx;
  std::array<Span, 6> span;
  std::uint8_t used;

  std::uint64_t key() const {
    std::uint64_t k = idx;
    k = k << 7 | used;
    for (auto s : span) k = k << 4 | s;
    return k;
  }
};

std::optional<std::vector<LocalMove>> solveSubgraph(const std::vector<LocalEvent>& events) {
  auto settle = [&](SearchState& st) {
    while (st.idx < events.size()) {
      const auto& ev = events[st.idx];
      if (ev.inject) {
        st.span[ev.alpha] = addToSpan(st.span[ev.alpha], ev.vec);
      } else if (!(st.span[ev.alpha] >> ev.vec & 1u)) {
        return;
      }
      ++st.idx;
    }
  };
  SearchState start{0, {}, 0};
  start.span.fill(1);
  settle(start);
  struct Back {
    std::uint64_t parent;
    LocalMove move;
  };
  std::unordered_map<std::uint64_t, Back> seen;
  std::unordered_map<std::uint64_t, SearchState> states;
  std::deque<std::uint64_t> queue;
  seen.emplace(start.key(), Back{start.key(), {}});
  states.emplace(start.key(), start);
  queue.push_back(start.key());
  while (!queue.empty()) {
    const std::uint64_t k = queue.front();
    queue.pop_front();
    const SearchState st = states.at(k);
    if (st.idx == events.size()) {
      std::vector<LocalMove> moves;
      for (std::uint64_t cur = k; cur != start.key(); cur = seen.at(cur).parent) {
        moves.push_back(seen.at(cur).move);
      }
      std::reverse(moves.begin(), moves.end());
      return moves;
    }
    for (int e = 0; e < 7; ++e) {
      if (st.used >> e & 1u) continue;
      for (int dir = 0; dir < 2; ++dir) {
        const int from = kInternal[e][1 + dir];
        const int to = kInternal[e][2 - dir];
        for (int v = 1; v < 4; ++v) {
          if (!(st.span[from] >> v & 1u) || (st.span[to] >> v & 1u)) continue;
          SearchState nx = st;
          nx.used |= static_cast<std::uint8_t>(1u << e);
          nx.span[to] = addToSpan(nx.span[to], v);
          settle(nx);
          const std::uint64_t nk = nx.key();
          if (seen.count(nk)) continue;
          seen.emplace(nk, Back{k, {e, from, v, st.idx}});
          states.emplace(nk, nx);
          queue.push_back(nk);
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

LinearProtocol buildRelayFixture(const RelayPlan& plan) {
  const G0Labels L;
  const auto graph = g0Graph();

  auto entityNode = [&](int i, int pos, const EdgeId& e) -> NodeId {
    const Edge& edge = graph->edge(e);
    if (pos == 0) return L.user(i, 1);
    if (pos == 5) return L.user(i, 2);
    const SubgraphId sg = L.pathSubgraphs(i)[pos - 1];
    return L.subgraphOf(edge.a) == sg ? edge.a : edge.b;
  };
  auto alphaOf = [&](const NodeId& v) { return v[v.size() - 2] - '0'; };

  // Key class of each path: itself, or the class of the path it copies.
  std::array<int, 9> cls{};
  for (int i = 0; i < 9; ++i) {
    const auto& pp = plan[i];
    if (pp.origin < 0 || pp.origin > 5) throw RelayPlanError("origin out of range");
    if (pp.derived && (pp.origin == 0 || pp.origin == 5)) {
      throw RelayPlanError("path " + std::to_string(i) + ": users cannot copy a key");
    }
    cls[i] = i;
  }
  auto partnerAt = [&](int i, int pos) {
    const SubgraphId sg = L.pathSubgraphs(i)[pos - 1];
    for (int j = 0; j < 9; ++j) {
      if (j == i) continue;
      const auto subs = L.pathSubgraphs(j);
      if (std::find(subs.begin(), subs.end(), sg) != subs.end()) return j;
    }
    throw RelayPlanError("subgraph without a second path");
  };
  for (int round = 0; round < 9; ++round) {
    for (int i = 0; i < 9; ++i) {
      if (plan[i].derived) cls[i] = cls[partnerAt(i, plan[i].origin)];
    }
  }

  // Events per subgraph.
  std::map<SubgraphId, std::vector<std::pair<std::tuple<int, int, int>, LocalEvent>>> raw;
  std::map<SubgraphId, std::vector<int>> classesAt;
  for (int i = 0; i < 9; ++i) {
    const auto& pp = plan[i];
    for (int pos = 1; pos <= 4; ++pos) {
      const SubgraphId sg = L.pathSubgraphs(i)[pos - 1];
      auto& cl = classesAt[sg];
      if (std::find(cl.begin(), cl.end(), cls[i]) == cl.end()) cl.push_back(cls[i]);
      for (int g : {pos - 1, pos}) {
        const EdgeId e = L.pathEdge(i, g);
        const int alpha = alphaOf(entityNode(i, pos, e));
        const bool outbound = pp.origin == pos || (pp.origin < pos ? g == pos : g == pos - 1);
        raw[sg].push_back({{pp.time[g], i, g}, {!outbound, alpha, cls[i], i, g}});
      }
      if (pp.origin == pos && !pp.derived) {
        raw[sg].push_back({{-1, i, -1}, {true, -1, cls[i], i, -1}});
      }
    }
  }

  std::map<std::tuple<int, int>, std::vector<LocalMove>> movesBefore;  // (path, gamma)
  std::map<SubgraphId, NodeId> generator;
  for (auto& [sg, evs] : raw) {
    std::sort(evs.begin(), evs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    const auto& cl = classesAt[sg];
    std::vector<LocalEvent> events;
    for (auto ev : evs) {
      const auto dim = std::find(cl.begin(), cl.end(), ev.second.vec) - cl.begin();
      ev.second.vec = 1 << dim;
      events.push_back(ev.second);
    }
    std::optional<std::vector<LocalMove>> sol;
    const bool generates = std::any_of(events.begin(), events.end(),
                                       [](const auto& e) { return e.inject && e.alpha < 0; });
    for (int gen = 0; gen < 6 && !sol; ++gen) {
      auto trial = events;
      for (auto& e : trial) {
        if (e.inject && e.alpha < 0) e.alpha = gen;
      }
      sol = solveSubgraph(trial);
      if (sol && generates) generator[sg] = L.node(sg.s, sg.i, gen);
      if (!generates) break;
    }
    if (!sol) {
      throw RelayPlanError("no internal routing in subgraph (" + std::to_string(sg.s) + "," +
                           std::to_string(sg.i) + ") for the planned order");
    }
    for (const auto& m : *sol) {
      const auto& ev = events[m.beforeEvent];
      movesBefore[{ev.path, ev.gamma}].push_back(m);
    }
    // Local vectors map back to class variables through `cl`.
    classesAt[sg] = cl;
  }

  std::array<LinExpr, 9> keyOf{};
  for (int i = 0; i < 9; ++i) {
    if (plan[i].derived) continue;
    const int o = plan[i].origin;
    NodeId owner = o == 0 ? L.user(i, 1) : o == 5 ? L.user(i, 2) : generator.at(L.pathSubgraphs(i)[o - 1]);
    keyOf[i] = LinExpr::of(Variable::nodeRandom(owner, 0));
  }

  LinearProtocol p;
  p.name = "g0-relay";
  p.graph = graph;
  p.setting = Setting::KRP_BY_SNC;
  std::vector<std::tuple<int, int, int>> firing;
  for (int i = 0; i < 9; ++i) {
    for (int g = 0; g < 5; ++g) firing.emplace_back(plan[i].time[g], i, g);
  }
  std::sort(firing.begin(), firing.end());
  for (const auto& [t, i, g] : firing) {
    const auto& pp = plan[i];
    const int senderPos = pp.origin <= g ? g : g + 1;
    const EdgeId e = L.pathEdge(i, g);
    const NodeId sender = entityNode(i, senderPos, e);
    auto mv = movesBefore.find({i, g});
    if (mv != movesBefore.end()) {
      const SubgraphId sg = L.pathSubgraphs(i)[senderPos - 1];
      const auto& cl = classesAt.at(sg);
      for (const auto& m : mv->second) {
        LinExpr payload;
        for (std::size_t d = 0; d < cl.size(); ++d) {
          if (m.vec >> d & 1) payload ^= keyOf[cl[d]];
        }
        const NodeId from = L.node(sg.s, sg.i, m.from);
        p.schedule.push_back(Step::sc(L.edge(sg.s, sg.i, kInternal[m.edge][0]), from, payload));
      }
    }
    p.schedule.push_back(Step::sc(e, sender, keyOf[cls[i]]));
  }
  for (int i = 0; i < 9; ++i) {
    p.outputs.push_back({i, 1, keyOf[cls[i]]});
    p.outputs.push_back({i, 2, keyOf[cls[i]]});
  }
  const ValidationReport vr = validate(p);
  if (!vr.ok()) throw RelayPlanError("relay fixture fails validation:\n" + vr.summary());
  return p;
}

nlohmann::ordered_json toJson(const RequirementReport& r) {
  nlohmann::ordered_json j;
  auto subs = nlohmann::ordered_json::array();
  for (const auto& s : r.subgraphs) {
    nlohmann::ordered_json sj;
    sj["subgraph"] = {s.id.s, s.id.i};
    sj["evaluable"] = s.evaluable;
    if (!s.note.empty()) sj["note"] = s.note;
    if (s.evaluable) {
      sj["R1"] = s.r1;
      sj["R2"] = s.r2;
      sj["R3"] = s.r3;
      sj["R4"] = s.r4;
      sj["mi01"] = s.dim01;
      sj["mi23"] = s.dim23;
      sj["mi02"] = s.dim02;
      sj["usePosition"] = s.usePosition;
      sj["sender"] = s.sender;
      sj["receiver"] = s.receiver;
    }
    subs.push_back(sj);
  }
  j["subgraphs"] = subs;
  j["satisfyingAll"] = r.satisfyingAll();
  return j;
}

nlohmann::ordered_json toJson(const PathConsistencyReport& r) {
  nlohmann::ordered_json j;
  auto paths = nlohmann::ordered_json::array();
  for (const auto& p : r.paths) {
    nlohmann::ordered_json pj;
    pj["path"] = p.path;
    pj["evaluable"] = p.evaluable;
    pj["consistent"] = p.consistent();
    pj["firstGamma"] = p.firstGamma;
    pj["leftChain"] = p.leftChain;
    pj["rightChain"] = p.rightChain;
    pj["flowDirections"] = p.flowDirections;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : p.edges) {
      nlohmann::ordered_json ej;
      ej["edge"] = e.edge;
      ej["used"] = e.used;
      if (e.used) {
        ej["consistent"] = e.consistent;
        if (e.consistent) ej["d"] = e.d;
        ej["position"] = e.position;
        ej["senderPosition"] = e.senderPosition;
      }
      edges.push_back(ej);
    }
    pj["edges"] = edges;
    paths.push_back(pj);
  }
  j["paths"] = paths;
  j["allConsistent"] = r.allConsistent();
  j["allOrderConformant"] = r.allOrderConformant();
  return j;
}

nlohmann::ordered_json toJson(const CoverReport& r, const std::vector<CandidateSubset>& families) {
  nlohmann::ordered_json j;
  j["sequences"] = r.sequences;
  j["covered"] = r.covered;
  auto unc = nlohmann::ordered_json::array();
  for (const auto& u : r.uncovered) unc.push_back(u);
  j["uncovered"] = unc;
  nlohmann::ordered_json hits = nlohmann::ordered_json::object();
  for (std::size_t f = 0; f < families.size(); ++f) hits[families[f].tag] = r.familyHits[f];
  j["familyHits"] = hits;
  return j;
}

}  // namespace krlab::g0
