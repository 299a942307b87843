#include "krlab/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace krlab {

std::size_t Graph::nodeIndex(const NodeId& v) const {
  auto it = nodeIndex_.find(v);
  if (it == nodeIndex_.end()) throw ParseError("unknown node '" + v + "'");
  return it->second;
}

std::size_t Graph::edgeIndex(const EdgeId& e) const {
  auto it = edgeIndex_.find(e);
  if (it == edgeIndex_.end()) throw ParseError("unknown edge '" + e + "'");
  return it->second;
}

const std::vector<std::size_t>& Graph::incident(const NodeId& v) const {
  return adjacency_[nodeIndex(v)];
}

const UserPair* Graph::pair(int index) const {
  for (const auto& p : users_) {
    if (p.index == index) return &p;
  }
  return nullptr;
}

std::vector<EdgeId> Graph::shortestPath(const NodeId& from, const NodeId& to,
                                        std::uint8_t channel) const {
  const std::size_t src = nodeIndex(from);
  const std::size_t dst = nodeIndex(to);
  std::vector<std::ptrdiff_t> via(nodes_.size(), -1);
  std::vector<bool> seen(nodes_.size(), false);
  std::deque<std::size_t> queue{src};
  seen[src] = true;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    if (v == dst) break;
    for (std::size_t ei : adjacency_[v]) {
      const Edge& e = edges_[ei];
      if (!(e.channels & channel)) continue;
      const std::size_t w = nodeIndex(e.other(nodes_[v]));
      if (seen[w]) continue;
      seen[w] = true;
      via[w] = static_cast<std::ptrdiff_t>(ei);
      queue.push_back(w);
    }
  }
  if (!seen[dst]) {
    throw std::runtime_error("no path from " + from + " to " + to);
  }
  std::vector<EdgeId> path;
  for (std::size_t v = dst; v != src;) {
    const Edge& e = edges_[static_cast<std::size_t>(via[v])];
    path.push_back(e.id);
    v = nodeIndex(e.other(nodes_[v]));
  }
  std::reverse(path.begin(), path.end());
  return path;
}

Graph buildGraph(const TopologySpec& spec) {
  Graph g;
  for (const auto& v : spec.nodes) {
    if (!g.nodeIndex_.emplace(v, g.nodes_.size()).second) {
      throw ParseError("duplicate node id '" + v + "'");
    }
    g.nodes_.push_back(v);
  }
  g.adjacency_.resize(g.nodes_.size());
  for (const auto& e : spec.edges) {
    if (!g.hasNode(e.a) || !g.hasNode(e.b)) {
      throw ParseError("edge '" + e.id + "' references an unknown node");
    }
    if (e.a == e.b) throw ParseError("edge '" + e.id + "' is a self-loop");
    if (e.channels == 0) throw ParseError("edge '" + e.id + "' has no channels");
    if (!g.edgeIndex_.emplace(e.id, g.edges_.size()).second) {
      throw ParseError("duplicate edge id '" + e.id + "'");
    }
    g.adjacency_[g.nodeIndex(e.a)].push_back(g.edges_.size());
    g.adjacency_[g.nodeIndex(e.b)].push_back(g.edges_.size());
    g.edges_.push_back(e);
  }
  std::set<int> seenPairs;
  for (const auto& u : spec.users) {
    if (!g.hasNode(u.first) || !g.hasNode(u.second)) {
      throw ParseError("user pair " + std::to_string(u.index) +
                       " references an unknown node");
    }
    if (u.first == u.second) {
      throw ParseError("user pair " + std::to_string(u.index) + " has equal ends");
    }
    if (u.senderEnd != 1 && u.senderEnd != 2) {
      throw ParseError("user pair sender must be endpoint 1 or 2");
    }
    if (!seenPairs.insert(u.index).second) {
      throw ParseError("duplicate user pair index " + std::to_string(u.index));
    }
    g.users_.push_back(u);
  }
  if (!g.nodes_.empty()) {
    std::vector<bool> seen(g.nodes_.size(), false);
    std::deque<std::size_t> queue{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::size_t ei : g.adjacency_[v]) {
        const std::size_t w = g.nodeIndex(g.edges_[ei].other(g.nodes_[v]));
        if (!seen[w]) {
          seen[w] = true;
          ++reached;
          queue.push_back(w);
        }
      }
    }
    if (reached != g.nodes_.size()) {
      for (std::size_t v = 0; v < seen.size(); ++v) {
        if (!seen[v]) {
          throw ParseError("graph is disconnected: '" + g.nodes_[v] +
                           "' is unreachable from '" + g.nodes_[0] + "'");
        }
      }
    }
  }
  return g;
}

void validateWiretap(const Graph& g, const WiretapCollection& w) {
  for (const auto& member : w.members) {
    for (const auto& e : member) {
      if (!g.hasEdge(e)) throw ParseError("wiretap member contains unknown edge '" + e + "'");
    }
  }
}

G0Labels::G0Labels() {
  for (int s = 1; s <= 2; ++s) {
    for (int i = 0; i < 9; ++i) {
      subgraphs_.push_back({s, i});
      for (int a = 0; a < 6; ++a) owner_[node(s, i, a)] = {s, i};
    }
  }
  for (int i = 0; i < 9; ++i) {
    for (int g = 0; g < 5; ++g) standard_.push_back(pathEdge(i, g));
  }
}

NodeId G0Labels::node(int s, int i, int alpha) const {
  return "v[" + std::to_string(s) + "," + std::to_string(mod9(i)) + "," +
         std::to_string(alpha) + "]";
}

NodeId G0Labels::user(int i, int j) const {
  return "u[" + std::to_string(mod9(i)) + "," + std::to_string(j) + "]";
}

static EdgeId edgeName(int s, int i, int alpha) {
  return "e[" + std::to_string(s) + "," + std::to_string(G0Labels::mod9(i)) + "," +
         std::to_string(alpha) + "]";
}

EdgeId G0Labels::edge(int s, int i, int alpha) const {
  i = mod9(i);
  switch (alpha) {
    case 0:
      return edgeName(s, i - 1, 3);
    case 1:
      return edgeName(s, i, 1);
    case 2:
      // e_{2,2i}^{(2)} = e_{1,i}^{(1)}; 5 is the inverse of 2 mod 9.
      return s == 1 ? edgeName(1, i, 2) : edgeName(1, 5 * i, 1);
    case 3:
      return edgeName(s, i, 3);
    default:
      if (alpha < 0 || alpha > 10) throw std::out_of_range("edge label out of range");
      return edgeName(s, i, alpha);
  }
}

EdgeId G0Labels::pathEdge(int i, int gamma) const {
  switch (gamma) {
    case 0:
      return edge(1, i + 8, 2);
    case 1:
      return edge(1, i + 8, 3);
    case 2:
      return edge(1, i, 1);
    case 3:
      return edge(2, 2 * i, 3);
    case 4:
      return edge(2, 2 * i + 1, 1);
    default:
      throw std::out_of_range("path position out of range");
  }
}

std::optional<SubgraphId> G0Labels::subgraphOf(const NodeId& v) const {
  auto it = owner_.find(v);
  if (it == owner_.end()) return std::nullopt;
  return it->second;
}

std::vector<SubgraphId> G0Labels::pathSubgraphs(int i) const {
  return {{1, mod9(i + 8)}, {1, mod9(i)}, {2, mod9(2 * i)}, {2, mod9(2 * i + 1)}};
}

int G0Labels::positionOnPath(int i, const NodeId& v) const {
  if (v == user(i, 1)) return 0;
  if (v == user(i, 2)) return 5;
  auto sg = subgraphOf(v);
  if (!sg) return -1;
  auto subs = pathSubgraphs(i);
  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (subs[k] == *sg) return static_cast<int>(k) + 1;
  }
  return -1;
}

Graph buildG0() {
  G0Labels L;
  TopologySpec spec;
  for (int i = 0; i < 9; ++i) {
    spec.nodes.push_back(L.user(i, 1));
    spec.nodes.push_back(L.user(i, 2));
  }
  for (const auto& sg : L.subgraphs()) {
    for (int a = 0; a < 6; ++a) spec.nodes.push_back(L.node(sg.s, sg.i, a));
  }
  static constexpr int kInternal[7][3] = {{4, 0, 4}, {5, 2, 4}, {6, 0, 3}, {7, 4, 5},
                                          {8, 2, 1}, {9, 5, 3}, {10, 5, 1}};
  for (const auto& sg : L.subgraphs()) {
    for (const auto& [alpha, x, y] : kInternal) {
      spec.edges.push_back(
          {L.edge(sg.s, sg.i, alpha), L.node(sg.s, sg.i, x), L.node(sg.s, sg.i, y)});
    }
  }
  for (int i = 0; i < 9; ++i) {
    spec.edges.push_back({L.pathEdge(i, 0), L.user(i, 1), L.node(1, i + 8, 2)});
    spec.edges.push_back({L.pathEdge(i, 1), L.node(1, i + 8, 3), L.node(1, i, 0)});
    spec.edges.push_back({L.pathEdge(i, 2), L.node(1, i, 1), L.node(2, 2 * i, 2)});
    spec.edges.push_back({L.pathEdge(i, 3), L.node(2, 2 * i, 3), L.node(2, 2 * i + 1, 0)});
    spec.edges.push_back({L.pathEdge(i, 4), L.node(2, 2 * i + 1, 1), L.user(i, 2)});
  }
  for (int i = 0; i < 9; ++i) spec.users.push_back({i, L.user(i, 1), L.user(i, 2), 1});
  return buildGraph(spec);
}

StandardPath standardPath(const G0Labels& labels, int i) {
  StandardPath p;
  p.index = G0Labels::mod9(i);
  for (int g = 0; g < 5; ++g) p.edges.push_back(labels.pathEdge(i, g));
  return p;
}

std::vector<NodeId> walkStandardPath(const Graph& g, const G0Labels& labels, int i) {
  const StandardPath p = standardPath(labels, i);
  std::vector<NodeId> visited{labels.user(i, 1)};
  for (const auto& eid : p.edges) {
    const Edge& e = g.edge(eid);
    const NodeId& cur = visited.back();
    // Consecutive path edges meet inside a subgraph, not at a shared node.
    NodeId entry;
    if (e.touches(cur)) {
      entry = cur;
    } else {
      auto sg = labels.subgraphOf(cur);
      auto sa = labels.subgraphOf(e.a);
      auto sb = labels.subgraphOf(e.b);
      if (sg && sa && *sa == *sg) {
        entry = e.a;
      } else if (sg && sb && *sb == *sg) {
        entry = e.b;
      } else {
        throw std::runtime_error("standard path " + std::to_string(i) + " breaks at " + eid);
      }
    }
    visited.push_back(e.other(entry));
  }
  if (visited.back() != labels.user(i, 2)) {
    throw std::runtime_error("standard path " + std::to_string(i) + " ends at " +
                             visited.back());
  }
  return visited;
}

static std::uint8_t channelsFromJson(const nlohmann::json& j) {
  std::uint8_t mask = 0;
  for (const auto& c : j) {
    const auto s = c.get<std::string>();
    if (s == "lks" || s == "LKS") {
      mask |= kLKS;
    } else if (s == "pc" || s == "PC") {
      mask |= kPC;
    } else if (s == "sc" || s == "SC") {
      mask |= kSC;
    } else {
      throw ParseError("unknown channel kind '" + s + "'");
    }
  }
  return mask;
}

std::string channelsToString(std::uint8_t mask) {
  std::string out;
  if (mask & kLKS) out += "lks ";
  if (mask & kPC) out += "pc ";
  if (mask & kSC) out += "sc ";
  if (!out.empty()) out.pop_back();
  return out;
}

TopologySpec topologyFromJson(const nlohmann::json& j) {
  TopologySpec spec;
  try {
    for (const auto& n : j.at("nodes")) spec.nodes.push_back(n.get<std::string>());
    for (const auto& e : j.at("edges")) {
      const auto& ends = e.at("ends");
      if (ends.size() != 2) throw ParseError("edge ends must have two entries");
      Edge edge{e.at("id").get<std::string>(), ends[0].get<std::string>(),
                ends[1].get<std::string>()};
      if (e.contains("channels")) edge.channels = channelsFromJson(e.at("channels"));
      spec.edges.push_back(edge);
    }
    if (j.contains("users")) {
      for (const auto& u : j.at("users")) {
        UserPair p{u.at("i").get<int>(), u.at("u1").get<std::string>(),
                   u.at("u2").get<std::string>(), 1};
        if (u.contains("sender")) {
          const auto& s = u.at("sender");
          if (s.is_number_integer()) {
            p.senderEnd = s.get<int>();
          } else {
            const auto name = s.get<std::string>();
            if (name == p.first) {
              p.senderEnd = 1;
            } else if (name == p.second) {
              p.senderEnd = 2;
            } else {
              throw ParseError("sender '" + name + "' is not an end of pair " +
                               std::to_string(p.index));
            }
          }
        }
        spec.users.push_back(p);
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("malformed topology: ") + ex.what());
  }
  return spec;
}

nlohmann::ordered_json topologyToJson(const Graph& g) {
  nlohmann::ordered_json j;
  j["nodes"] = g.nodes();
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges()) {
    nlohmann::ordered_json je;
    je["id"] = e.id;
    je["ends"] = {e.a, e.b};
    if (e.channels != kAllChannels) {
      auto ch = nlohmann::ordered_json::array();
      if (e.channels & kLKS) ch.push_back("lks");
      if (e.channels & kPC) ch.push_back("pc");
      if (e.channels & kSC) ch.push_back("sc");
      je["channels"] = ch;
    }
    edges.push_back(je);
  }
  j["edges"] = edges;
  auto users = nlohmann::ordered_json::array();
  for (const auto& u : g.userPairs()) {
    nlohmann::ordered_json ju;
    ju["i"] = u.index;
    ju["u1"] = u.first;
    ju["u2"] = u.second;
    if (u.senderEnd != 1) ju["sender"] = u.sender();
    users.push_back(ju);
  }
  j["users"] = users;
  return j;
}

WiretapCollection wiretapFromJson(const nlohmann::json& j) {
  WiretapCollection w;
  try {
    const nlohmann::json& members = j.is_object() ? j.at("members") : j;
    for (const auto& m : members) {
      std::vector<EdgeId> member;
      for (const auto& e : m) member.push_back(e.get<std::string>());
      w.members.push_back(std::move(member));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("malformed wiretap collection: ") + ex.what());
  }
  return w;
}

nlohmann::ordered_json wiretapToJson(const WiretapCollection& w) {
  nlohmann::ordered_json j;
  j["members"] = w.members;
  return j;
}

}  // namespace krlab
