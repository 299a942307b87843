#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace krlab {

using NodeId = std::string;
using EdgeId = std::string;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum Channel : std::uint8_t { kLKS = 1, kPC = 2, kSC = 4 };
constexpr std::uint8_t kAllChannels = kLKS | kPC | kSC;

struct Edge {
  EdgeId id;
  NodeId a;
  NodeId b;
  std::uint8_t channels = kAllChannels;

  bool touches(const NodeId& v) const { return a == v || b == v; }
  const NodeId& other(const NodeId& v) const { return v == a ? b : a; }
};

struct UserPair {
  int index = 0;
  NodeId first;
  NodeId second;
  // Endpoint (1 or 2) acting as sender a_i in message settings.
  int senderEnd = 1;

  const NodeId& end(int j) const { return j == 1 ? first : second; }
  const NodeId& sender() const { return end(senderEnd); }
  const NodeId& receiver() const { return end(3 - senderEnd); }
};

struct TopologySpec {
  std::vector<NodeId> nodes;
  std::vector<Edge> edges;
  std::vector<UserPair> users;
};

class Graph {
 public:
  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<UserPair>& userPairs() const { return users_; }

  bool hasNode(const NodeId& v) const { return nodeIndex_.count(v) != 0; }
  bool hasEdge(const EdgeId& e) const { return edgeIndex_.count(e) != 0; }
  std::size_t nodeIndex(const NodeId& v) const;
  std::size_t edgeIndex(const EdgeId& e) const;
  const Edge& edge(const EdgeId& e) const { return edges_[edgeIndex(e)]; }
  // Incident edge indices in declaration order.
  const std::vector<std::size_t>& incident(const NodeId& v) const;
  const UserPair* pair(int index) const;

  // Deterministic BFS shortest path (edge ids) over edges carrying `channel`.
  std::vector<EdgeId> shortestPath(const NodeId& from, const NodeId& to,
                                   std::uint8_t channel) const;

  friend Graph buildGraph(const TopologySpec& spec);

 private:
  std::vector<NodeId> nodes_;
  std::vector<Edge> edges_;
  std::vector<UserPair> users_;
  std::map<NodeId, std::size_t> nodeIndex_;
  std::map<EdgeId, std::size_t> edgeIndex_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

Graph buildGraph(const TopologySpec& spec);

struct WiretapCollection {
  std::vector<std::vector<EdgeId>> members;

  static WiretapCollection emptyOnly() { return {{{}}}; }
};

void validateWiretap(const Graph& g, const WiretapCollection& w);

// (s, i, alpha) coordinates of G0 nodes and edges.
struct SubgraphId {
  int s = 1;
  int i = 0;
  auto operator<=>(const SubgraphId&) const = default;
};

class G0Labels {
 public:
  G0Labels();

  static int mod9(int x) { return ((x % 9) + 9) % 9; }

  NodeId node(int s, int i, int alpha) const;
  NodeId user(int i, int j) const;
  // Canonical id of edge e_{s,i}^{(alpha)}, alpha in 0..10.
  EdgeId edge(int s, int i, int alpha) const;
  // e_i^<gamma>.
  EdgeId pathEdge(int i, int gamma) const;

  // Subgraph owning an internal node; nullopt for users and unknown ids.
  std::optional<SubgraphId> subgraphOf(const NodeId& v) const;
  // Entity positions along standard path i: 0 = u_i^1, 1..4 subgraphs, 5 = u_i^2.
  std::vector<SubgraphId> pathSubgraphs(int i) const;
  // Position of node v on path i (0..5) or -1.
  int positionOnPath(int i, const NodeId& v) const;

  const std::vector<EdgeId>& standardEdges() const { return standard_; }
  const std::vector<SubgraphId>& subgraphs() const { return subgraphs_; }

 private:
  std::map<NodeId, SubgraphId> owner_;
  std::vector<EdgeId> standard_;
  std::vector<SubgraphId> subgraphs_;
};

struct StandardPath {
  int index = 0;
  std::vector<EdgeId> edges;
};

Graph buildG0();
StandardPath standardPath(const G0Labels& labels, int i);
// Walks the path; throws when the edges do not chain from u_i^1 to u_i^2.
std::vector<NodeId> walkStandardPath(const Graph& g, const G0Labels& labels, int i);

TopologySpec topologyFromJson(const nlohmann::json& j);
nlohmann::ordered_json topologyToJson(const Graph& g);
WiretapCollection wiretapFromJson(const nlohmann::json& j);
nlohmann::ordered_json wiretapToJson(const WiretapCollection& w);

std::string channelsToString(std::uint8_t mask);

}  // namespace krlab
