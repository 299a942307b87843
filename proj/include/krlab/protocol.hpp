#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "krlab/gf2.hpp"
#include "krlab/graph.hpp"

namespace krlab {

enum class Setting { KRP, SNC_PC, SNC, KRP_BY_SNC };
enum class Goal { RandomKey, Message };

std::string toString(Setting s);
Setting settingFromString(const std::string& s);
std::string toString(Goal g);
Goal defaultGoal(Setting s);
// Channel kinds usable in a setting.
std::uint8_t allowedChannels(Setting s);

struct Variable {
  enum class Kind { LocalKey, NodeRandom, Message };
  Kind kind = Kind::LocalKey;
  std::string name;  // edge for LocalKey, node for NodeRandom
  int index = 0;     // k for NodeRandom, pair index for Message

  static Variable localKey(EdgeId e) { return {Kind::LocalKey, std::move(e), 0}; }
  static Variable nodeRandom(NodeId v, int k) { return {Kind::NodeRandom, std::move(v), k}; }
  static Variable message(int i) { return {Kind::Message, "", i}; }

  std::string str() const;
  auto operator<=>(const Variable&) const = default;
};

struct LinExpr {
  bool constant = false;
  std::set<Variable> vars;

  static LinExpr of(const Variable& v) { return LinExpr{false, {v}}; }
  static LinExpr one() { return LinExpr{true, {}}; }

  LinExpr& operator^=(const LinExpr& o);
  friend LinExpr operator^(LinExpr a, const LinExpr& b) { return a ^= b; }
  bool operator==(const LinExpr&) const = default;

  std::string str() const;
};

LinExpr parseLinExpr(const std::string& text);

struct Step {
  enum class Op { LKS, PC, SC };
  Op op = Op::PC;
  EdgeId edge;
  NodeId from;  // initiator for LKS, sender otherwise
  LinExpr payload;

  static Step lks(EdgeId e, NodeId v) { return {Op::LKS, std::move(e), std::move(v), {}}; }
  static Step pc(EdgeId e, NodeId v, LinExpr p) {
    return {Op::PC, std::move(e), std::move(v), std::move(p)};
  }
  static Step sc(EdgeId e, NodeId v, LinExpr p) {
    return {Op::SC, std::move(e), std::move(v), std::move(p)};
  }
};

std::string toString(Step::Op op);

struct Output {
  int pair = 0;
  int end = 1;  // j of u_i^j
  LinExpr expr;
};

struct LinearProtocol {
  std::shared_ptr<const Graph> graph;
  Setting setting = Setting::KRP;
  std::optional<Goal> goalOverride;
  std::vector<Step> schedule;
  std::vector<Output> outputs;
  std::string name;

  Goal goal() const { return goalOverride.value_or(defaultGoal(setting)); }
  const Output* output(int pair, int end) const;
  NodeId outputNode(const Output& o) const;
};

struct ValidationIssue {
  std::ptrdiff_t step = -1;  // -1 for outputs and protocol-level issues
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string summary() const;
};

class InvalidProtocol : public std::runtime_error {
 public:
  explicit InvalidProtocol(ValidationReport r);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

struct TranscriptStep {
  Step::Op op;
  EdgeId edge;
  NodeId sender;
  NodeId receiver;
  gf2::BitVector vec;  // over basis plus trailing constant column
};

struct TranscriptOutput {
  int pair;
  int end;
  NodeId node;
  gf2::BitVector vec;
};

struct Transcript {
  std::vector<Variable> basis;
  std::vector<TranscriptStep> steps;
  std::vector<TranscriptOutput> outputs;

  std::size_t vars() const { return basis.size(); }
  const TranscriptOutput* output(int pair, int end) const;
  std::optional<std::size_t> indexOf(const Variable& v) const;
  LinExpr toExpr(const gf2::BitVector& vec) const;
};

struct UsageEntry {
  EdgeId edge;
  Step::Op op;
  std::size_t step;
  NodeId sender;
  NodeId receiver;
};

// One-shot uses (LKS and SC) in schedule order.
struct UsageOrder {
  std::vector<UsageEntry> uses;
  std::optional<std::size_t> position(const EdgeId& e) const;
  bool precedes(const EdgeId& a, const EdgeId& b) const;
};

struct Perturbation {
  enum class Target { Step, LocalKey };
  Target target = Target::Step;
  std::size_t step = 0;  // flipped in transit to the receiver
  EdgeId edge;           // LocalKey: r_e as delivered to `node`
  NodeId node;
  bool delta = true;
};

struct ConcreteRun {
  gf2::BitVector assignment;
  std::vector<bool> steps;    // delivered bit per step
  std::vector<bool> outputs;  // per transcript output

  bool operator==(const ConcreteRun&) const = default;
};

// Compiled message-passing form of a validated protocol: every payload and
// output is a fixed XOR of items held locally by the computing node.
class Execution {
 public:
  explicit Execution(const LinearProtocol& p);

  const ValidationReport& validation() const { return report_; }
  const Transcript& transcript() const;
  ConcreteRun run(const gf2::BitVector& assignment,
                  const std::vector<Perturbation>& perturbations = {}) const;
  ConcreteRun sample(std::uint64_t seed,
                     const std::vector<Perturbation>& perturbations = {}) const;

 private:
  struct Item {
    enum class Kind { Const, Own, Lks, Recv };
    Kind kind;
    std::size_t ref;  // basis index for Own, step index otherwise
  };
  struct Compute {
    std::size_t node;
    std::vector<std::uint32_t> items;
  };

  LinearProtocol protocol_;
  ValidationReport report_;
  Transcript transcript_;
  std::vector<NodeId> nodeNames_;
  std::vector<std::vector<Item>> items_;
  std::vector<std::optional<Compute>> stepCompute_;
  std::vector<std::size_t> stepReceiver_;
  std::vector<std::size_t> lksVar_;
  std::vector<Compute> outputCompute_;
};

ValidationReport validate(const LinearProtocol& p);
Transcript symbolicExecute(const LinearProtocol& p);
ConcreteRun sampleRun(const LinearProtocol& p, std::uint64_t seed);
UsageOrder usageOrder(const LinearProtocol& p);
bool evaluate(const gf2::BitVector& vec, const gf2::BitVector& assignment);

LinearProtocol protocolFromJson(const nlohmann::json& j, const std::string& baseDir = ".");
nlohmann::ordered_json protocolToJson(const LinearProtocol& p, bool inlineGraph = true);
nlohmann::ordered_json transcriptToJson(const Transcript& t);
std::string userLabel(int pair, int end);

}  // namespace krlab
