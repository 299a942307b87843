#include "krlab/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

namespace krlab {

using gf2::BitVector;

std::string toString(Setting s) {
  switch (s) {
    case Setting::KRP:
      return "KRP";
    case Setting::SNC_PC:
      return "SNC_PC";
    case Setting::SNC:
      return "SNC";
    case Setting::KRP_BY_SNC:
      return "KRP_BY_SNC";
  }
  return "?";
}

Setting settingFromString(const std::string& s) {
  if (s == "KRP") return Setting::KRP;
  if (s == "SNC_PC") return Setting::SNC_PC;
  if (s == "SNC") return Setting::SNC;
  if (s == "KRP_BY_SNC") return Setting::KRP_BY_SNC;
  throw ParseError("unknown setting '" + s + "'");
}

std::string toString(Goal g) { return g == Goal::RandomKey ? "randomKey" : "message"; }

Goal defaultGoal(Setting s) {
  return (s == Setting::KRP || s == Setting::KRP_BY_SNC) ? Goal::RandomKey : Goal::Message;
}

std::uint8_t allowedChannels(Setting s) {
  switch (s) {
    case Setting::KRP:
      return kLKS | kPC;
    case Setting::SNC_PC:
      return kSC | kPC;
    case Setting::SNC:
    case Setting::KRP_BY_SNC:
      return kSC;
  }
  return 0;
}

std::string toString(Step::Op op) {
  switch (op) {
    case Step::Op::LKS:
      return "lks";
    case Step::Op::PC:
      return "pc";
    case Step::Op::SC:
      return "sc";
  }
  return "?";
}

static std::uint8_t channelOf(Step::Op op) {
  switch (op) {
    case Step::Op::LKS:
      return kLKS;
    case Step::Op::PC:
      return kPC;
    case Step::Op::SC:
      return kSC;
  }
  return 0;
}

std::string Variable::str() const {
  switch (kind) {
    case Kind::LocalKey:
      return "r[" + name + "]";
    case Kind::NodeRandom:
      return "x[" + name + "," + std::to_string(index) + "]";
    case Kind::Message:
      return "m[" + std::to_string(index) + "]";
  }
  return "?";
}

LinExpr& LinExpr::operator^=(const LinExpr& o) {
  constant ^= o.constant;
  for (const auto& v : o.vars) {
    auto it = vars.find(v);
    if (it == vars.end()) {
      vars.insert(v);
    } else {
      vars.erase(it);
    }
  }
  return *this;
}

std::string LinExpr::str() const {
  std::string out;
  for (const auto& v : vars) {
    if (!out.empty()) out += " ^ ";
    out += v.str();
  }
  if (constant) out += out.empty() ? "1" : " ^ 1";
  return out.empty() ? "0" : out;
}

namespace {

std::string stripSpace(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

int parseIndex(const std::string& s, const std::string& atom) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw ParseError("bad index in atom '" + atom + "'");
  }
  return std::stoi(s);
}

Variable parseAtom(const std::string& atom) {
  if (atom.size() < 4 || atom[1] != '[' || atom.back() != ']') {
    throw ParseError("unknown atom '" + atom + "'");
  }
  const std::string inner = atom.substr(2, atom.size() - 3);
  int depth = 0;
  for (char c : inner) {
    depth += (c == '[') - (c == ']');
    if (depth < 0) throw ParseError("unbalanced brackets in '" + atom + "'");
  }
  if (depth != 0 || inner.empty()) throw ParseError("unbalanced brackets in '" + atom + "'");
  switch (atom[0]) {
    case 'r':
      return Variable::localKey(inner);
    case 'm':
      return Variable::message(parseIndex(inner, atom));
    case 'x': {
      std::size_t split = std::string::npos;
      depth = 0;
      for (std::size_t k = 0; k < inner.size(); ++k) {
        depth += (inner[k] == '[') - (inner[k] == ']');
        if (inner[k] == ',' && depth == 0) split = k;
      }
      if (split == std::string::npos || split == 0) {
        throw ParseError("node random atom needs node and index: '" + atom + "'");
      }
      return Variable::nodeRandom(inner.substr(0, split),
                                  parseIndex(inner.substr(split + 1), atom));
    }
    default:
      throw ParseError("unknown atom '" + atom + "'");
  }
}

}  // namespace

LinExpr parseLinExpr(const std::string& text) {
  const std::string s = stripSpace(text);
  if (s.empty()) throw ParseError("empty expression");
  LinExpr e;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t k = 0; k <= s.size(); ++k) {
    if (k < s.size()) {
      depth += (s[k] == '[') - (s[k] == ']');
      if (!((s[k] == '^' || s[k] == '+') && depth == 0)) continue;
    }
    const std::string atom = s.substr(start, k - start);
    start = k + 1;
    if (atom == "1") {
      e.constant ^= true;
    } else if (atom != "0") {
      e ^= LinExpr::of(parseAtom(atom));
    }
  }
  return e;
}

const Output* LinearProtocol::output(int pair, int end) const {
  for (const auto& o : outputs) {
    if (o.pair == pair && o.end == end) return &o;
  }
  return nullptr;
}

NodeId LinearProtocol::outputNode(const Output& o) const {
  const UserPair* up = graph->pair(o.pair);
  if (!up) throw ParseError("output refers to unknown user pair " + std::to_string(o.pair));
  return up->end(o.end);
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& i : issues) {
    if (i.step >= 0) {
      os << "step " << i.step << ": ";
    }
    os << i.message << "\n";
  }
  return os.str();
}

InvalidProtocol::InvalidProtocol(ValidationReport r)
    : std::runtime_error("invalid protocol:\n" + r.summary()), report_(std::move(r)) {}

const TranscriptOutput* Transcript::output(int pair, int end) const {
  for (const auto& o : outputs) {
    if (o.pair == pair && o.end == end) return &o;
  }
  return nullptr;
}

std::optional<std::size_t> Transcript::indexOf(const Variable& v) const {
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (basis[k] == v) return k;
  }
  return std::nullopt;
}

LinExpr Transcript::toExpr(const BitVector& vec) const {
  LinExpr e;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (vec.get(k)) e.vars.insert(basis[k]);
  }
  e.constant = vec.get(basis.size());
  return e;
}

std::optional<std::size_t> UsageOrder::position(const EdgeId& e) const {
  for (std::size_t k = 0; k < uses.size(); ++k) {
    if (uses[k].edge == e) return k;
  }
  return std::nullopt;
}

bool UsageOrder::precedes(const EdgeId& a, const EdgeId& b) const {
  auto pa = position(a);
  auto pb = position(b);
  return pa && pb && *pa < *pb;
}

bool evaluate(const BitVector& vec, const BitVector& assignment) {
  const std::size_t n = assignment.size();
  bool v = vec.get(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (vec.get(k) && assignment.get(k)) v = !v;
  }
  return v;
}

namespace {

// Span of a node's items with, per echelon row, the items XORed into it.
struct Knowledge {
  std::vector<BitVector> rows;
  std::vector<std::size_t> pivots;
  std::vector<std::vector<std::uint32_t>> combos;

  static void merge(std::vector<std::uint32_t>& acc, const std::vector<std::uint32_t>& add) {
    std::vector<std::uint32_t> out;
    std::set_symmetric_difference(acc.begin(), acc.end(), add.begin(), add.end(),
                                  std::back_inserter(out));
    acc.swap(out);
  }

  // Returns true when v is spanned; combo then lists the items summing to v.
  bool reduce(BitVector& v, std::vector<std::uint32_t>& combo) const {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (v.get(pivots[k])) {
        v ^= rows[k];
        merge(combo, combos[k]);
      }
    }
    return v.isZero();
  }

  void add(BitVector v, std::uint32_t item) {
    std::vector<std::uint32_t> combo;
    if (reduce(v, combo)) return;
    merge(combo, {item});
    pivots.push_back(v.lowestSet());
    rows.push_back(std::move(v));
    combos.push_back(std::move(combo));
  }
};

}  // namespace

Execution::Execution(const LinearProtocol& p) : protocol_(p) {
  const Graph& g = *p.graph;
  auto issue = [&](std::ptrdiff_t step, std::string msg) {
    report_.issues.push_back({step, std::move(msg)});
  };
  const Goal goal = p.goal();

  // Basis: messages first, then variables in order of first appearance.
  std::vector<Variable>& basis = transcript_.basis;
  std::map<Variable, std::size_t> index;
  auto note = [&](const Variable& v) {
    if (index.emplace(v, basis.size()).second) basis.push_back(v);
  };
  if (goal == Goal::Message) {
    for (const auto& up : g.userPairs()) note(Variable::message(up.index));
  }
  for (const auto& s : p.schedule) {
    if (s.op == Step::Op::LKS) {
      note(Variable::localKey(s.edge));
    } else {
      for (const auto& v : s.payload.vars) note(v);
    }
  }
  for (const auto& o : p.outputs) {
    for (const auto& v : o.expr.vars) note(v);
  }
  const std::size_t n = basis.size();

  auto toVec = [&](const LinExpr& e) {
    BitVector vec(n + 1);
    for (const auto& v : e.vars) vec.set(index.at(v));
    vec.set(n, e.constant);
    return vec;
  };

  nodeNames_ = g.nodes();
  items_.assign(nodeNames_.size(), {});
  std::vector<Knowledge> know(nodeNames_.size());
  auto addItem = [&](std::size_t node, Item item, BitVector vec) {
    const auto id = static_cast<std::uint32_t>(items_[node].size());
    items_[node].push_back(item);
    know[node].add(std::move(vec), id);
  };
  for (std::size_t v = 0; v < nodeNames_.size(); ++v) {
    addItem(v, {Item::Kind::Const, 0}, BitVector::unit(n + 1, n));
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Variable& var = basis[k];
    std::optional<NodeId> owner;
    if (var.kind == Variable::Kind::NodeRandom) {
      if (!g.hasNode(var.name)) {
        issue(-1, "variable " + var.str() + " names unknown node");
        continue;
      }
      owner = var.name;
    } else if (var.kind == Variable::Kind::Message) {
      const UserPair* up = g.pair(var.index);
      if (goal != Goal::Message) {
        issue(-1, "message variable " + var.str() + " in a random-key protocol");
      } else if (!up) {
        issue(-1, "message variable " + var.str() + " has no user pair");
      } else {
        owner = up->sender();
      }
    } else if (!g.hasEdge(var.name)) {
      issue(-1, "variable " + var.str() + " names unknown edge");
    }
    if (owner) addItem(g.nodeIndex(*owner), {Item::Kind::Own, k}, BitVector::unit(n + 1, k));
  }

  auto residualVars = [&](const BitVector& r) {
    std::string out;
    for (std::size_t k = 0; k < n; ++k) {
      if (r.get(k)) out += (out.empty() ? "" : ", ") + basis[k].str();
    }
    return out;
  };

  const std::uint8_t allowed = allowedChannels(p.setting);
  std::set<EdgeId> oneShotUsed;
  std::set<EdgeId> lksDone;
  stepCompute_.assign(p.schedule.size(), std::nullopt);
  stepReceiver_.assign(p.schedule.size(), 0);
  lksVar_.assign(p.schedule.size(), 0);
  for (std::size_t si = 0; si < p.schedule.size(); ++si) {
    const Step& s = p.schedule[si];
    const auto sidx = static_cast<std::ptrdiff_t>(si);
    if (!g.hasEdge(s.edge)) {
      issue(sidx, "unknown edge '" + s.edge + "'");
      continue;
    }
    const Edge& e = g.edge(s.edge);
    if (!e.touches(s.from)) {
      issue(sidx, "'" + s.from + "' is not an endpoint of " + s.edge);
      continue;
    }
    const std::uint8_t ch = channelOf(s.op);
    if (!(allowed & ch)) {
      issue(sidx, toString(s.op) + " channel not available in setting " + toString(p.setting));
    } else if (!(e.channels & ch)) {
      issue(sidx, "edge " + s.edge + " has no " + toString(s.op) + " channel");
    }
    if (s.op != Step::Op::PC && !oneShotUsed.insert(s.edge).second) {
      issue(sidx, toString(s.op) + " channel of " + s.edge + " used more than once");
    }
    const std::size_t from = g.nodeIndex(s.from);
    const std::size_t to = g.nodeIndex(e.other(s.from));
    stepReceiver_[si] = to;
    BitVector vec(n + 1);
    if (s.op == Step::Op::LKS) {
      lksVar_[si] = index.at(Variable::localKey(s.edge));
      vec = BitVector::unit(n + 1, lksVar_[si]);
      lksDone.insert(s.edge);
      addItem(from, {Item::Kind::Lks, si}, vec);
      addItem(to, {Item::Kind::Lks, si}, vec);
    } else {
      vec = toVec(s.payload);
      BitVector residual = vec;
      std::vector<std::uint32_t> combo;
      if (know[from].reduce(residual, combo)) {
        stepCompute_[si] = Compute{from, combo};
      } else {
        issue(sidx, "payload " + s.payload.str() + " is not computable by " + s.from +
                        " (unknown: " + residualVars(residual) + ")");
      }
      addItem(to, {Item::Kind::Recv, si}, vec);
    }
    transcript_.steps.push_back({s.op, s.edge, s.from, e.other(s.from), vec});
  }
  for (const auto& var : basis) {
    if (var.kind == Variable::Kind::LocalKey && g.hasEdge(var.name) && !lksDone.count(var.name)) {
      issue(-1, "local key " + var.str() + " is referenced but LKS of " + var.name +
                    " never fires");
    }
  }

  std::set<std::pair<int, int>> seenOutputs;
  for (const auto& o : p.outputs) {
    const std::string who = userLabel(o.pair, o.end);
    const UserPair* up = g.pair(o.pair);
    if (!up || (o.end != 1 && o.end != 2)) {
      issue(-1, "output for unknown user " + who);
      continue;
    }
    if (!seenOutputs.insert({o.pair, o.end}).second) {
      issue(-1, "duplicate output for " + who);
      continue;
    }
    const std::size_t node = g.nodeIndex(up->end(o.end));
    BitVector vec = toVec(o.expr);
    BitVector residual = vec;
    std::vector<std::uint32_t> combo;
    if (!know[node].reduce(residual, combo)) {
      issue(-1, "output of " + who + " = " + o.expr.str() + " is not computable by " +
                    up->end(o.end) + " (unknown: " + residualVars(residual) + ")");
    }
    outputCompute_.push_back({node, combo});
    transcript_.outputs.push_back({o.pair, o.end, up->end(o.end), vec});
  }
}

const Transcript& Execution::transcript() const {
  if (!report_.ok()) throw InvalidProtocol(report_);
  return transcript_;
}

ConcreteRun Execution::run(const BitVector& assignment,
                           const std::vector<Perturbation>& perturbations) const {
  if (!report_.ok()) throw InvalidProtocol(report_);
  const LinearProtocol& p = protocol_;
  const Graph& g = *p.graph;
  const std::size_t n = transcript_.basis.size();
  if (assignment.size() != n) throw std::invalid_argument("assignment length mismatch");

  ConcreteRun out;
  out.assignment = assignment;
  out.steps.assign(p.schedule.size(), false);
  std::vector<bool> stepFlip(p.schedule.size(), false);
  std::map<std::pair<EdgeId, std::size_t>, bool> keyFlip;
  for (const auto& pt : perturbations) {
    if (pt.target == Perturbation::Target::Step) {
      if (pt.step >= p.schedule.size()) throw std::out_of_range("perturbed step out of range");
      stepFlip[pt.step] = stepFlip[pt.step] ^ pt.delta;
    } else {
      auto& f = keyFlip[{pt.edge, g.nodeIndex(pt.node)}];
      f = f ^ pt.delta;
    }
  }

  std::vector<std::vector<bool>> values(items_.size());
  auto itemValue = [&](std::size_t node, std::size_t idx) -> bool {
    const Item& it = items_[node][idx];
    switch (it.kind) {
      case Item::Kind::Const:
        return true;
      case Item::Kind::Own:
        return assignment.get(it.ref);
      case Item::Kind::Lks: {
        const EdgeId& e = p.schedule[it.ref].edge;
        bool v = assignment.get(lksVar_[it.ref]);
        auto f = keyFlip.find({e, node});
        return f != keyFlip.end() ? (v ^ f->second) : v;
      }
      case Item::Kind::Recv:
        return out.steps[it.ref];
    }
    return false;
  };
  auto compute = [&](const Compute& c) {
    bool v = false;
    for (auto idx : c.items) v ^= itemValue(c.node, idx);
    return v;
  };
  for (std::size_t si = 0; si < p.schedule.size(); ++si) {
    if (p.schedule[si].op == Step::Op::LKS) {
      out.steps[si] = assignment.get(lksVar_[si]);
    } else {
      out.steps[si] = compute(*stepCompute_[si]) ^ stepFlip[si];
    }
  }
  for (const auto& c : outputCompute_) out.outputs.push_back(compute(c));
  return out;
}

ConcreteRun Execution::sample(std::uint64_t seed,
                              const std::vector<Perturbation>& perturbations) const {
  std::mt19937_64 rng(seed);
  BitVector a(transcript().basis.size());
  for (std::size_t k = 0; k < a.size(); ++k) a.set(k, rng() & 1u);
  return run(a, perturbations);
}

ValidationReport validate(const LinearProtocol& p) { return Execution(p).validation(); }

Transcript symbolicExecute(const LinearProtocol& p) { return Execution(p).transcript(); }

ConcreteRun sampleRun(const LinearProtocol& p, std::uint64_t seed) {
  return Execution(p).sample(seed);
}

UsageOrder usageOrder(const LinearProtocol& p) {
  const Transcript t = symbolicExecute(p);
  UsageOrder order;
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    if (s.op == Step::Op::PC) continue;
    order.uses.push_back({s.edge, s.op, k, s.sender, s.receiver});
  }
  return order;
}

std::string userLabel(int pair, int end) {
  return "u[" + std::to_string(pair) + "," + std::to_string(end) + "]";
}

static std::pair<int, int> parseUserLabel(const std::string& raw) {
  const std::string s = stripSpace(raw);
  if (s.size() < 6 || s.rfind("u[", 0) != 0 || s.back() != ']') {
    throw ParseError("bad user label '" + raw + "'");
  }
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw ParseError("bad user label '" + raw + "'");
  const int i = parseIndex(s.substr(2, comma - 2), raw);
  const int j = parseIndex(s.substr(comma + 1, s.size() - comma - 2), raw);
  return {i, j};
}

LinearProtocol protocolFromJson(const nlohmann::json& j, const std::string& baseDir) {
  LinearProtocol p;
  try {
    p.setting = settingFromString(j.at("setting").get<std::string>());
    if (j.contains("goal")) {
      const auto g = j.at("goal").get<std::string>();
      if (g == "randomKey") {
        p.goalOverride = Goal::RandomKey;
      } else if (g == "message") {
        p.goalOverride = Goal::Message;
      } else {
        throw ParseError("unknown goal '" + g + "'");
      }
    }
    if (j.contains("name")) p.name = j.at("name").get<std::string>();
    const auto& gj = j.at("graph");
    if (gj.is_string()) {
      std::string path = gj.get<std::string>();
      if (!path.empty() && path[0] != '/') path = baseDir + "/" + path;
      std::ifstream in(path);
      if (!in) throw ParseError("cannot open graph file '" + path + "'");
      nlohmann::json g;
      try {
        in >> g;
      } catch (const nlohmann::json::exception& ex) {
        throw ParseError("graph file '" + path + "': " + ex.what());
      }
      p.graph = std::make_shared<Graph>(buildGraph(topologyFromJson(g)));
    } else {
      p.graph = std::make_shared<Graph>(buildGraph(topologyFromJson(gj)));
    }
    for (const auto& sj : j.at("schedule")) {
      Step s;
      const auto op = sj.at("op").get<std::string>();
      s.edge = sj.at("edge").get<std::string>();
      if (op == "lks") {
        s.op = Step::Op::LKS;
        s.from = sj.contains("from") ? sj.at("from").get<std::string>()
                                     : p.graph->edge(s.edge).a;
      } else if (op == "pc" || op == "sc") {
        s.op = op == "pc" ? Step::Op::PC : Step::Op::SC;
        s.from = sj.at("from").get<std::string>();
        s.payload = parseLinExpr(sj.at("payload").get<std::string>());
      } else {
        throw ParseError("unknown op '" + op + "'");
      }
      p.schedule.push_back(std::move(s));
    }
    for (const auto& oj : j.at("outputs")) {
      const auto [i, end] = parseUserLabel(oj.at("user").get<std::string>());
      p.outputs.push_back({i, end, parseLinExpr(oj.at("expr").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("malformed protocol: ") + ex.what());
  }
  return p;
}

nlohmann::ordered_json protocolToJson(const LinearProtocol& p, bool inlineGraph) {
  nlohmann::ordered_json j;
  if (!p.name.empty()) j["name"] = p.name;
  j["setting"] = toString(p.setting);
  if (p.goalOverride && *p.goalOverride != defaultGoal(p.setting)) j["goal"] = toString(p.goal());
  if (inlineGraph) j["graph"] = topologyToJson(*p.graph);
  auto sched = nlohmann::ordered_json::array();
  for (const auto& s : p.schedule) {
    nlohmann::ordered_json sj;
    sj["op"] = toString(s.op);
    sj["edge"] = s.edge;
    sj["from"] = s.from;
    if (s.op != Step::Op::LKS) sj["payload"] = s.payload.str();
    sched.push_back(sj);
  }
  j["schedule"] = sched;
  auto outs = nlohmann::ordered_json::array();
  for (const auto& o : p.outputs) {
    nlohmann::ordered_json oj;
    oj["user"] = userLabel(o.pair, o.end);
    oj["expr"] = o.expr.str();
    outs.push_back(oj);
  }
  j["outputs"] = outs;
  return j;
}

nlohmann::ordered_json transcriptToJson(const Transcript& t) {
  nlohmann::ordered_json j;
  auto basis = nlohmann::ordered_json::array();
  for (const auto& v : t.basis) basis.push_back(v.str());
  j["basis"] = basis;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : t.steps) {
    nlohmann::ordered_json sj;
    sj["op"] = toString(s.op);
    sj["edge"] = s.edge;
    sj["from"] = s.sender;
    sj["to"] = s.receiver;
    sj["value"] = t.toExpr(s.vec).str();
    steps.push_back(sj);
  }
  j["steps"] = steps;
  auto outs = nlohmann::ordered_json::array();
  for (const auto& o : t.outputs) {
    nlohmann::ordered_json oj;
    oj["user"] = userLabel(o.pair, o.end);
    oj["value"] = t.toExpr(o.vec).str();
    outs.push_back(oj);
  }
  j["outputs"] = outs;
  return j;
}

}  // namespace krlab
