#include "krlab/transforms.hpp"

#include "krlab/security.hpp"

namespace krlab {

LinExpr substitute(const LinExpr& e, const std::map<Variable, LinExpr>& map) {
  LinExpr out;
  out.constant = e.constant;
  for (const auto& v : e.vars) {
    auto it = map.find(v);
    out ^= it == map.end() ? LinExpr::of(v) : it->second;
  }
  return out;
}

namespace {

// Next unused NodeRandom index per node.
std::map<NodeId, int> nextRandomIndex(const LinearProtocol& p) {
  std::map<NodeId, int> next;
  auto scan = [&](const LinExpr& e) {
    for (const auto& v : e.vars) {
      if (v.kind == Variable::Kind::NodeRandom) {
        next[v.name] = std::max(next[v.name], v.index + 1);
      }
    }
  };
  for (const auto& s : p.schedule) scan(s.payload);
  for (const auto& o : p.outputs) scan(o.expr);
  return next;
}

LinearProtocol shell(const LinearProtocol& p, Setting setting, const std::string& suffix) {
  LinearProtocol q;
  q.graph = p.graph;
  q.setting = setting;
  q.goalOverride = p.goal();
  q.name = p.name.empty() ? suffix : p.name + "+" + suffix;
  return q;
}

}  // namespace

TransformResult lksToSc(const LinearProtocol& p) {
  if (p.setting != Setting::KRP) {
    throw TransformError("lks-to-sc needs a KRP protocol, got " + toString(p.setting));
  }
  TransformResult res{shell(p, Setting::SNC_PC, "lks-to-sc"), {}};
  auto& tr = res.trace;
  tr.kind = "lks-to-sc";
  tr.sourceSetting = p.setting;
  tr.targetSetting = Setting::SNC_PC;
  auto next = nextRandomIndex(p);
  for (const auto& s : p.schedule) {
    if (s.op == Step::Op::LKS) {
      const Variable rho = Variable::nodeRandom(s.from, next[s.from]++);
      tr.variableMap[Variable::localKey(s.edge)] = LinExpr::of(rho);
    }
  }
  for (const auto& s : p.schedule) {
    tr.stepMap.push_back({res.protocol.schedule.size()});
    if (s.op == Step::Op::LKS) {
      res.protocol.schedule.push_back(
          Step::sc(s.edge, s.from, tr.variableMap.at(Variable::localKey(s.edge))));
    } else {
      res.protocol.schedule.push_back({s.op, s.edge, s.from, substitute(s.payload, tr.variableMap)});
    }
  }
  for (const auto& o : p.outputs) {
    res.protocol.outputs.push_back({o.pair, o.end, substitute(o.expr, tr.variableMap)});
  }
  return res;
}

TransformResult scToOtp(const LinearProtocol& p) {
  if (p.setting == Setting::KRP) {
    throw TransformError("sc-to-otp needs a protocol with secret channels, got KRP");
  }
  TransformResult res{shell(p, Setting::KRP, "sc-to-otp"), {}};
  auto& tr = res.trace;
  tr.kind = "sc-to-otp";
  tr.sourceSetting = p.setting;
  tr.targetSetting = Setting::KRP;
  for (const auto& s : p.schedule) {
    auto& image = res.protocol.schedule;
    if (s.op == Step::Op::SC) {
      tr.stepMap.push_back({image.size(), image.size() + 1});
      image.push_back(Step::lks(s.edge, s.from));
      image.push_back(Step::pc(s.edge, s.from, s.payload ^ LinExpr::of(Variable::localKey(s.edge))));
    } else {
      tr.stepMap.push_back({image.size()});
      image.push_back(s);
    }
  }
  res.protocol.outputs = p.outputs;
  return res;
}

TransformResult sncToKrpBySnc(const LinearProtocol& p) {
  if (p.setting != Setting::SNC) {
    throw TransformError("snc-to-krpbysnc needs an SNC protocol, got " + toString(p.setting));
  }
  TransformResult res{shell(p, Setting::KRP_BY_SNC, "snc-to-krpbysnc"), {}};
  res.protocol.goalOverride = Goal::RandomKey;
  auto& tr = res.trace;
  tr.kind = "snc-to-krpbysnc";
  tr.sourceSetting = p.setting;
  tr.targetSetting = Setting::KRP_BY_SNC;
  auto next = nextRandomIndex(p);
  for (const auto& up : p.graph->userPairs()) {
    const NodeId& a = up.sender();
    tr.variableMap[Variable::message(up.index)] =
        LinExpr::of(Variable::nodeRandom(a, next[a]++));
  }
  for (const auto& s : p.schedule) {
    tr.stepMap.push_back({res.protocol.schedule.size()});
    res.protocol.schedule.push_back({s.op, s.edge, s.from, substitute(s.payload, tr.variableMap)});
  }
  for (const auto& up : p.graph->userPairs()) {
    res.protocol.outputs.push_back(
        {up.index, up.senderEnd, tr.variableMap.at(Variable::message(up.index))});
    const int recv = 3 - up.senderEnd;
    if (const Output* o = p.output(up.index, recv)) {
      res.protocol.outputs.push_back({up.index, recv, substitute(o->expr, tr.variableMap)});
    }
  }
  return res;
}

TransformResult attachOtpMessage(const LinearProtocol& p, const std::map<int, int>& senderEnd) {
  if (p.setting != Setting::SNC_PC && p.setting != Setting::KRP) {
    throw TransformError("attach-otp needs public channels (KRP or SNC_PC), got " +
                         toString(p.setting));
  }
  if (p.goal() != Goal::RandomKey) throw TransformError("attach-otp needs a key-sharing protocol");
  for (const auto& [pair, end] : senderEnd) {
    if (!p.graph->pair(pair)) throw TransformError("roles reference unknown pair " + std::to_string(pair));
    if (end != 1 && end != 2) throw TransformError("sender end must be 1 or 2");
  }
  const Transcript t = symbolicExecute(p);
  if (!checkSoundness(t, p).pass) throw TransformError("attach-otp needs a sound key protocol");

  TopologySpec spec;
  spec.nodes = p.graph->nodes();
  spec.edges = p.graph->edges();
  spec.users = p.graph->userPairs();
  for (auto& up : spec.users) {
    auto it = senderEnd.find(up.index);
    if (it != senderEnd.end()) up.senderEnd = it->second;
  }
  TransformResult res{shell(p, p.setting, "attach-otp"), {}};
  res.protocol.graph = std::make_shared<Graph>(buildGraph(spec));
  res.protocol.goalOverride = Goal::Message;
  auto& tr = res.trace;
  tr.kind = "attach-otp";
  tr.sourceSetting = p.setting;
  tr.targetSetting = p.setting;
  for (std::size_t k = 0; k < p.schedule.size(); ++k) {
    tr.stepMap.push_back({k});
    res.protocol.schedule.push_back(p.schedule[k]);
  }
  const Graph& g = *res.protocol.graph;
  for (const auto& up : g.userPairs()) {
    const int recv = 3 - up.senderEnd;
    const LinExpr c = LinExpr::of(Variable::message(up.index)) ^ p.output(up.index, up.senderEnd)->expr;
    NodeId at = up.sender();
    for (const auto& e : g.shortestPath(up.sender(), up.receiver(), kPC)) {
      res.protocol.schedule.push_back(Step::pc(e, at, c));
      at = g.edge(e).other(at);
    }
    res.protocol.outputs.push_back({up.index, recv, c ^ p.output(up.index, recv)->expr});
  }
  return res;
}

nlohmann::ordered_json toJson(const TransformTrace& t) {
  nlohmann::ordered_json j;
  j["kind"] = t.kind;
  j["sourceSetting"] = toString(t.sourceSetting);
  j["targetSetting"] = toString(t.targetSetting);
  auto steps = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < t.stepMap.size(); ++k) {
    nlohmann::ordered_json sj;
    sj["source"] = k;
    sj["image"] = t.stepMap[k];
    steps.push_back(sj);
  }
  j["steps"] = steps;
  nlohmann::ordered_json vars = nlohmann::ordered_json::object();
  for (const auto& [v, e] : t.variableMap) vars[v.str()] = e.str();
  j["variables"] = vars;
  return j;
}

}  // namespace krlab
