#include "krlab/security.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <thread>

namespace krlab {

using gf2::BitMatrix;
using gf2::BitVector;

gf2::BitMatrix secrecyTargets(const Transcript& t, const LinearProtocol& p) {
  const std::size_t n = t.vars();
  BitMatrix m(n);
  if (p.goal() == Goal::Message) {
    for (const auto& up : p.graph->userPairs()) {
      m.addRow(BitVector::unit(n, *t.indexOf(Variable::message(up.index))));
    }
  } else {
    for (const auto& o : t.outputs) m.addRow(o.vec.prefix(n));
  }
  return m;
}

AdversaryView buildAdversaryView(const Transcript& t, const LinearProtocol& p,
                                 const std::vector<EdgeId>& member) {
  for (const auto& e : member) {
    if (!p.graph->hasEdge(e)) throw ParseError("wiretap member contains unknown edge '" + e + "'");
  }
  const std::set<EdgeId> tapped(member.begin(), member.end());
  const std::size_t n = t.vars();
  AdversaryView view{member, BitMatrix(n), {}};
  std::set<BitVector> seen;
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    bool visible = false;
    switch (s.op) {
      case Step::Op::PC:
        visible = true;
        break;
      case Step::Op::LKS:
      case Step::Op::SC:
        visible = tapped.count(s.edge) != 0;
        break;
    }
    if (!visible) continue;
    BitVector row = s.vec.prefix(n);
    if (row.isZero() || !seen.insert(row).second) continue;
    view.rows.addRow(std::move(row));
    view.steps.push_back(k);
  }
  return view;
}

SoundnessReport checkSoundness(const Transcript& t, const LinearProtocol& p) {
  SoundnessReport rep;
  rep.pass = true;
  const std::size_t n = t.vars();
  gf2::EchelonBasis keys(n);
  for (const auto& up : p.graph->userPairs()) {
    PairSoundness ps;
    ps.pair = up.index;
    if (p.goal() == Goal::Message) {
      const int recv = 3 - up.senderEnd;
      const auto* o = t.output(up.index, recv);
      const auto target = BitVector::unit(n + 1, *t.indexOf(Variable::message(up.index)));
      ps.value1 = "m[" + std::to_string(up.index) + "]";
      if (!o) {
        ps.reason = "no decoded output at " + userLabel(up.index, recv);
      } else {
        ps.value2 = t.toExpr(o->vec).str();
        if (o->vec == target) {
          ps.pass = true;
        } else {
          ps.reason = "decoded value differs from the message";
        }
      }
    } else {
      const auto* o1 = t.output(up.index, 1);
      const auto* o2 = t.output(up.index, 2);
      if (o1) ps.value1 = t.toExpr(o1->vec).str();
      if (o2) ps.value2 = t.toExpr(o2->vec).str();
      if (!o1 || !o2) {
        ps.reason = "missing output";
      } else if (!(o1->vec == o2->vec)) {
        ps.reason = "k1 and k2 differ";
      } else if (o1->vec.prefix(n).isZero()) {
        ps.reason = "key is constant";
      } else {
        ps.pass = true;
        if (!keys.insert(o1->vec.prefix(n))) {
          rep.independent = false;
          ps.pass = false;
          ps.reason = "key depends on keys of earlier pairs";
        }
      }
    }
    rep.pass = rep.pass && ps.pass;
    rep.pairs.push_back(std::move(ps));
  }
  rep.keyRank = keys.rank();
  return rep;
}

SecrecyReport checkSecrecy(const Transcript& t, const LinearProtocol& p,
                           const WiretapCollection& w) {
  SecrecyReport rep;
  const BitMatrix targets = secrecyTargets(t, p);
  const std::size_t rankK = gf2::rank(targets);
  for (const auto& member : w.members) {
    const AdversaryView view = buildAdversaryView(t, p, member);
    MemberSecrecy ms;
    ms.member = member;
    ms.viewRows = view.rows.rowCount();
    ms.rankK = rankK;
    ms.rankView = gf2::rank(view.rows);
    ms.rankJoint = gf2::rank(targets.stacked(view.rows));
    ms.leak = ms.rankK + ms.rankView - ms.rankJoint;
    if (ms.leak != 0) {
      const BitMatrix basis = gf2::intersectionBasis(targets, view.rows);
      for (const auto& r : basis.rows()) {
        BitVector full(t.vars() + 1);
        for (std::size_t k = 0; k < t.vars(); ++k) full.set(k, r.get(k));
        ms.witness.push_back(t.toExpr(full).str());
      }
      rep.pass = false;
    }
    rep.members.push_back(std::move(ms));
  }
  return rep;
}

SecurityReport analyze(const LinearProtocol& p, const WiretapCollection& w) {
  const Transcript t = symbolicExecute(p);
  SecurityReport r;
  r.soundness = checkSoundness(t, p);
  r.secrecy = checkSecrecy(t, p, w);
  return r;
}

bool ExactMI::isInteger() const {
  for (const auto& [prime, c] : coeff) {
    if (prime != 2 && c != 0) return false;
  }
  auto it = coeff.find(2);
  const std::int64_t c2 = it == coeff.end() ? 0 : it->second;
  return c2 % (std::int64_t{1} << log2Denominator) == 0;
}

std::int64_t ExactMI::integerValue() const {
  if (!isInteger()) throw std::logic_error("mutual information is not an integer");
  auto it = coeff.find(2);
  return it == coeff.end() ? 0 : it->second >> log2Denominator;
}

double ExactMI::approx() const {
  double s = 0;
  for (const auto& [prime, c] : coeff) s += static_cast<double>(c) * std::log2(static_cast<double>(prime));
  return std::ldexp(s, -static_cast<int>(log2Denominator));
}

std::string ExactMI::str() const {
  if (isInteger()) return std::to_string(integerValue());
  std::ostringstream os;
  os << "(";
  bool first = true;
  for (const auto& [prime, c] : coeff) {
    if (c == 0) continue;
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    os << (c < 0 ? -c : c) << "*log2(" << prime << ")";
  }
  os << ")/2^" << log2Denominator;
  return os.str();
}

namespace {

using Counts = std::map<BitKey, std::uint64_t>;

void addCLogC(std::map<std::uint64_t, std::int64_t>& acc, std::uint64_t c, std::int64_t sign) {
  std::uint64_t x = c;
  for (std::uint64_t q = 2; q * q <= x; ++q) {
    while (x % q == 0) {
      acc[q] += sign * static_cast<std::int64_t>(c);
      x /= q;
    }
  }
  if (x > 1) acc[x] += sign * static_cast<std::int64_t>(c);
}

}  // namespace

ExactMI mutualInformation(unsigned nbits, const JointSampler& f, unsigned workers) {
  if (nbits > kMaxOracleBound) {
    throw OracleBoundError("oracle refuses " + std::to_string(nbits) + " bits (max " +
                           std::to_string(kMaxOracleBound) + ")");
  }
  const std::uint64_t total = std::uint64_t{1} << nbits;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(total)));
  struct Part {
    Counts x, y, xy;
  };
  std::vector<Part> parts(workers);
  auto work = [&](unsigned w) {
    const std::uint64_t lo = total * w / workers;
    const std::uint64_t hi = total * (w + 1) / workers;
    BitKey x, y;
    for (std::uint64_t a = lo; a < hi; ++a) {
      x.clear();
      y.clear();
      f(a, x, y);
      ++parts[w].x[x];
      ++parts[w].y[y];
      BitKey joint = x;
      joint.push_back(~std::uint64_t{0});
      joint.insert(joint.end(), y.begin(), y.end());
      ++parts[w].xy[joint];
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w);
    for (auto& th : threads) th.join();
  }
  Part all;
  for (auto& part : parts) {
    for (auto& [k, c] : part.x) all.x[k] += c;
    for (auto& [k, c] : part.y) all.y[k] += c;
    for (auto& [k, c] : part.xy) all.xy[k] += c;
  }
  ExactMI mi;
  mi.log2Denominator = nbits;
  mi.coeff[2] += static_cast<std::int64_t>(total) * nbits;
  for (const auto& [k, c] : all.x) addCLogC(mi.coeff, c, -1);
  for (const auto& [k, c] : all.y) addCLogC(mi.coeff, c, -1);
  for (const auto& [k, c] : all.xy) addCLogC(mi.coeff, c, +1);
  for (auto it = mi.coeff.begin(); it != mi.coeff.end();) {
    it = it->second == 0 && it->first != 2 ? mi.coeff.erase(it) : std::next(it);
  }
  return mi;
}

ExactMI bruteForceMI(const LinearProtocol& p, const std::vector<EdgeId>& member, unsigned bound,
                     unsigned workers) {
  if (bound > kMaxOracleBound) {
    throw OracleBoundError("oracle bound " + std::to_string(bound) + " exceeds " +
                           std::to_string(kMaxOracleBound));
  }
  const Execution ex(p);
  const Transcript& t = ex.transcript();
  const std::size_t n = t.vars();
  if (n > bound) {
    throw OracleBoundError("protocol has " + std::to_string(n) +
                           " fundamental bits; oracle bound is " + std::to_string(bound));
  }
  const std::set<EdgeId> tapped(member.begin(), member.end());
  for (const auto& e : member) {
    if (!p.graph->hasEdge(e)) throw ParseError("wiretap member contains unknown edge '" + e + "'");
  }
  std::vector<std::size_t> visible;
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    if (s.op == Step::Op::PC || tapped.count(s.edge)) visible.push_back(k);
  }
  std::vector<std::size_t> messageIdx;
  if (p.goal() == Goal::Message) {
    for (const auto& up : p.graph->userPairs()) {
      messageIdx.push_back(*t.indexOf(Variable::message(up.index)));
    }
  }
  auto pack = [](BitKey& key, std::size_t pos, bool bit) {
    if (key.size() <= pos / 64) key.resize(pos / 64 + 1, 0);
    if (bit) key[pos / 64] |= std::uint64_t{1} << (pos % 64);
  };
  auto sampler = [&](std::uint64_t a, BitKey& x, BitKey& y) {
    BitVector assignment(n);
    for (std::size_t k = 0; k < n; ++k) assignment.set(k, (a >> k) & 1u);
    const ConcreteRun run = ex.run(assignment);
    if (p.goal() == Goal::Message) {
      for (std::size_t k = 0; k < messageIdx.size(); ++k) pack(x, k, assignment.get(messageIdx[k]));
    } else {
      for (std::size_t k = 0; k < run.outputs.size(); ++k) pack(x, k, run.outputs[k]);
    }
    x.resize(std::max<std::size_t>(x.size(), 1), 0);
    for (std::size_t k = 0; k < visible.size(); ++k) pack(y, k, run.steps[visible[k]]);
    y.resize(std::max<std::size_t>(y.size(), 1), 0);
  };
  return mutualInformation(static_cast<unsigned>(n), sampler, workers);
}

TamperReport checkTamperLinearity(const LinearProtocol& p, const Perturbation& pert,
                                  std::size_t seeds) {
  const Execution ex(p);
  const std::size_t n = ex.transcript().vars();
  TamperReport rep;
  rep.seeds = seeds;
  auto diff = [](const ConcreteRun& a, const ConcreteRun& b, std::vector<bool>& steps,
                 std::vector<bool>& outs) {
    steps.assign(a.steps.size(), false);
    outs.assign(a.outputs.size(), false);
    for (std::size_t k = 0; k < steps.size(); ++k) steps[k] = a.steps[k] != b.steps[k];
    for (std::size_t k = 0; k < outs.size(); ++k) outs[k] = a.outputs[k] != b.outputs[k];
  };
  // Prediction from the zero assignment: the induced linear map applied to the flip alone.
  const BitVector zero(n);
  diff(ex.run(zero), ex.run(zero, {pert}), rep.stepOffset, rep.outputOffset);
  for (std::size_t s = 0; s < seeds; ++s) {
    std::vector<bool> st, out;
    diff(ex.sample(s), ex.sample(s, {pert}), st, out);
    if (st != rep.stepOffset || out != rep.outputOffset) {
      rep.linear = false;
      rep.matchesPrediction = false;
      rep.detail = "offset at seed " + std::to_string(s) + " differs from the zero-draw offset";
      break;
    }
  }
  return rep;
}

nlohmann::ordered_json toJson(const SecurityReport& r) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json s;
  s["pass"] = r.soundness.pass;
  s["keyRank"] = r.soundness.keyRank;
  s["independent"] = r.soundness.independent;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& p : r.soundness.pairs) {
    nlohmann::ordered_json pj;
    pj["pair"] = p.pair;
    pj["pass"] = p.pass;
    pj["value1"] = p.value1;
    pj["value2"] = p.value2;
    if (!p.reason.empty()) pj["reason"] = p.reason;
    pairs.push_back(pj);
  }
  s["pairs"] = pairs;
  j["soundness"] = s;
  auto sec = nlohmann::ordered_json::array();
  for (const auto& m : r.secrecy.members) {
    nlohmann::ordered_json mj;
    mj["member"] = m.member;
    mj["viewRows"] = m.viewRows;
    mj["rankK"] = m.rankK;
    mj["rankView"] = m.rankView;
    mj["rankJoint"] = m.rankJoint;
    mj["leak"] = m.leak;
    if (!m.witness.empty()) mj["witness"] = m.witness;
    sec.push_back(mj);
  }
  j["secrecy"] = sec;
  j["verdict"] = r.secure() ? "secure" : "insecure";
  return j;
}

nlohmann::ordered_json toJson(const ExactMI& mi) {
  nlohmann::ordered_json j;
  j["bits"] = mi.str();
  j["integer"] = mi.isInteger();
  j["log2Denominator"] = mi.log2Denominator;
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  for (const auto& [prime, coeff] : mi.coeff) c[std::to_string(prime)] = coeff;
  j["log2Coefficients"] = c;
  j["approx"] = mi.approx();
  return j;
}

nlohmann::ordered_json toJson(const TamperReport& r, const LinearProtocol& p) {
  nlohmann::ordered_json j;
  j["linear"] = r.linear;
  j["seeds"] = r.seeds;
  auto steps = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.stepOffset.size(); ++k) {
    if (r.stepOffset[k]) steps.push_back(k);
  }
  j["flippedSteps"] = steps;
  auto outs = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.outputOffset.size() && k < p.outputs.size(); ++k) {
    if (r.outputOffset[k]) outs.push_back(userLabel(p.outputs[k].pair, p.outputs[k].end));
  }
  j["flippedOutputs"] = outs;
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

}  // namespace krlab
