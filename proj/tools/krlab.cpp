#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "krlab/fixtures.hpp"
#include "krlab/g0.hpp"
#include "krlab/keyauth.hpp"
#include "krlab/security.hpp"
#include "krlab/transforms.hpp"

using namespace krlab;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string format = "text";
  std::string out;
  std::string wiretap;
  unsigned workers = 1;
  unsigned oracleBound = kDefaultOracleBound;
};

unsigned defaultWorkers() {
  const char* env = std::getenv("KRLAB_WORKERS");
  if (!env || !*env) return 1;
  try {
    const long v = std::stol(env);
    if (v >= 1) return static_cast<unsigned>(v);
  } catch (const std::exception&) {
  }
  throw UsageError(std::string("KRLAB_WORKERS must be a positive integer, got '") + env + "'");
}

nlohmann::json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError("'" + path + "' is not valid JSON: " + ex.what());
  }
}

LinearProtocol loadProtocol(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path().string();
  return protocolFromJson(readJsonFile(path), dir.empty() ? "." : dir);
}

WiretapCollection loadWiretap(const std::string& arg, const Graph& g,
                              const WiretapCollection& fallback = WiretapCollection::emptyOnly()) {
  if (arg.empty()) return fallback;
  nlohmann::json j;
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) {
    try {
      j = nlohmann::json::parse(arg);
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(std::string("inline wiretap is not valid JSON: ") + ex.what());
    }
  } else {
    j = readJsonFile(arg);
  }
  WiretapCollection w = wiretapFromJson(j);
  validateWiretap(g, w);
  return w;
}

void emit(const Options& o, const ojson& j, const std::string& text) {
  const std::string body = o.format == "json" ? j.dump(2) + "\n" : text;
  std::cout << body;
}

void writeFile(const std::string& path, const ojson& j) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << j.dump(2) << "\n";
}

std::string memberText(const std::vector<EdgeId>& m) {
  std::string s = "{";
  for (std::size_t k = 0; k < m.size(); ++k) s += (k ? "," : "") + m[k];
  return s + "}";
}

std::string reportText(const SecurityReport& r) {
  std::ostringstream os;
  os << "soundness: " << (r.soundness.pass ? "pass" : "fail") << " (key rank "
     << r.soundness.keyRank << ")\n";
  for (const auto& p : r.soundness.pairs) {
    os << "  pair " << p.pair << ": " << (p.pass ? "pass" : "fail") << "  " << p.value1 << " | "
       << p.value2;
    if (!p.reason.empty()) os << "  (" << p.reason << ")";
    os << "\n";
  }
  os << "secrecy:\n";
  for (const auto& m : r.secrecy.members) {
    os << "  " << memberText(m.member) << ": leak " << m.leak << " (view rows " << m.viewRows
       << ")";
    for (const auto& w : m.witness) os << " " << w;
    os << "\n";
  }
  os << "verdict: " << (r.secure() ? "secure" : "insecure") << "\n";
  return os.str();
}

int runAnalyze(const Options& o, const std::string& path) {
  const auto p = loadProtocol(path);
  const auto w = loadWiretap(o.wiretap, *p.graph);
  const auto report = analyze(p, w);
  ojson j;
  j["protocol"] = p.name;
  j["setting"] = toString(p.setting);
  j["goal"] = toString(p.goal());
  j["report"] = toJson(report);
  emit(o, j, reportText(report));
  return report.secure() ? kPass : kFail;
}

int runTransform(const Options& o, const std::string& kind, const std::string& path,
                 const std::vector<std::string>& roles) {
  const auto p = loadProtocol(path);
  TransformResult res;
  if (kind == "lks-to-sc") {
    res = lksToSc(p);
  } else if (kind == "sc-to-otp") {
    res = scToOtp(p);
  } else if (kind == "snc-to-krpbysnc") {
    res = sncToKrpBySnc(p);
  } else if (kind == "attach-otp") {
    std::map<int, int> ends;
    for (const auto& r : roles) {
      const auto eq = r.find('=');
      if (eq == std::string::npos) throw UsageError("--sender expects PAIR=END, got '" + r + "'");
      try {
        ends[std::stoi(r.substr(0, eq))] = std::stoi(r.substr(eq + 1));
      } catch (const std::exception&) {
        throw UsageError("--sender expects PAIR=END, got '" + r + "'");
      }
    }
    res = attachOtpMessage(p, ends);
  } else {
    throw UsageError("unknown transform '" + kind + "'");
  }
  const auto image = protocolToJson(res.protocol);
  const auto trace = toJson(res.trace);
  if (o.out.empty()) {
    // Without --out the image itself is the output, ready for `analyze`.
    std::cout << image.dump(2) << "\n";
    return kPass;
  }
  writeFile(o.out, image);
  std::ostringstream text;
  text << res.trace.kind << ": " << toString(res.trace.sourceSetting) << " -> "
       << toString(res.trace.targetSetting) << ", " << p.schedule.size() << " -> "
       << res.protocol.schedule.size() << " steps, wrote " << o.out << "\n";
  emit(o, trace, text.str());
  return kPass;
}

int runDemo(const Options& o, const std::string& name, int n) {
  LinearProtocol p;
  WiretapCollection fallback = WiretapCollection::emptyOnly();
  if (name == "fig1") {
    p = fixtures::fig1();
  } else if (name == "fig3a") {
    if (n < 2) throw UsageError("fig3a needs --n >= 2");
    p = fixtures::fig3a(n);
  } else if (name == "fig3b") {
    p = fixtures::fig3b();
    fallback = fixtures::fig3bWiretap();
  } else {
    throw UsageError("unknown demo '" + name + "' (fig1, fig3a, fig3b)");
  }
  const auto w = loadWiretap(o.wiretap, *p.graph, fallback);
  const auto report = analyze(p, w);
  if (!o.out.empty()) writeFile(o.out, protocolToJson(p));
  ojson j;
  j["protocol"] = protocolToJson(p);
  j["wiretap"] = wiretapToJson(w);
  j["transcript"] = transcriptToJson(symbolicExecute(p));
  j["report"] = toJson(report);
  std::ostringstream text;
  text << p.name << ": " << p.graph->nodes().size() << " nodes, " << p.graph->edges().size()
       << " edges, " << p.schedule.size() << " steps\n"
       << reportText(report);
  emit(o, j, text.str());
  return report.secure() ? kPass : kFail;
}

int runOracle(const Options& o, const std::string& path) {
  if (o.oracleBound > kMaxOracleBound) {
    throw UsageError("--oracle-bound may not exceed " + std::to_string(kMaxOracleBound));
  }
  const auto p = loadProtocol(path);
  const auto w = loadWiretap(o.wiretap, *p.graph);
  const auto t = symbolicExecute(p);
  const auto sec = checkSecrecy(t, p, w);
  bool agree = true;
  ojson members = ojson::array();
  std::ostringstream text;
  text << "fundamental bits: " << t.vars() << "\n";
  for (std::size_t k = 0; k < w.members.size(); ++k) {
    const auto mi = bruteForceMI(p, w.members[k], o.oracleBound, o.workers);
    const bool match = mi.isInteger() && mi.integerValue() == static_cast<std::int64_t>(sec.members[k].leak);
    agree = agree && match;
    ojson mj;
    mj["member"] = w.members[k];
    mj["mutualInformation"] = toJson(mi);
    mj["rankLeak"] = sec.members[k].leak;
    mj["agree"] = match;
    members.push_back(mj);
    text << "  " << memberText(w.members[k]) << ": I = " << mi.str() << " bits, rank leak "
         << sec.members[k].leak << (match ? "  agree" : "  MISMATCH") << "\n";
  }
  ojson j;
  j["protocol"] = p.name;
  j["bits"] = t.vars();
  j["members"] = members;
  j["agree"] = agree;
  text << (agree ? "oracle agrees with rank verdicts\n" : "oracle disagrees with rank verdicts\n");
  emit(o, j, text.str());
  return agree ? kPass : kFail;
}

std::uint32_t parseHexWord(const std::string& s, unsigned bits) {
  // Right-aligned: "5" with bits = 3 is 101.
  std::uint32_t out = 0;
  try {
    out = static_cast<std::uint32_t>(std::stoul(s, nullptr, 16));
  } catch (const std::exception&) {
    throw auth::AuthError("bad hex value '" + s + "'");
  }
  if (out >> bits) throw auth::AuthError("'" + s + "' does not fit in " + std::to_string(bits) + " bits");
  return out;
}

struct AuthArgs {
  unsigned m = 0;
  unsigned l = 1;
  std::string key;
  std::string point;
  std::string pad;
  std::string tag;
};

int runAuth(const Options& o, const std::string& sub, const AuthArgs& a) {
  const auth::HashParams params{a.m, a.l};
  params.check();
  const auto key = auth::padKey(params, auth::keyFromHex(a.key, std::min<std::size_t>(a.key.size() * 4, params.n())));
  const auto x = gf2::fieldElement(static_cast<int>(a.m), parseHexWord(a.point, a.m));
  const std::uint32_t pad = parseHexWord(a.pad, a.m);
  ojson j;
  j["m"] = a.m;
  j["l"] = a.l;
  j["epsilon"] = params.epsilon();
  if (sub == "tag") {
    const auto tag = auth::makeVerificationMessage(params, key, x, pad);
    j["tag"] = auth::toHex(tag, a.m);
    emit(o, j, auth::toHex(tag, a.m) + "\n");
    return kPass;
  }
  const std::uint32_t tag = parseHexWord(a.tag, a.m);
  const bool ok = auth::verifyKeys(params, tag, key, x, pad);
  j["accept"] = ok;
  emit(o, j, ok ? "accept\n" : "reject\n");
  return ok ? kPass : kFail;
}

std::string requirementsText(const g0::RequirementReport& r) {
  std::ostringstream os;
  for (const auto& s : r.subgraphs) {
    os << "  G(" << s.id.s << "," << s.id.i << "): ";
    if (!s.evaluable) {
      os << "not evaluable (" << s.note << ")\n";
      continue;
    }
    os << "R1=" << s.r1 << " R2=" << s.r2 << " R3=" << s.r3 << " R4=" << s.r4
       << (s.all() ? "  ALL" : "") << "\n";
  }
  os << "subgraphs satisfying R1-R4: " << r.satisfyingAll() << "\n";
  return os.str();
}

std::string consistencyText(const g0::PathConsistencyReport& r) {
  std::ostringstream os;
  for (const auto& p : r.paths) {
    os << "  path " << p.path << ": ";
    if (!p.evaluable) {
      os << "not evaluable\n";
      continue;
    }
    os << (p.consistent() ? "consistent" : "inconsistent") << ", first edge <" << p.firstGamma
       << ">, order " << (p.orderConformant() ? "conformant" : "violated") << "\n";
  }
  os << "all consistent: " << (r.allConsistent() ? "yes" : "no")
     << ", all order conformant: " << (r.allOrderConformant() ? "yes" : "no") << "\n";
  return os.str();
}

int runG0(const Options& o, const std::string& sub, const std::string& path, bool interactive,
          bool userSeeded, const std::string& graphRef) {
  if (sub == "build") {
    const Graph g = buildG0();
    const auto j = topologyToJson(g);
    if (!o.out.empty()) writeFile(o.out, j);
    ojson summary;
    summary["nodes"] = g.nodes().size();
    summary["edges"] = g.edges().size();
    summary["userPairs"] = g.userPairs().size();
    if (o.format == "json" && o.out.empty()) {
      std::cout << j.dump(2) << "\n";
    } else {
      emit(o, summary,
           "G0: " + std::to_string(g.nodes().size()) + " nodes, " +
               std::to_string(g.edges().size()) + " edges, " +
               std::to_string(g.userPairs().size()) + " user pairs\n");
    }
    return kPass;
  }
  if (sub == "run-lkrp" || sub == "relay") {
    LinearProtocol p;
    if (sub == "relay") {
      try {
        p = g0::buildRelayFixture(userSeeded ? g0::userSeededPlan() : g0::shippedRelayPlan());
      } catch (const g0::RelayPlanError& ex) {
        std::cerr << "relay plan has no schedule: " << ex.what() << "\n";
        return kFail;
      }
    } else {
      p = interactive ? g0::buildLkrpInteractive() : g0::buildLkrp();
    }
    auto j = protocolToJson(p, graphRef.empty());
    if (!graphRef.empty()) {
      // Keep "graph" in its usual place after "setting".
      ojson k;
      for (auto it = j.begin(); it != j.end(); ++it) {
        k[it.key()] = it.value();
        if (it.key() == "setting" || it.key() == "goal") k["graph"] = graphRef;
      }
      j = k;
    }
    if (!o.out.empty()) {
      writeFile(o.out, j);
      std::cout << p.name << ": " << p.schedule.size() << " steps, wrote " << o.out << "\n";
    } else {
      std::cout << j.dump(2) << "\n";
    }
    return kPass;
  }
  if (sub == "verify") {
    const auto p = g0::buildLkrp();
    const auto w = loadWiretap(o.wiretap, *p.graph);
    const auto report = analyze(p, w);
    std::size_t sound = 0;
    for (const auto& ps : report.soundness.pairs) sound += ps.pass;
    ojson j;
    j["protocol"] = p.name;
    j["soundPairs"] = sound;
    j["report"] = toJson(report);
    emit(o, j, reportText(report) + std::to_string(sound) + " sound pairs\n");
    return report.secure() ? kPass : kFail;
  }
  if (sub == "diagnose") {
    if (path.empty()) throw UsageError("g0 diagnose needs a protocol file");
    const auto p = loadProtocol(path);
    const auto req = g0::checkRequirements(p);
    const auto pc = g0::checkPathConsistency(p);
    ojson j;
    j["protocol"] = p.name;
    j["requirements"] = toJson(req);
    j["pathConsistency"] = toJson(pc);
    emit(o, j, "requirements:\n" + requirementsText(req) + "path consistency:\n" + consistencyText(pc));
    return kPass;
  }
  if (sub == "cover-search") {
    const auto fam = g0::subsetFamilies();
    ojson items = ojson::array();
    bool itemsOk = true;
    for (const auto& c : fam) {
      const auto res = g0::checkItems234(c);
      if (!res.ok) {
        itemsOk = false;
        items.push_back({{"member", c.tag}, {"violation", res.violation}});
      }
    }
    const auto rep = g0::coverSearch(fam, o.workers);
    ojson j;
    j["members"] = fam.size();
    j["itemsViolations"] = items;
    j["cover"] = toJson(rep, fam);
    std::ostringstream text;
    text << "members: " << fam.size() << ", items 2-4 " << (itemsOk ? "hold" : "violated") << "\n"
         << "covered: " << rep.covered << " / " << rep.sequences << "\n";
    emit(o, j, text.str());
    return itemsOk && rep.covered == rep.sequences ? kPass : kFail;
  }
  throw UsageError("unknown g0 subcommand '" + sub + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"krlab: linear key relay protocols over GF(2)"};
  app.require_subcommand(1);
  Options o;
  try {
    o.workers = defaultWorkers();
  } catch (const UsageError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kUsage;
  }
  auto common = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    c->add_option("--out", o.out, "Write the main artifact to FILE");
    c->add_option("--workers", o.workers, "Worker threads (default $KRLAB_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
  };

  std::string protocolPath;
  auto* analyzeCmd = app.add_subcommand("analyze", "Soundness and secrecy of a protocol file");
  analyzeCmd->add_option("protocol", protocolPath)->required();
  analyzeCmd->add_option("--wiretap", o.wiretap, "Wiretap collection: FILE or inline JSON");
  common(analyzeCmd);

  std::string kind;
  std::vector<std::string> roles;
  auto* transformCmd = app.add_subcommand("transform", "Apply a setting transformation");
  transformCmd->add_option("kind", kind)->required()->check(
      CLI::IsMember({"lks-to-sc", "sc-to-otp", "snc-to-krpbysnc", "attach-otp"}));
  transformCmd->add_option("protocol", protocolPath)->required();
  transformCmd->add_option("--sender", roles, "attach-otp: PAIR=END picks the sending user");
  common(transformCmd);

  std::string g0sub;
  bool interactive = false;
  auto* g0Cmd = app.add_subcommand("g0", "Constructions and diagnostics on G0");
  g0Cmd->add_option("action", g0sub)->required()->check(
      CLI::IsMember({"build", "run-lkrp", "relay", "verify", "diagnose", "cover-search"}));
  g0Cmd->add_option("protocol", protocolPath, "diagnose: KRP-by-SNC protocol file");
  g0Cmd->add_flag("--interactive", interactive, "run-lkrp: emulate the butterfly with LKS+PC");
  bool userSeeded = false;
  std::string graphRef;
  g0Cmd->add_flag("--user-seeded", userSeeded, "relay: keys seeded at u_i^1, forwarded in path order");
  g0Cmd->add_option("--graph-file", graphRef, "run-lkrp/relay: reference the topology by path");
  g0Cmd->add_option("--wiretap", o.wiretap, "verify: wiretap collection");
  common(g0Cmd);

  std::string demoName;
  int demoN = 4;
  auto* demoCmd = app.add_subcommand("demo", "Emit and analyze a textbook fixture");
  demoCmd->add_option("name", demoName)->required();
  demoCmd->add_option("--n", demoN, "fig3a: number of edges");
  demoCmd->add_option("--wiretap", o.wiretap, "Override the wiretap collection");
  common(demoCmd);

  std::string oracleKind;
  auto* oracleCmd = app.add_subcommand("oracle", "Brute-force mutual information");
  oracleCmd->add_option("kind", oracleKind)->required()->check(CLI::IsMember({"mi"}));
  oracleCmd->add_option("protocol", protocolPath)->required();
  oracleCmd->add_option("--wiretap", o.wiretap, "Wiretap collection");
  oracleCmd->add_option("--oracle-bound", o.oracleBound, "Max fundamental bits (<= 24)");
  common(oracleCmd);

  std::string authSub;
  AuthArgs aa;
  auto* authCmd = app.add_subcommand("auth", "Polynomial-hash key verification");
  authCmd->add_option("action", authSub)->required()->check(CLI::IsMember({"tag", "verify"}));
  authCmd->add_option("--m", aa.m, "Field degree / tag bits")->required();
  authCmd->add_option("--l", aa.l, "Number of key blocks");
  authCmd->add_option("--key", aa.key, "Key (hex, zero-padded on the right)")->required();
  authCmd->add_option("--point", aa.point, "Hash point (hex)")->required();
  authCmd->add_option("--pad", aa.pad, "One-time pad for the tag (hex)")->required();
  authCmd->add_option("--tag", aa.tag, "verify: received encrypted tag (hex)");
  common(authCmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*analyzeCmd) return runAnalyze(o, protocolPath);
    if (*transformCmd) return runTransform(o, kind, protocolPath, roles);
    if (*g0Cmd) return runG0(o, g0sub, protocolPath, interactive, userSeeded, graphRef);
    if (*demoCmd) return runDemo(o, demoName, demoN);
    if (*oracleCmd) return runOracle(o, protocolPath);
    if (*authCmd) {
      if (authSub == "verify" && aa.tag.empty()) throw UsageError("auth verify needs --tag");
      return runAuth(o, authSub, aa);
    }
  } catch (const InvalidProtocol& ex) {
    std::cerr << "invalid protocol:\n" << ex.report().summary() << "\n";
    return kUsage;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
