#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "krlab/gf2.hpp"
#include "krlab/protocol.hpp"

namespace krlab {

struct AdversaryView {
  std::vector<EdgeId> member;
  gf2::BitMatrix rows;            // variable part only, duplicates removed
  std::vector<std::size_t> steps;  // schedule index of each row
};

struct PairSoundness {
  int pair = 0;
  bool pass = false;
  std::string reason;
  std::string value1;  // k_i^1 (or m-hat_i)
  std::string value2;
};

struct SoundnessReport {
  bool pass = false;
  std::vector<PairSoundness> pairs;
  bool independent = true;  // random-key goal only
  std::size_t keyRank = 0;
};

struct MemberSecrecy {
  std::vector<EdgeId> member;
  std::size_t viewRows = 0;
  std::size_t rankK = 0;
  std::size_t rankView = 0;
  std::size_t rankJoint = 0;
  std::size_t leak = 0;
  std::vector<std::string> witness;  // basis of the leaked span
};

struct SecrecyReport {
  bool pass = true;
  std::vector<MemberSecrecy> members;
};

struct SecurityReport {
  SoundnessReport soundness;
  SecrecyReport secrecy;
  bool secure() const { return soundness.pass && secrecy.pass; }
};

// Rows whose secrecy is demanded: outputs for random keys, m_i for messages.
gf2::BitMatrix secrecyTargets(const Transcript& t, const LinearProtocol& p);
AdversaryView buildAdversaryView(const Transcript& t, const LinearProtocol& p,
                                 const std::vector<EdgeId>& member);
SoundnessReport checkSoundness(const Transcript& t, const LinearProtocol& p);
SecrecyReport checkSecrecy(const Transcript& t, const LinearProtocol& p,
                           const WiretapCollection& w);
SecurityReport analyze(const LinearProtocol& p, const WiretapCollection& w);

// Exact I = (1/2^n) * sum_p coeff[p] * log2(p).
struct ExactMI {
  unsigned log2Denominator = 0;
  std::map<std::uint64_t, std::int64_t> coeff;

  bool isInteger() const;
  std::int64_t integerValue() const;  // requires isInteger()
  double approx() const;
  std::string str() const;
  bool operator==(const ExactMI&) const = default;
};

using BitKey = std::vector<std::uint64_t>;
// Evaluates (targets, view) for one assignment of n uniform bits.
using JointSampler = std::function<void(std::uint64_t assignment, BitKey& x, BitKey& y)>;

class OracleBoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr unsigned kDefaultOracleBound = 16;
constexpr unsigned kMaxOracleBound = 24;

ExactMI mutualInformation(unsigned nbits, const JointSampler& f, unsigned workers = 1);
ExactMI bruteForceMI(const LinearProtocol& p, const std::vector<EdgeId>& member,
                     unsigned bound = kDefaultOracleBound, unsigned workers = 1);

struct TamperReport {
  bool linear = true;
  std::size_t seeds = 0;
  std::vector<bool> stepOffset;
  std::vector<bool> outputOffset;
  bool matchesPrediction = true;
  std::string detail;
};

TamperReport checkTamperLinearity(const LinearProtocol& p, const Perturbation& pert,
                                  std::size_t seeds = 128);

nlohmann::ordered_json toJson(const SecurityReport& r);
nlohmann::ordered_json toJson(const ExactMI& mi);
nlohmann::ordered_json toJson(const TamperReport& r, const LinearProtocol& p);

}  // namespace krlab
