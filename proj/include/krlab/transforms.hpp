#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "krlab/protocol.hpp"

namespace krlab {

class TransformError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TransformTrace {
  std::string kind;
  Setting sourceSetting = Setting::KRP;
  Setting targetSetting = Setting::KRP;
  // Source step index -> image step indices.
  std::vector<std::vector<std::size_t>> stepMap;
  // Source variable -> image expression.
  std::map<Variable, LinExpr> variableMap;
};

struct TransformResult {
  LinearProtocol protocol;
  TransformTrace trace;
};

TransformResult lksToSc(const LinearProtocol& p);
TransformResult scToOtp(const LinearProtocol& p);
TransformResult sncToKrpBySnc(const LinearProtocol& p);
// senderEnd[pair] picks u_i^1 or u_i^2 as sender; missing pairs use the graph's role.
TransformResult attachOtpMessage(const LinearProtocol& p, const std::map<int, int>& senderEnd = {});

LinExpr substitute(const LinExpr& e, const std::map<Variable, LinExpr>& map);

nlohmann::ordered_json toJson(const TransformTrace& t);

}  // namespace krlab
