#pragma once

#include <stdexcept>
#include <string>

namespace posat {

enum class ErrorCode {
  InvalidNetwork,
  InvalidDemand,
  InvalidCost,
  UnknownNode,
  PathNotConnected,
  NegativeKappa,
  NegativeDegree,
  NotSeparable,
  LambdaOutOfRange,
  NegativeArcTime,
  DisconnectedOD,
  MultipleOrigins,
  NonpositiveDemand,
  NoIntegerRatio,
  ParseError,
  UnsupportedPower,
  PRUEFailed,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace posat
