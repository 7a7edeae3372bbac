#ifndef CERTLOOP_ERRORS_HPP
#define CERTLOOP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace certloop {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("parse error (line " + std::to_string(line) + "): " + what), line(line) {}
  int line;
};

class MissingParameter : public Error {
 public:
  explicit MissingParameter(const std::string& name)
      : Error("missing parameter: " + name), name(name) {}
  std::string name;
};

class OutOfRange : public Error {
 public:
  OutOfRange(const std::string& name, double value)
      : Error("parameter out of range: " + name + " = " + std::to_string(value)),
        name(name),
        value(value) {}
  std::string name;
  double value;
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& detail)
      : Error("model invariant violated: " + detail) {}
};

class NonConvergence : public Error {
 public:
  explicit NonConvergence(const std::string& detail) : Error("solver did not converge: " + detail) {}
};

class DivergentReward : public Error {
 public:
  explicit DivergentReward(const std::string& detail)
      : Error("expected reward diverges: " + detail) {}
};

class HorizonOverflow : public Error {
 public:
  explicit HorizonOverflow(const std::string& detail)
      : Error("uniformisation truncation overflow: " + detail) {}
};

class IncompatibleProperty : public Error {
 public:
  explicit IncompatibleProperty(const std::string& detail)
      : Error("property incompatible with model: " + detail) {}
};

class UnknownParameter : public Error {
 public:
  explicit UnknownParameter(const std::string& name)
      : Error("unknown sensed parameter: " + name), name(name) {}
  std::string name;
};

class StaleTimestamp : public Error {
 public:
  explicit StaleTimestamp(const std::string& detail) : Error("stale timestamp: " + detail) {}
};

class SameConfiguration : public Error {
 public:
  SameConfiguration() : Error("plan requested between identical configurations") {}
};

class EffectorFailure : public Error {
 public:
  explicit EffectorFailure(const std::string& step)
      : Error("effector rejected step: " + step), step(step) {}
  std::string step;
};

class StateSpaceExceeded : public Error {
 public:
  explicit StateSpaceExceeded(std::size_t cap)
      : Error("reachable state space exceeds cap of " + std::to_string(cap)) {}
};

class UnmatchedChannel : public Error {
 public:
  explicit UnmatchedChannel(const std::string& channel)
      : Error("channel has no matching sender/receiver pair: " + channel), channel(channel) {}
  std::string channel;
};

class MissingDesignEvidence : public Error {
 public:
  explicit MissingDesignEvidence(const std::string& property_id)
      : Error("design evidence missing verdict for " + property_id), property_id(property_id) {}
  std::string property_id;
};

class EvidenceMismatch : public Error {
 public:
  explicit EvidenceMismatch(const std::string& detail) : Error("evidence mismatch: " + detail) {}
};

class UnknownFormat : public Error {
 public:
  explicit UnknownFormat(const std::string& format) : Error("unknown render format: " + format) {}
};

class ZeroSpeedHorizon : public Error {
 public:
  ZeroSpeedHorizon() : Error("requirement horizon undefined at zero speed") {}
};

class CommandOnUnknownSensor : public Error {
 public:
  explicit CommandOnUnknownSensor(int index)
      : Error("command addresses unknown sensor " + std::to_string(index)) {}
};

class UnknownService : public Error {
 public:
  explicit UnknownService(const std::string& id) : Error("unknown service: " + id) {}
};

class CorruptArchive : public Error {
 public:
  explicit CorruptArchive(const std::string& detail) : Error("corrupt archive: " + detail) {}
};

}  // namespace certloop

#endif
