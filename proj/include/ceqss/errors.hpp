#pragma once

#include <stdexcept>
#include <string>

namespace ceqss {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotInvertible : Error {
  explicit NotInvertible(const std::string& msg) : Error(msg) {}
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

struct SingularMatrix : Error {
  explicit SingularMatrix(const std::string& msg) : Error(msg) {}
};

struct BadEvaluationPoints : Error {
  explicit BadEvaluationPoints(const std::string& msg) : Error(msg) {}
};

struct IndexError : Error {
  explicit IndexError(const std::string& msg) : Error(msg) {}
};

struct ZeroState : Error {
  explicit ZeroState(const std::string& msg) : Error(msg) {}
};

struct CapacityExceeded : Error {
  explicit CapacityExceeded(const std::string& msg) : Error(msg) {}
};

struct NoCloningViolation : Error {
  explicit NoCloningViolation(const std::string& msg) : Error(msg) {}
};

struct BadModulus : Error {
  explicit BadModulus(const std::string& msg) : Error(msg) {}
};

struct AccessStructureViolation : Error {
  explicit AccessStructureViolation(const std::string& msg) : Error(msg) {}
};

struct UnsupportedD : Error {
  explicit UnsupportedD(const std::string& msg) : Error(msg) {}
};

struct ScheduleError : Error {
  explicit ScheduleError(const std::string& msg) : Error(msg) {}
};

struct PlanError : Error {
  explicit PlanError(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace ceqss
