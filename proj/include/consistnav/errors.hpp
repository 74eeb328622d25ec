#pragma once

#include <stdexcept>
#include <string>

namespace consistnav {

// Error families. Each maps onto one C API status / CLI exit code.
enum class ErrorKind {
  InvalidArgument,
  Bounds,
  Schema,
  Io,
  InternalConsistency,
  ContractViolation,
  NoSubgoal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};
struct BoundsError : Error {
  explicit BoundsError(const std::string& w) : Error(ErrorKind::Bounds, w) {}
};
struct SchemaError : Error {
  explicit SchemaError(const std::string& w) : Error(ErrorKind::Schema, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};
struct ConsistencyError : Error {
  explicit ConsistencyError(const std::string& w) : Error(ErrorKind::InternalConsistency, w) {}
};
struct ContractViolation : Error {
  explicit ContractViolation(const std::string& w) : Error(ErrorKind::ContractViolation, w) {}
};
struct NoSubgoalError : Error {
  explicit NoSubgoalError(const std::string& w) : Error(ErrorKind::NoSubgoal, w) {}
};

}  // namespace consistnav
