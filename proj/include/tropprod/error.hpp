#pragma once

#include <stdexcept>
#include <string>

namespace tropprod {

enum class ErrorKind {
  NotPointed,
  RankMismatch,
  RayOutside,
  NoSuchEdge,
  Disconnected,
  Unstable,
  EmptyInterior,
  IncompatibleStabilizations,
  InvalidInput,
};

const char* to_string(ErrorKind kind);

// Recoverable domain errors. Broken internal invariants use std::logic_error.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tropprod
