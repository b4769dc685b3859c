#include "tropprod/error.hpp"

namespace tropprod {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPointed: return "NotPointed";
    case ErrorKind::RankMismatch: return "RankMismatch";
    case ErrorKind::RayOutside: return "RayOutside";
    case ErrorKind::NoSuchEdge: return "NoSuchEdge";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::Unstable: return "Unstable";
    case ErrorKind::EmptyInterior: return "EmptyInterior";
    case ErrorKind::IncompatibleStabilizations: return "IncompatibleStabilizations";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace tropprod
