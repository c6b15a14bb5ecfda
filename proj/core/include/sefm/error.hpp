#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace sefm {

// Every failure the library reports carries a machine-readable kind string.
// The kinds are part of the file-format and CLI contracts; tests and the
// corpus manifest match on them.
namespace errkind {
inline constexpr const char* kSyntax = "SyntaxError";
inline constexpr const char* kDanglingPrecondition = "DanglingPrecondition";
inline constexpr const char* kPreconditionCycle = "PreconditionCycle";
inline constexpr const char* kGeometry = "GeometryError";
inline constexpr const char* kNoFrameEvoked = "NoFrameEvoked";
inline constexpr const char* kAmbiguousEvocation = "AmbiguousEvocation";
inline constexpr const char* kUnreachable = "Unreachable";
inline constexpr const char* kPreconditionViolation = "PreconditionViolation";
inline constexpr const char* kOutOfReach = "OutOfReach";
inline constexpr const char* kNoAffordance = "NoAffordance";
inline constexpr const char* kEmptyFreeSpace = "EmptyFreeSpace";
inline constexpr const char* kNoReachableViewpoint = "NoReachableViewpoint";
inline constexpr const char* kConfig = "ConfigError";
}  // namespace errkind

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message, int line = 0, int column = 0)
      : std::runtime_error(message), kind_(std::move(kind)), line_(line), column_(column) {}

  const std::string& kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string kind_;
  int line_;
  int column_;
};

}  // namespace sefm
