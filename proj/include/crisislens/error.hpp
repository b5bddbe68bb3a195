#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crisislens {

enum class ErrorKind {
  Dimension,
  Index,
  Label,
  Evaluation,
  Parameter,
  Vocabulary,
  Sequence,
  Graph,
  Input,
  Corpus,
  Parse,
  Schema,
  Split,
  Config,
  Format,
  Numeric,
  Training,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; `kind()` lets callers (and the CLI's
// exit-code mapping) branch without a class hierarchy.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace crisislens
