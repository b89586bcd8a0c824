#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adaptk {

// Broad failure classes. The CLI maps each to its own exit code.
enum class ErrorKind {
  invalid_argument,  // precondition on a call was violated
  not_found,         // unknown image, tag or key
  parse,             // malformed input file
  io,                // file could not be opened or written
  untrainable,       // threshold cannot be learned from the given labels
  degenerate,        // numerically undefined result (zero counts, singular fit)
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
    case ErrorKind::untrainable: return "untrainable";
    case ErrorKind::degenerate: return "degenerate";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace adaptk
