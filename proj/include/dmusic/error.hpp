#pragma once

#include <stdexcept>
#include <string>

namespace dmusic {

enum class ErrorKind {
  invalid_input,
  invalid_state,
  insufficient_samples,
  degenerate_noise_space,
  order_overflow,
  generation,
  empty_structure,
  search_exhausted,
  precondition,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for every recoverable failure in the library. The
/// kind lets callers (the CLI, the pipeline fallback, the Python layer)
/// dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace dmusic
