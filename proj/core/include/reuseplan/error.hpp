#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reuseplan {

enum class ErrorKind {
  parse,       // malformed document
  validation,  // well-formed but violates a model invariant
  config,      // bad algorithm or sampler configuration
  limit,       // input exceeds a guarded size
  io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace reuseplan
