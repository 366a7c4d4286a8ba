#pragma once

#include <stdexcept>
#include <string>

namespace lognls {

enum class ErrorKind {
  parameter,       // regime guards, bad sizes, degenerate grids
  convergence,     // iteration limits, bracket failures, refinement breakdown
  io               // file access and format mismatches
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::parameter, what);
}

}  // namespace lognls
