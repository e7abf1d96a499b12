#pragma once

#include <stdexcept>
#include <string>

namespace tglab {

enum class ErrorKind {
  Config,        // bad input file / parameter
  Numeric,       // quadrature, normalisation, degenerate denominators
  Graph,         // precondition on a graph rewrite
  Exhausted,     // resource pool ran dry
  Verification,  // oracle disagreement
};

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

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace tglab
