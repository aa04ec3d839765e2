#pragma once

#include <stdexcept>
#include <string>

namespace pcir {

enum class ErrorCode {
  Argument,  // caller broke a precondition (unknown name, bad parameter)
  Domain,    // well-formed request with no defined answer (zero-probability evidence, size caps)
  Io,        // file system failure
  Parse,     // malformed input document
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pcir
