#pragma once

#include <stdexcept>
#include <string>

namespace cgmkit {

// Error taxonomy shared by the C++ core, the C API status codes, and the
// CLI exit codes. Loaders distinguish corrupt files from well-formed files
// that fail validation (wrong shape, wrong environment hash).
enum class ErrorKind {
  validation,      // bad arguments or inconsistent configuration
  io,              // unreadable/unwritable file or directory
  corrupt_file,    // bad magic, truncated payload, version mismatch
  shape_mismatch,  // tensor shape disagrees with the declared grid
  hash_mismatch,   // artifact belongs to a different environment
  divergence,      // non-finite values during training
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) fail(kind, msg);
}

}  // namespace cgmkit
