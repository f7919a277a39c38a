#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace encpart::runtime {

// A failure inside DSL execution. `trace` lists frames innermost first,
// across both isolates; transition frames are marked.
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string& message, std::vector<std::string> trace = {})
      : std::runtime_error(message), message_(message), trace_(std::move(trace)) {}

  const std::string& message() const { return message_; }
  const std::vector<std::string>& trace() const { return trace_; }
  void set_trace(std::vector<std::string> t) { trace_ = std::move(t); }
  bool has_trace() const { return !trace_.empty(); }

  // Message followed by one indented line per frame.
  std::string describe() const;

 private:
  std::string message_;
  std::vector<std::string> trace_;
};

// The hash is not in the callee's mirror-proxy registry.
class StaleMirror : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

class TransitionOverflow : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

// A value does not match the marshal kind of its slot.
class KindMismatch : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

// A transition names a relay the interface descriptor does not list.
class UnknownTarget : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

// Raised at load time: an image references a stub with no descriptor record.
class InterfaceMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace encpart::runtime
