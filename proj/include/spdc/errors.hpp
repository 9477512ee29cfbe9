#pragma once

#include <stdexcept>
#include <string>

namespace spdc {

// Machine-readable failure categories. The CLI maps these to exit codes, so
// scripts can distinguish "your config is wrong" from "the fit fell over".
enum class ErrorCategory {
  parse,       // malformed input file (config, CSV, binary stream)
  validation,  // config or type invariant violated
  not_found,   // missing file / unknown preset
  domain,      // argument outside the supported range / precondition broken
  estimate,    // fit degenerate, non-convergence, infeasible estimator input
  io,          // filesystem failure
  internal,    // should-not-happen state
};

const char* category_name(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(std::string(category_name(category)) + ": " + message),
        category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::not_found: return "not_found";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::estimate: return "estimate";
    case ErrorCategory::io: return "io";
    case ErrorCategory::internal: return "internal";
  }
  return "internal";
}

[[noreturn]] inline void fail(ErrorCategory c, const std::string& msg) {
  throw Error(c, msg);
}

}  // namespace spdc
