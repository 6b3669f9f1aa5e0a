#pragma once

#include <stdexcept>
#include <string>

namespace hsg {

/// Failure categories, mapped 1:1 onto CLI exit codes.
enum class ErrorCategory {
  config,     // exit 2: bad configuration or usage
  data,       // exit 3: dataset / fixture problems
  backend,    // exit 4: policy backend failures (endpoint, truncation, ...)
  assertion,  // exit 5: internal contract violations and audit failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& message)
      : std::runtime_error(message), category_(category), code_(std::move(code)) {}

  ErrorCategory category() const { return category_; }
  const std::string& code() const { return code_; }

 private:
  ErrorCategory category_;
  std::string code_;
};

inline Error config_error(std::string code, const std::string& message) {
  return Error(ErrorCategory::config, std::move(code), message);
}
inline Error data_error(std::string code, const std::string& message) {
  return Error(ErrorCategory::data, std::move(code), message);
}
inline Error backend_error(std::string code, const std::string& message) {
  return Error(ErrorCategory::backend, std::move(code), message);
}
inline Error assertion_error(std::string code, const std::string& message) {
  return Error(ErrorCategory::assertion, std::move(code), message);
}

inline int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::data: return 3;
    case ErrorCategory::backend: return 4;
    case ErrorCategory::assertion: return 5;
  }
  return 1;
}

}  // namespace hsg
