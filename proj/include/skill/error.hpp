#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace skill {

/// Domain error with a stable machine-readable code (e.g. "duplicate-id")
/// plus a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace skill
