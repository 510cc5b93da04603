#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace vscrl {

// Every failure carries a stable machine-readable code ("empty-buffer",
// "invalid-plan", ...) plus optional free-form detail.
class Error : public std::runtime_error {
 public:
  explicit Error(std::string code, const std::string& detail = {})
      : std::runtime_error(detail.empty() ? code : code + ": " + detail),
        code_(std::move(code)),
        detail_(detail) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string code_;
  std::string detail_;
};

}  // namespace vscrl
