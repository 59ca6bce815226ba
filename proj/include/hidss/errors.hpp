#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hidss {

/// One machine-readable problem: a stable code, a human message and the
/// offending field path (may be empty).
struct Issue {
  std::string code;
  std::string message;
  std::string field;

  friend bool operator==(const Issue&, const Issue&) = default;
};

/// Thrown by every validating operation. Carries the complete list of
/// problems found, not just the first one.
class Error : public std::runtime_error {
 public:
  explicit Error(std::vector<Issue> issues);
  Error(std::string code, std::string message, std::string field = {});

  const std::vector<Issue>& issues() const noexcept { return issues_; }
  const std::string& code() const noexcept { return issues_.front().code; }
  bool has(std::string_view code) const noexcept;

 private:
  std::vector<Issue> issues_;
};

[[noreturn]] void fail(std::string code, std::string message, std::string field = {});

}  // namespace hidss
