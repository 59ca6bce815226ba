#include "hidss/canonical.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <memory>

#include "hidss/errors.hpp"

namespace hidss {

Error::Error(std::vector<Issue> issues)
    : std::runtime_error(issues.empty() ? std::string("error") : issues.front().message),
      issues_(std::move(issues)) {
  if (issues_.empty()) issues_.push_back({"internal", "error without issues", {}});
}

Error::Error(std::string code, std::string message, std::string field)
    : Error(std::vector<Issue>{{std::move(code), std::move(message), std::move(field)}}) {}

bool Error::has(std::string_view code) const noexcept {
  for (const auto& issue : issues_)
    if (issue.code == code) return true;
  return false;
}

void fail(std::string code, std::string message, std::string field) {
  throw Error(std::move(code), std::move(message), std::move(field));
}

std::string canonical(const Document& doc) { return doc.dump(); }

std::string content_hash(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
  std::time_t t = static_cast<std::time_t>(epoch_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Clock system_clock() {
  return [] {
    auto now = std::chrono::system_clock::now();
    return format_timestamp(
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
  };
}

Clock counting_clock(std::int64_t start_epoch_seconds) {
  auto next = std::make_shared<std::atomic<std::int64_t>>(start_epoch_seconds);
  return [next] { return format_timestamp(next->fetch_add(1)); };
}

const Document& require(const Document& doc, std::string_view key) {
  if (!doc.is_object()) fail("bad-request", "expected an object", std::string(key));
  auto it = doc.find(key);
  if (it == doc.end()) fail("bad-request", "missing field '" + std::string(key) + "'", std::string(key));
  return *it;
}

std::string require_string(const Document& doc, std::string_view key) {
  const auto& v = require(doc, key);
  if (!v.is_string()) fail("bad-request", "field '" + std::string(key) + "' must be a string", std::string(key));
  return v.get<std::string>();
}

std::int64_t require_int(const Document& doc, std::string_view key) {
  const auto& v = require(doc, key);
  if (!v.is_number_integer())
    fail("bad-request", "field '" + std::string(key) + "' must be an integer", std::string(key));
  return v.get<std::int64_t>();
}

double require_number(const Document& doc, std::string_view key) {
  const auto& v = require(doc, key);
  if (!v.is_number()) fail("bad-request", "field '" + std::string(key) + "' must be a number", std::string(key));
  return v.get<double>();
}

bool require_bool(const Document& doc, std::string_view key) {
  const auto& v = require(doc, key);
  if (!v.is_boolean()) fail("bad-request", "field '" + std::string(key) + "' must be a boolean", std::string(key));
  return v.get<bool>();
}

std::string optional_string(const Document& doc, std::string_view key, std::string fallback) {
  if (!doc.is_object()) return fallback;
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return fallback;
  if (!it->is_string()) fail("bad-request", "field '" + std::string(key) + "' must be a string", std::string(key));
  return it->get<std::string>();
}

}  // namespace hidss
