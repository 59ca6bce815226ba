#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace hidss {

/// Structured document type used for every file, event and wire payload.
/// Object keys are kept sorted, so `canonical()` renderings are stable.
using Document = nlohmann::json;

/// Compact rendering with sorted keys and shortest round-trip numbers.
std::string canonical(const Document& doc);

/// 64-bit FNV-1a over the bytes, rendered as 16 hex digits.
std::string content_hash(std::string_view bytes);

/// Returns an ISO-8601 UTC timestamp ("2024-05-01T12:00:00Z").
using Clock = std::function<std::string()>;
Clock system_clock();
/// Deterministic clock for tests and simulation: start, start+1s, ...
Clock counting_clock(std::int64_t start_epoch_seconds = 1'700'000'000);
std::string format_timestamp(std::int64_t epoch_seconds);

// Typed field access that reports a bad-request issue naming the field.
const Document& require(const Document& doc, std::string_view key);
std::string require_string(const Document& doc, std::string_view key);
std::int64_t require_int(const Document& doc, std::string_view key);
double require_number(const Document& doc, std::string_view key);
bool require_bool(const Document& doc, std::string_view key);
std::string optional_string(const Document& doc, std::string_view key, std::string fallback = {});

}  // namespace hidss
