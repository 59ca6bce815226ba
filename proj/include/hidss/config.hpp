#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "hidss/cart.hpp"
#include "hidss/feedback.hpp"
#include "hidss/matching.hpp"

namespace hidss {

enum class RetrainPolicy { manual, on_outcome };

struct ServiceConfig {
  std::filesystem::path pattern_catalog = "data/pattern_catalog.json";
  std::filesystem::path criteria_catalog = "data/criteria_catalog.json";
  std::filesystem::path mentors;     // optional seed table
  std::filesystem::path storage;     // empty: in-memory log
  std::filesystem::path model_path;  // empty: models are not persisted
  double hybrid_weight = 0.5;
  std::size_t k_min = 3;
  AggregationConfig aggregation;
  MatchWeights matching;
  std::size_t match_k = 3;
  CartParams cart;
  std::string listen = "127.0.0.1:8080";
  RetrainPolicy retrain_policy = RetrainPolicy::manual;
  bool fsync = false;

  /// Relative paths are resolved against `base_dir`.
  static ServiceConfig from_document(const Document& doc, const std::filesystem::path& base_dir = {});
  /// Reads the file, then applies HIDSS_* overrides from the environment.
  static ServiceConfig load(const std::filesystem::path& path);

  using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
  void apply_overrides(const EnvLookup& lookup);
  /// Throws invalid-config naming every out-of-range parameter.
  void validate() const;
  Document to_document() const;

  std::string host() const;
  int port() const;
};

ServiceConfig::EnvLookup process_environment();

}  // namespace hidss
