#include "hidss/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

namespace hidss {

namespace {

double parse_double(const std::string& text, const std::string& field) {
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  fail("invalid-config", field + " must be a number", field);
}

std::size_t parse_size(const std::string& text, const std::string& field) {
  double v = parse_double(text, field);
  if (v < 0 || v != std::floor(v) || !std::isfinite(v)) fail("invalid-config", field + " must be a non-negative integer", field);
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& text, const std::string& field) {
  if (text == "1" || text == "true" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "no") return false;
  fail("invalid-config", field + " must be a boolean", field);
}

RetrainPolicy parse_policy(const std::string& text) {
  if (text == "manual") return RetrainPolicy::manual;
  if (text == "on-outcome") return RetrainPolicy::on_outcome;
  fail("invalid-config", "retrain_policy must be manual or on-outcome", "retrain_policy");
}

// Numbers may be written as JSON numbers or strings ("inf" for no threshold).
std::string scalar_text(const Document& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

}  // namespace

ServiceConfig ServiceConfig::from_document(const Document& doc, const std::filesystem::path& base_dir) {
  ServiceConfig c;
  auto path = [&](const char* key, std::filesystem::path& out) {
    if (!doc.contains(key) || doc.at(key).is_null()) return;
    std::filesystem::path p = doc.at(key).get<std::string>();
    out = (p.is_relative() && !base_dir.empty()) ? base_dir / p : p;
  };
  path("pattern_catalog", c.pattern_catalog);
  path("criteria_catalog", c.criteria_catalog);
  path("mentors", c.mentors);
  path("storage", c.storage);
  path("model_path", c.model_path);
  auto text = [&](const Document& obj, const char* key) -> std::optional<std::string> {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return scalar_text(obj.at(key));
  };
  if (auto v = text(doc, "hybrid_weight")) c.hybrid_weight = parse_double(*v, "hybrid_weight");
  if (auto v = text(doc, "k_min")) c.k_min = parse_size(*v, "k_min");
  if (auto v = text(doc, "contested_threshold")) c.aggregation.contested_threshold = parse_double(*v, "contested_threshold");
  if (auto v = text(doc, "trim")) c.aggregation.trim = parse_bool(*v, "trim");
  if (auto v = text(doc, "match_k")) c.match_k = parse_size(*v, "match_k");
  if (auto v = text(doc, "listen")) c.listen = *v;
  if (auto v = text(doc, "retrain_policy")) c.retrain_policy = parse_policy(*v);
  if (auto v = text(doc, "fsync")) c.fsync = parse_bool(*v, "fsync");
  if (doc.contains("matching")) {
    const auto& m = doc.at("matching");
    if (auto v = text(m, "dimension")) c.matching.dimension = parse_double(*v, "matching.dimension");
    if (auto v = text(m, "industry")) c.matching.industry = parse_double(*v, "matching.industry");
    if (auto v = text(m, "secondary")) c.matching.secondary = parse_double(*v, "matching.secondary");
  }
  if (doc.contains("cart")) {
    const auto& m = doc.at("cart");
    if (auto v = text(m, "max_depth")) c.cart.max_depth = static_cast<int>(parse_size(*v, "cart.max_depth"));
    if (auto v = text(m, "min_leaf")) c.cart.min_leaf = parse_size(*v, "cart.min_leaf");
    if (auto v = text(m, "min_impurity_decrease"))
      c.cart.min_impurity_decrease = parse_double(*v, "cart.min_impurity_decrease");
  }
  return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open config " + path.string(), "config");
  auto c = from_document(Document::parse(in), path.parent_path());
  c.apply_overrides(process_environment());
  c.validate();
  return c;
}

void ServiceConfig::apply_overrides(const EnvLookup& lookup) {
  auto get = [&](const char* name) { return lookup(std::string("HIDSS_") + name); };
  if (auto v = get("PATTERN_CATALOG")) pattern_catalog = *v;
  if (auto v = get("CRITERIA_CATALOG")) criteria_catalog = *v;
  if (auto v = get("MENTORS")) mentors = *v;
  if (auto v = get("STORAGE")) storage = *v;
  if (auto v = get("MODEL_PATH")) model_path = *v;
  if (auto v = get("HYBRID_WEIGHT")) hybrid_weight = parse_double(*v, "HIDSS_HYBRID_WEIGHT");
  if (auto v = get("K_MIN")) k_min = parse_size(*v, "HIDSS_K_MIN");
  if (auto v = get("CONTESTED_THRESHOLD")) aggregation.contested_threshold = parse_double(*v, "HIDSS_CONTESTED_THRESHOLD");
  if (auto v = get("TRIM")) aggregation.trim = parse_bool(*v, "HIDSS_TRIM");
  if (auto v = get("MATCH_K")) match_k = parse_size(*v, "HIDSS_MATCH_K");
  if (auto v = get("W_DIM")) matching.dimension = parse_double(*v, "HIDSS_W_DIM");
  if (auto v = get("W_IND")) matching.industry = parse_double(*v, "HIDSS_W_IND");
  if (auto v = get("W_ANY")) matching.secondary = parse_double(*v, "HIDSS_W_ANY");
  if (auto v = get("CART_MAX_DEPTH")) cart.max_depth = static_cast<int>(parse_size(*v, "HIDSS_CART_MAX_DEPTH"));
  if (auto v = get("CART_MIN_LEAF")) cart.min_leaf = parse_size(*v, "HIDSS_CART_MIN_LEAF");
  if (auto v = get("CART_MIN_IMPURITY_DECREASE"))
    cart.min_impurity_decrease = parse_double(*v, "HIDSS_CART_MIN_IMPURITY_DECREASE");
  if (auto v = get("LISTEN")) listen = *v;
  if (auto v = get("RETRAIN_POLICY")) retrain_policy = parse_policy(*v);
  if (auto v = get("FSYNC")) fsync = parse_bool(*v, "HIDSS_FSYNC");
}

void ServiceConfig::validate() const {
  std::vector<Issue> issues;
  auto bad = [&](const char* field, const char* msg) { issues.push_back({"invalid-config", msg, field}); };
  if (!(hybrid_weight >= 0.0 && hybrid_weight <= 1.0)) bad("hybrid_weight", "hybrid_weight must lie in [0,1]");
  if (k_min < 1) bad("k_min", "k_min must be at least 1");
  if (std::isnan(aggregation.contested_threshold) || aggregation.contested_threshold < 0.0)
    bad("contested_threshold", "contested_threshold must be >= 0");
  if (match_k < 1) bad("match_k", "match_k must be at least 1");
  for (double w : {matching.dimension, matching.industry, matching.secondary})
    if (!std::isfinite(w) || w < 0.0) {
      bad("matching", "matching weights must be finite and >= 0");
      break;
    }
  if (cart.max_depth < 0 || cart.max_depth > 32) bad("cart.max_depth", "cart.max_depth must lie in [0,32]");
  if (cart.min_leaf < 1) bad("cart.min_leaf", "cart.min_leaf must be at least 1");
  if (!(cart.min_impurity_decrease >= 0.0)) bad("cart.min_impurity_decrease", "cart.min_impurity_decrease must be >= 0");
  if (port() <= 0 || port() > 65535) bad("listen", "listen must be host:port");
  if (!issues.empty()) throw Error(std::move(issues));
}

Document ServiceConfig::to_document() const {
  Document threshold = std::isinf(aggregation.contested_threshold) ? Document("inf")
                                                                   : Document(aggregation.contested_threshold);
  return {{"pattern_catalog", pattern_catalog.string()},
          {"criteria_catalog", criteria_catalog.string()},
          {"mentors", mentors.string()},
          {"storage", storage.string()},
          {"model_path", model_path.string()},
          {"hybrid_weight", hybrid_weight},
          {"k_min", k_min},
          {"contested_threshold", threshold},
          {"trim", aggregation.trim},
          {"match_k", match_k},
          {"matching", {{"dimension", matching.dimension}, {"industry", matching.industry}, {"secondary", matching.secondary}}},
          {"cart",
           {{"max_depth", cart.max_depth}, {"min_leaf", cart.min_leaf}, {"min_impurity_decrease", cart.min_impurity_decrease}}},
          {"listen", listen},
          {"retrain_policy", retrain_policy == RetrainPolicy::manual ? "manual" : "on-outcome"},
          {"fsync", fsync}};
}

std::string ServiceConfig::host() const {
  auto colon = listen.rfind(':');
  return colon == std::string::npos ? listen : listen.substr(0, colon);
}

int ServiceConfig::port() const {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) return -1;
  try {
    return std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    return -1;
  }
}

ServiceConfig::EnvLookup process_environment() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

}  // namespace hidss
