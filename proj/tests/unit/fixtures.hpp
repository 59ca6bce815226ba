#pragma once

#include <random>
#include <string>

#include "hidss/feedback.hpp"
#include "hidss/ontology.hpp"

namespace test {

inline const hidss::PatternCatalog& patterns() {
  static const auto catalog = hidss::PatternCatalog::load(std::string(HIDSS_DATA_DIR) + "/pattern_catalog.json");
  return catalog;
}

inline const hidss::CriteriaCatalog& criteria() {
  static const auto catalog = hidss::CriteriaCatalog::load(std::string(HIDSS_DATA_DIR) + "/criteria_catalog.json");
  return catalog;
}

inline hidss::ChoiceMap first_choices(const hidss::PatternCatalog& catalog) {
  hidss::ChoiceMap out;
  for (const auto& e : catalog.elements()) out[e.id] = e.choices.front();
  return out;
}

template <class Rng>
hidss::ChoiceMap random_choices(const hidss::PatternCatalog& catalog, Rng& rng) {
  hidss::ChoiceMap out;
  for (const auto& e : catalog.elements())
    out[e.id] = e.choices[std::uniform_int_distribution<std::size_t>(0, e.choices.size() - 1)(rng)];
  return out;
}

inline hidss::BusinessModelVersion version_with(const hidss::PatternCatalog& catalog, std::string venture,
                                                int number, hidss::ChoiceMap choices,
                                                std::string industry = "fintech") {
  hidss::BusinessModelVersion v;
  v.venture_id = std::move(venture);
  v.version_number = number;
  v.choices = std::move(choices);
  v.metadata = {3, 12, std::move(industry)};
  v.created_at = "2024-01-01T00:00:00Z";
  v.catalog_version = catalog.version();
  return v;
}

/// Judgment rating every criterion with the same value.
inline hidss::Judgment uniform_judgment(const hidss::CriteriaCatalog& catalog, std::string venture, int number,
                                        std::string mentor, int rating) {
  hidss::Judgment j;
  j.version = {std::move(venture), number};
  j.mentor_id = std::move(mentor);
  j.judgment_id = j.version.venture_id + ":" + std::to_string(number) + ":" + j.mentor_id;
  for (const auto& c : catalog.criteria()) j.ratings[c.id] = rating;
  j.submitted_at = "2024-01-02T00:00:00Z";
  return j;
}

}  // namespace test
