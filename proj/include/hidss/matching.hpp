#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hidss/ontology.hpp"

namespace hidss {

enum class ExpertiseTag { market, technology, finance };

std::string_view to_string(ExpertiseTag tag);
std::optional<ExpertiseTag> parse_tag(std::string_view s);

struct MentorProfile {
  std::string mentor_id;
  std::set<ExpertiseTag> tags;
  std::set<std::string> industries;
  std::string display_name;

  friend bool operator==(const MentorProfile&, const MentorProfile&) = default;
};

void validate_mentor(const MentorProfile& mentor);
Document to_document(const MentorProfile& mentor);
MentorProfile mentor_from_document(const Document& doc);

/// Reads "id,tags,industries[,display_name]" rows; tags and industries are
/// ';'-separated. A first row starting with "mentor_id" is treated as header.
std::vector<MentorProfile> parse_mentor_table(std::istream& in);

struct MatchWeights {
  double dimension = 2.0;
  double industry = 1.0;
  double secondary = 0.5;
};

/// Which expertise a value dimension primarily needs, and which helps.
struct TagRoute {
  ExpertiseTag primary;
  ExpertiseTag secondary;
};

TagRoute tag_route(Dimension d);

double match_score(const MentorProfile& mentor, const BusinessModelVersion& version, Dimension dimension,
                   const MatchWeights& weights = {});
/// Throws unknown-dimension for names outside the four value dimensions.
double match_score(const MentorProfile& mentor, const BusinessModelVersion& version,
                   std::string_view dimension, const MatchWeights& weights = {});

struct MatchEntry {
  std::string mentor_id;
  double score = 0.0;
  bool low_confidence = false;  // zero score, listed only as last resort

  friend bool operator==(const MatchEntry&, const MatchEntry&) = default;
};

using MatchAssignment = std::map<Dimension, std::vector<MatchEntry>>;

/// Top-k mentors per dimension, score descending then mentor id ascending.
MatchAssignment recommend(const BusinessModelVersion& version, std::span<const MentorProfile> pool,
                          std::size_t k, const MatchWeights& weights = {});

Document to_document(const MatchAssignment& assignment);

}  // namespace hidss
