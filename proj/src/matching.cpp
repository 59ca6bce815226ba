#include "hidss/matching.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

namespace hidss {

namespace {

constexpr std::array<std::string_view, 3> kTagNames = {"market", "technology", "finance"};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string_view to_string(ExpertiseTag tag) { return kTagNames[static_cast<std::size_t>(tag)]; }

std::optional<ExpertiseTag> parse_tag(std::string_view s) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i)
    if (kTagNames[i] == s) return static_cast<ExpertiseTag>(i);
  return std::nullopt;
}

void validate_mentor(const MentorProfile& mentor) {
  std::vector<Issue> issues;
  if (mentor.mentor_id.empty()) issues.push_back({"bad-request", "mentor_id is empty", "mentor_id"});
  if (mentor.tags.empty()) issues.push_back({"missing-tag", "a mentor needs at least one expertise tag", "tags"});
  if (!issues.empty()) throw Error(std::move(issues));
}

Document to_document(const MentorProfile& m) {
  Document tags = Document::array();
  for (auto t : m.tags) tags.push_back(to_string(t));
  return {{"mentor_id", m.mentor_id},
          {"tags", tags},
          {"industries", m.industries},
          {"display_name", m.display_name}};
}

MentorProfile mentor_from_document(const Document& doc) {
  MentorProfile m;
  m.mentor_id = require_string(doc, "mentor_id");
  const auto& tags = require(doc, "tags");
  if (!tags.is_array()) fail("bad-request", "tags must be a list", "tags");
  for (const auto& t : tags) {
    if (!t.is_string()) fail("unknown-tag", "tags must be strings", "tags");
    auto tag = parse_tag(t.get<std::string>());
    if (!tag) fail("unknown-tag", "unknown expertise tag '" + t.get<std::string>() + "'", "tags");
    m.tags.insert(*tag);
  }
  if (doc.contains("industries"))
    for (const auto& i : doc.at("industries")) m.industries.insert(i.get<std::string>());
  m.display_name = optional_string(doc, "display_name", m.mentor_id);
  validate_mentor(m);
  return m;
}

std::vector<MentorProfile> parse_mentor_table(std::istream& in) {
  std::vector<MentorProfile> mentors;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto cols = split(line, ',');
    if (row == 1 && cols.front() == "mentor_id") continue;
    std::string where = "row " + std::to_string(row);
    if (cols.size() < 3) fail("bad-request", where + ": expected id,tags,industries", where);
    MentorProfile m;
    m.mentor_id = cols[0];
    for (const auto& t : split(cols[1], ';')) {
      if (t.empty()) continue;
      auto tag = parse_tag(t);
      if (!tag) fail("unknown-tag", where + ": unknown expertise tag '" + t + "'", where);
      m.tags.insert(*tag);
    }
    for (const auto& i : split(cols[2], ';'))
      if (!i.empty()) m.industries.insert(i);
    m.display_name = cols.size() > 3 ? cols[3] : m.mentor_id;
    validate_mentor(m);
    mentors.push_back(std::move(m));
  }
  return mentors;
}

TagRoute tag_route(Dimension d) {
  switch (d) {
    case Dimension::value_proposition:
    case Dimension::value_delivery:
      return {ExpertiseTag::market, ExpertiseTag::technology};
    case Dimension::value_creation:
      return {ExpertiseTag::technology, ExpertiseTag::market};
    case Dimension::value_capture:
      return {ExpertiseTag::finance, ExpertiseTag::market};
  }
  return {ExpertiseTag::market, ExpertiseTag::technology};
}

double match_score(const MentorProfile& mentor, const BusinessModelVersion& version, Dimension dimension,
                   const MatchWeights& w) {
  auto route = tag_route(dimension);
  double score = 0.0;
  if (mentor.tags.contains(route.primary)) score += w.dimension;
  if (mentor.industries.contains(version.metadata.industry)) score += w.industry;
  if (mentor.tags.contains(route.secondary)) score += w.secondary;
  return score;
}

double match_score(const MentorProfile& mentor, const BusinessModelVersion& version,
                   std::string_view dimension, const MatchWeights& weights) {
  auto d = parse_dimension(dimension);
  if (!d) fail("unknown-dimension", "unknown dimension '" + std::string(dimension) + "'", "dimension");
  return match_score(mentor, version, *d, weights);
}

MatchAssignment recommend(const BusinessModelVersion& version, std::span<const MentorProfile> pool,
                          std::size_t k, const MatchWeights& weights) {
  if (k == 0) fail("invalid-k", "k must be positive", "k");
  if (pool.empty()) fail("empty-pool", "no mentors registered", "mentors");
  MatchAssignment out;
  for (auto d : kDimensions) {
    std::vector<MatchEntry> ranked;
    ranked.reserve(pool.size());
    for (const auto& m : pool) {
      double s = match_score(m, version, d, weights);
      ranked.push_back({m.mentor_id, s, s <= 0.0});
    }
    auto by_rank = [](const MatchEntry& a, const MatchEntry& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.mentor_id < b.mentor_id;
    };
    std::size_t keep = std::min(k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), by_rank);
    ranked.resize(keep);
    out[d] = std::move(ranked);
  }
  return out;
}

Document to_document(const MatchAssignment& assignment) {
  Document doc = Document::object();
  for (const auto& [d, entries] : assignment) {
    Document list = Document::array();
    for (const auto& e : entries)
      list.push_back({{"mentor_id", e.mentor_id}, {"score", e.score}, {"low_confidence", e.low_confidence}});
    doc[std::string(to_string(d))] = list;
  }
  return doc;
}

}  // namespace hidss
