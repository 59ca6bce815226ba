#include "hidss/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace hidss {

namespace {

constexpr std::array<std::string_view, 4> kAssessmentNames = {"desirability", "implementability",
                                                              "scalability", "profitability"};
constexpr std::array<std::size_t, 4> kExpectedPerDimension = {6, 5, 5, 5};

}  // namespace

std::string_view to_string(AssessmentDimension d) { return kAssessmentNames[static_cast<std::size_t>(d)]; }

std::optional<AssessmentDimension> parse_assessment_dimension(std::string_view s) {
  for (std::size_t i = 0; i < kAssessmentNames.size(); ++i)
    if (kAssessmentNames[i] == s) return static_cast<AssessmentDimension>(i);
  return std::nullopt;
}

std::string_view display_label(AssessmentDimension d) {
  return d == AssessmentDimension::implementability ? "feasibility" : to_string(d);
}

CriteriaCatalog::CriteriaCatalog(std::string version, std::vector<CriterionDef> criteria)
    : version_(std::move(version)), criteria_(std::move(criteria)) {
  std::vector<Issue> issues;
  if (criteria_.size() != kCriteriaCount)
    issues.push_back({"invalid-catalog", "expected 21 criteria, got " + std::to_string(criteria_.size()),
                      "criteria"});
  std::array<std::size_t, 4> counts{};
  std::set<std::string> ids;
  for (const auto& c : criteria_) {
    ++counts[static_cast<std::size_t>(c.dimension)];
    if (!ids.insert(c.id).second)
      issues.push_back({"invalid-catalog", "duplicate criterion '" + c.id + "'", "criteria." + c.id});
  }
  if (counts != kExpectedPerDimension)
    issues.push_back({"invalid-catalog", "criteria per dimension must be 6/5/5/5", "criteria"});
  if (!issues.empty()) throw Error(std::move(issues));
}

CriteriaCatalog CriteriaCatalog::from_document(const Document& doc) {
  std::vector<CriterionDef> criteria;
  for (const auto& c : require(doc, "criteria")) {
    CriterionDef def;
    def.id = require_string(c, "id");
    auto dim = parse_assessment_dimension(require_string(c, "dimension"));
    if (!dim) fail("invalid-catalog", "criterion '" + def.id + "' has an unknown dimension", "criteria." + def.id);
    def.dimension = *dim;
    def.display_name = optional_string(c, "name", def.id);
    criteria.push_back(std::move(def));
  }
  return CriteriaCatalog(require_string(doc, "catalog_version"), std::move(criteria));
}

CriteriaCatalog CriteriaCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open criteria catalog " + path.string());
  return from_document(Document::parse(in));
}

Document CriteriaCatalog::to_document() const {
  Document list = Document::array();
  for (const auto& c : criteria_)
    list.push_back({{"id", c.id}, {"dimension", to_string(c.dimension)}, {"name", c.display_name}});
  return {{"catalog_version", version_}, {"criteria", list}};
}

std::optional<std::size_t> CriteriaCatalog::index_of(std::string_view criterion_id) const {
  for (std::size_t i = 0; i < criteria_.size(); ++i)
    if (criteria_[i].id == criterion_id) return i;
  return std::nullopt;
}

Document to_document(const Judgment& j) {
  Document comments = Document::object();
  for (const auto& [d, text] : j.comments) comments[std::string(to_string(d))] = text;
  Document authority = Document::array();
  for (auto d : j.authority) authority.push_back(to_string(d));
  return {{"judgment_id", j.judgment_id},
          {"venture_id", j.version.venture_id},
          {"version_number", j.version.version_number},
          {"mentor_id", j.mentor_id},
          {"ratings", j.ratings},
          {"comments", comments},
          {"submitted_at", j.submitted_at},
          {"authority", authority}};
}

Judgment judgment_from_document(const Document& doc) {
  Judgment j;
  j.judgment_id = optional_string(doc, "judgment_id");
  j.version.venture_id = require_string(doc, "venture_id");
  j.version.version_number = static_cast<int>(require_int(doc, "version_number"));
  j.mentor_id = require_string(doc, "mentor_id");
  const auto& ratings = require(doc, "ratings");
  if (!ratings.is_object()) fail("bad-request", "ratings must be an object", "ratings");
  std::vector<Issue> issues;
  for (const auto& [id, value] : ratings.items()) {
    if (!value.is_number_integer()) {
      issues.push_back({"rating-out-of-range", "rating for '" + id + "' must be an integer in [1,10]",
                        "ratings." + id});
      continue;
    }
    auto v = value.get<std::int64_t>();
    j.ratings[id] = static_cast<int>(std::clamp<std::int64_t>(v, -1'000'000, 1'000'000));
  }
  if (!issues.empty()) throw Error(std::move(issues));
  if (auto it = doc.find("comments"); it != doc.end() && !it->is_null()) {
    for (const auto& [key, text] : it->items()) {
      auto d = parse_dimension(key);
      if (!d) fail("unknown-dimension", "comment dimension '" + key + "' is unknown", "comments." + key);
      if (!text.is_string()) fail("bad-request", "comment must be a string", "comments." + key);
      if (!text.get<std::string>().empty()) j.comments[*d] = text.get<std::string>();
    }
  }
  j.submitted_at = optional_string(doc, "submitted_at");
  if (auto it = doc.find("authority"); it != doc.end() && it->is_array())
    for (const auto& a : *it)
      if (auto d = parse_dimension(a.get<std::string>())) j.authority.push_back(*d);
  return j;
}

void validate_judgment(const Judgment& j, const CriteriaCatalog& catalog) {
  std::vector<Issue> issues;
  if (j.mentor_id.empty()) issues.push_back({"bad-request", "mentor_id is empty", "mentor_id"});
  for (const auto& [id, value] : j.ratings) {
    if (!catalog.index_of(id)) {
      issues.push_back({"unknown-criterion", "criterion '" + id + "' is not in the catalog", "ratings." + id});
    } else if (value < kMinRating || value > kMaxRating) {
      issues.push_back({"rating-out-of-range",
                        "rating " + std::to_string(value) + " for '" + id + "' is outside [1,10]",
                        "ratings." + id});
    }
  }
  for (const auto& c : catalog.criteria())
    if (!j.ratings.contains(c.id))
      issues.push_back({"missing-criterion", "criterion '" + c.id + "' has no rating", "ratings." + c.id});
  if (!issues.empty()) throw Error(std::move(issues));
}

std::size_t trim_count(std::size_t n) {
  if (n < 5) return 0;
  return std::max<std::size_t>(1, n / 10);
}

double trimmed_mean(std::vector<double> values, bool trim) {
  if (values.empty()) return 0.0;
  std::size_t t = trim ? trim_count(values.size()) : 0;
  if (t > 0) std::sort(values.begin(), values.end());
  auto first = values.begin() + static_cast<std::ptrdiff_t>(t);
  auto last = values.end() - static_cast<std::ptrdiff_t>(t);
  return std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
}

double sample_stddev(std::span<const double> values) {
  if (values.size() <= 1) return 0.0;
  double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

AggregatedAssessment aggregate(std::span<const Judgment> judgments, const CriteriaCatalog& catalog,
                               const AggregationConfig& config) {
  AggregatedAssessment out;
  out.contested_threshold = config.contested_threshold;
  out.judge_count = judgments.size();
  if (judgments.empty()) return out;
  out.version = judgments.front().version;
  for (const auto& j : judgments)
    if (j.version != *out.version) fail("mixed-versions", "judgments reference different versions", "version");

  std::array<double, 4> dim_sum{};
  std::array<std::size_t, 4> dim_count{};
  std::vector<double> column;
  column.reserve(judgments.size());
  for (const auto& def : catalog.criteria()) {
    column.clear();
    for (const auto& j : judgments) {
      auto it = j.ratings.find(def.id);
      if (it == j.ratings.end())
        fail("missing-criterion", "judgment " + j.judgment_id + " lacks '" + def.id + "'", "ratings." + def.id);
      column.push_back(static_cast<double>(it->second));
    }
    CriterionAggregate agg;
    agg.criterion_id = def.id;
    agg.dimension = def.dimension;
    agg.n = column.size();
    agg.dispersion = sample_stddev(column);
    agg.aggregate = trimmed_mean(column, config.trim);
    agg.contested = agg.dispersion > config.contested_threshold;
    auto di = static_cast<std::size_t>(def.dimension);
    dim_sum[di] += agg.aggregate;
    ++dim_count[di];
    out.criteria.push_back(std::move(agg));
  }
  for (auto d : kAssessmentDimensions) {
    auto di = static_cast<std::size_t>(d);
    if (dim_count[di] > 0) out.dimension_scores[d] = dim_sum[di] / static_cast<double>(dim_count[di]);
  }
  out.contested = contested_criteria(out);
  return out;
}

std::vector<std::string> contested_criteria(const AggregatedAssessment& a) {
  std::vector<const CriterionAggregate*> hits;
  for (const auto& c : a.criteria)
    if (c.dispersion > a.contested_threshold) hits.push_back(&c);
  std::stable_sort(hits.begin(), hits.end(),
                   [](const auto* x, const auto* y) { return x->dispersion > y->dispersion; });
  std::vector<std::string> ids;
  for (const auto* c : hits) ids.push_back(c->criterion_id);
  return ids;
}

Document to_document(const AggregatedAssessment& a) {
  Document criteria = Document::array();
  for (const auto& c : a.criteria)
    criteria.push_back({{"criterion_id", c.criterion_id},
                        {"dimension", to_string(c.dimension)},
                        {"aggregate", c.aggregate},
                        {"dispersion", c.dispersion},
                        {"n", c.n},
                        {"contested", c.contested}});
  Document dims = Document::object();
  for (const auto& [d, s] : a.dimension_scores) dims[std::string(to_string(d))] = s;
  Document doc = {{"judge_count", a.judge_count},
                  {"criteria", criteria},
                  {"dimension_scores", dims},
                  {"contested", a.contested}};
  if (a.version) {
    doc["venture_id"] = a.version->venture_id;
    doc["version_number"] = a.version->version_number;
  }
  return doc;
}

}  // namespace hidss
