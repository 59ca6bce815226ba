#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hidss/ontology.hpp"

namespace hidss {

enum class AssessmentDimension { desirability, implementability, scalability, profitability };

inline constexpr std::array<AssessmentDimension, 4> kAssessmentDimensions = {
    AssessmentDimension::desirability, AssessmentDimension::implementability,
    AssessmentDimension::scalability, AssessmentDimension::profitability};

std::string_view to_string(AssessmentDimension d);
std::optional<AssessmentDimension> parse_assessment_dimension(std::string_view s);
/// Dashboard label; implementability is shown as "feasibility".
std::string_view display_label(AssessmentDimension d);

struct CriterionDef {
  std::string id;
  AssessmentDimension dimension = AssessmentDimension::desirability;
  std::string display_name;
};

/// The 21 rating criteria, 6/5/5/5 over the four assessment dimensions.
class CriteriaCatalog {
 public:
  static constexpr std::size_t kCriteriaCount = 21;

  CriteriaCatalog() = default;
  CriteriaCatalog(std::string version, std::vector<CriterionDef> criteria);

  static CriteriaCatalog from_document(const Document& doc);
  static CriteriaCatalog load(const std::filesystem::path& path);
  Document to_document() const;

  const std::string& version() const noexcept { return version_; }
  std::span<const CriterionDef> criteria() const noexcept { return criteria_; }
  std::optional<std::size_t> index_of(std::string_view criterion_id) const;

 private:
  std::string version_;
  std::vector<CriterionDef> criteria_;
};

struct VersionRef {
  std::string venture_id;
  int version_number = 0;

  friend auto operator<=>(const VersionRef&, const VersionRef&) = default;
};

inline constexpr int kMinRating = 1;
inline constexpr int kMaxRating = 10;

struct Judgment {
  std::string judgment_id;
  VersionRef version;
  std::string mentor_id;
  std::map<std::string, int> ratings;
  std::map<Dimension, std::string> comments;
  std::string submitted_at;
  /// Value dimensions for which the mentor was a recommended match.
  std::vector<Dimension> authority;

  friend bool operator==(const Judgment&, const Judgment&) = default;
};

Document to_document(const Judgment& j);
/// Shape parsing only; call `validate_judgment` for range checks.
Judgment judgment_from_document(const Document& doc);
/// Throws with one issue per out-of-range, missing or unknown criterion.
void validate_judgment(const Judgment& j, const CriteriaCatalog& catalog);

struct AggregationConfig {
  bool trim = true;
  double contested_threshold = 2.5;
};

struct CriterionAggregate {
  std::string criterion_id;
  AssessmentDimension dimension = AssessmentDimension::desirability;
  double aggregate = 0.0;
  double dispersion = 0.0;
  std::size_t n = 0;
  bool contested = false;
};

struct AggregatedAssessment {
  std::optional<VersionRef> version;
  std::size_t judge_count = 0;
  /// Catalog order; empty when judge_count == 0.
  std::vector<CriterionAggregate> criteria;
  std::map<AssessmentDimension, double> dimension_scores;
  /// Sorted by dispersion descending, then catalog order.
  std::vector<std::string> contested;
  double contested_threshold = 2.5;
};

/// Trim count used for n ratings: max(1, floor(n/10)) from each end when
/// n >= 5, zero otherwise.
std::size_t trim_count(std::size_t n);
double trimmed_mean(std::vector<double> values, bool trim = true);
/// Sample standard deviation (n-1 denominator); 0 for n <= 1.
double sample_stddev(std::span<const double> values);

AggregatedAssessment aggregate(std::span<const Judgment> judgments, const CriteriaCatalog& catalog,
                               const AggregationConfig& config = {});

std::vector<std::string> contested_criteria(const AggregatedAssessment& a);

Document to_document(const AggregatedAssessment& a);

}  // namespace hidss
