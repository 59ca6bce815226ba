#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hidss/feedback.hpp"
#include "hidss/hybrid.hpp"
#include "hidss/ontology.hpp"

namespace hidss {

struct MentorComment {
  std::string mentor_id;
  std::string text;

  friend bool operator==(const MentorComment&, const MentorComment&) = default;
};

using CommentsByDimension = std::map<Dimension, std::vector<MentorComment>>;

/// Groups judgment comments by value dimension, ordered by mentor id.
CommentsByDimension collect_comments(std::span<const Judgment> judgments);

struct ReportHistory {
  int parent_version = 0;
  std::map<AssessmentDimension, double> score_deltas;
  /// milestone -> field ("p_hybrid", "p_machine", "p_crowd") -> current - parent
  std::map<Milestone, std::map<std::string, double>> probability_deltas;
};

struct Provenance {
  std::string model_set_id;
  std::string generated_at;
};

/// Dashboard payload: informative guidance (scores, aggregates,
/// probabilities) and suggestive guidance (comments, interventions).
struct GuidanceReport {
  VersionRef version;
  std::optional<int> parent_version;

  std::map<AssessmentDimension, double> dimension_scores;
  std::vector<CriterionAggregate> criteria;
  std::vector<std::string> contested;
  std::map<Milestone, MilestonePrediction> predictions;

  CommentsByDimension comments;
  std::map<Milestone, std::vector<Intervention>> interventions;

  std::size_t judge_count = 0;
  Provenance provenance;

  std::optional<ReportHistory> history;

  Document to_document() const;
  /// Reads back the version, scores and predictions (enough to diff against).
  static GuidanceReport from_document(const Document& doc);
};

/// Field-wise `current - parent` for scores and probabilities both reports carry.
ReportHistory compare_reports(const GuidanceReport& current, const GuidanceReport& parent);

/// Throws no-predictions when `predictions` is empty.
GuidanceReport build_report(const BusinessModelVersion& version, const AggregatedAssessment* assessment,
                            const std::map<Milestone, MilestonePrediction>& predictions,
                            const CommentsByDimension& comments,
                            const std::map<Milestone, std::vector<Intervention>>& interventions,
                            const GuidanceReport* parent, Provenance provenance);

}  // namespace hidss
