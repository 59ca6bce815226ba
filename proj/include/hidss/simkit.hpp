#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hidss/feedback.hpp"
#include "hidss/hybrid.hpp"
#include "hidss/matching.hpp"
#include "hidss/ontology.hpp"

namespace hidss {

class Repository;

namespace sim {

/// Generative world: outcomes follow logistic(hard_weight*h + soft_weight*s)
/// where h is visible in the business model and s only to the judges.
struct WorldParams {
  std::uint64_t seed = 1;
  std::size_t n_ventures = 200;
  std::size_t n_mentors = 20;
  double hard_weight = 1.0;
  double soft_weight = 1.0;
  double judge_noise = 1.0;
  std::size_t judges_per_venture = 5;
};

void validate(const WorldParams& params);
Document to_document(const WorldParams& params);
WorldParams params_from_document(const Document& doc);

struct SimVenture {
  BusinessModelVersion version;
  std::vector<Judgment> judgments;
  std::map<Milestone, bool> outcomes;
  double hard = 0.0;
  double soft = 0.0;
  double probability = 0.5;
};

struct World {
  WorldParams params;
  std::string catalog_version;
  /// element id -> coefficient per choice (catalog order)
  std::map<std::string, std::vector<double>> coefficients;
  std::vector<MentorProfile> mentors;
  std::vector<SimVenture> ventures;

  Document to_document() const;
  static World from_document(const Document& doc, const PatternCatalog& patterns);
};

inline constexpr double kRatingBaseline = 5.5;
inline constexpr double kRatingSlope = 1.5;

double logistic(double x);

World generate_world(const WorldParams& params, const PatternCatalog& patterns, const CriteriaCatalog& criteria);

/// Appends mentors and ventures [begin, end) to the repository. Outcomes are
/// recorded only when `with_outcomes` is set.
void import_world(Repository& repo, const World& world, std::size_t begin, std::size_t end,
                  bool with_outcomes = true, const std::string& actor = "simkit");

/// Rank AUC (Mann-Whitney, ties count one half). Undefined for single-class labels.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const bool> labels);
double brier_score(std::span<const double> scores, std::span<const bool> labels);

struct SignalMetrics {
  std::optional<double> auc;
  std::optional<double> brier;
  std::size_t n = 0;
};

struct MilestoneMetrics {
  Milestone milestone = Milestone::survival;
  SignalMetrics machine;
  SignalMetrics crowd;
  SignalMetrics hybrid;
  /// Hidden generative probability, the best achievable ranking.
  SignalMetrics truth;
};

struct Evaluation {
  std::vector<MilestoneMetrics> milestones;

  const MilestoneMetrics& at(Milestone m) const;
  Document to_document() const;
  std::string table() const;
  std::string csv() const;
};

/// Scores held-out ventures [begin, end) of the world with the model set.
Evaluation evaluate_guidance(const World& world, const ModelSet& models, const PatternCatalog& patterns,
                             const CriteriaCatalog& criteria, std::size_t begin, std::size_t end,
                             const AggregationConfig& aggregation = {});

struct ExperimentConfig {
  WorldParams world;
  std::size_t n_train = 2000;
  CartParams cart;
  double hybrid_weight = 0.5;
  std::size_t k_min = 3;
  AggregationConfig aggregation;
};

/// Generates a world of n_train + held-out ventures (world.n_ventures is the
/// total), trains through a repository on the first n_train and evaluates
/// the rest.
Evaluation run_experiment(const ExperimentConfig& config, const PatternCatalog& patterns,
                          const CriteriaCatalog& criteria);

}  // namespace sim
}  // namespace hidss
