#pragma once

#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "hidss/cart.hpp"
#include "hidss/feedback.hpp"
#include "hidss/ontology.hpp"

namespace hidss {

/// 21 criterion aggregates in catalog order, then the four assessment
/// dimension means.
inline constexpr std::size_t kCrowdFeatureCount = 25;
inline constexpr std::string_view kCrowdSchemaId = "crowd-aggregates-25";

std::vector<double> crowd_features(const AggregatedAssessment& assessment);

using SlotKey = std::pair<SignalSource, Milestone>;

struct SlotReport {
  SignalSource source = SignalSource::machine;
  Milestone milestone = Milestone::survival;
  bool trained = false;
  bool degenerate = false;
  std::size_t rows = 0;
  std::string reason;  // why the slot is empty
};

/// Up to four trees indexed by (signal source, milestone) plus the
/// combiner settings fixed at training time.
struct ModelSet {
  std::map<SlotKey, TreeModel> slots;
  double hybrid_weight = 0.5;
  std::size_t k_min = 3;
  std::vector<SlotReport> report;

  const TreeModel* find(SignalSource source, Milestone milestone) const;
  bool has_machine_model() const;
  Document to_document() const;
  static ModelSet from_document(const Document& doc);
  /// Content hash of the canonical serialization.
  std::string id() const;
};

using DatasetProvider = std::function<LabeledDataset(SignalSource, Milestone)>;

/// Trains every slot whose dataset has at least one row; slots without data
/// stay empty and are listed in `report`.
ModelSet train_all(const DatasetProvider& datasets, const CartParams& params = {}, double hybrid_weight = 0.5,
                   std::size_t k_min = 3);

enum class Basis { machine_only, crowd_only, hybrid };
std::string_view to_string(Basis b);

struct MilestonePrediction {
  Milestone milestone = Milestone::survival;
  double p_hybrid = 0.5;
  std::optional<double> p_machine;
  std::optional<double> p_crowd;
  Basis basis = Basis::machine_only;
};

Document to_document(const MilestonePrediction& p);

/// Requires the machine model for the milestone (throws no-model).
MilestonePrediction hybrid_predict(const ModelSet& set, const FeatureVector& machine_features,
                                   const AggregatedAssessment* assessment, Milestone milestone);
MilestonePrediction hybrid_predict(const ModelSet& set, const BusinessModelVersion& version,
                                   const PatternCatalog& catalog, const AggregatedAssessment* assessment,
                                   Milestone milestone);

/// Predictions for every milestone with a machine model.
std::map<Milestone, MilestonePrediction> predict_milestones(const ModelSet& set, const BusinessModelVersion& version,
                                                            const PatternCatalog& catalog,
                                                            const AggregatedAssessment* assessment);

struct Intervention {
  std::string element_id;
  std::string current_choice;
  std::string alternative_choice;
  double p_current = 0.0;
  double p_new = 0.0;
  double delta = 0.0;
};

Document to_document(const Intervention& i);

inline constexpr std::size_t kMaxInterventions = 5;

/// Single-element counterfactual sweep of the machine model; positive deltas
/// only, best first, at most five.
std::vector<Intervention> whatif_scan(const ModelSet& set, const BusinessModelVersion& version,
                                      const PatternCatalog& catalog, Milestone milestone);

/// Copy of `version` with one element switched, for applying a suggestion.
BusinessModelVersion apply_intervention(BusinessModelVersion version, const Intervention& change);

}  // namespace hidss
