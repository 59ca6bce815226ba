#include "hidss/hybrid.hpp"

#include <algorithm>

namespace hidss {

std::vector<double> crowd_features(const AggregatedAssessment& a) {
  if (a.judge_count == 0) fail("no-judgments", "crowd features need at least one judgment");
  std::vector<double> f;
  f.reserve(kCrowdFeatureCount);
  for (const auto& c : a.criteria) f.push_back(c.aggregate);
  for (auto d : kAssessmentDimensions) {
    auto it = a.dimension_scores.find(d);
    f.push_back(it == a.dimension_scores.end() ? 0.0 : it->second);
  }
  return f;
}

const TreeModel* ModelSet::find(SignalSource source, Milestone milestone) const {
  auto it = slots.find({source, milestone});
  return it == slots.end() ? nullptr : &it->second;
}

bool ModelSet::has_machine_model() const {
  return std::any_of(kMilestones.begin(), kMilestones.end(),
                     [&](Milestone m) { return find(SignalSource::machine, m) != nullptr; });
}

Document ModelSet::to_document() const {
  Document slot_docs = Document::object();
  for (const auto& [key, model] : slots)
    slot_docs[std::string(to_string(key.first)) + "/" + std::string(to_string(key.second))] = model.to_document();
  Document report_docs = Document::array();
  for (const auto& r : report)
    report_docs.push_back({{"signal_source", to_string(r.source)},
                           {"milestone", to_string(r.milestone)},
                           {"trained", r.trained},
                           {"degenerate", r.degenerate},
                           {"rows", r.rows},
                           {"reason", r.reason}});
  return {{"hybrid_weight", hybrid_weight}, {"k_min", k_min}, {"slots", slot_docs}, {"report", report_docs}};
}

ModelSet ModelSet::from_document(const Document& doc) {
  ModelSet set;
  set.hybrid_weight = require_number(doc, "hybrid_weight");
  set.k_min = static_cast<std::size_t>(require_int(doc, "k_min"));
  for (const auto& [key, model_doc] : require(doc, "slots").items()) {
    auto model = TreeModel::from_document(model_doc);
    set.slots.emplace(SlotKey{model.source(), model.milestone()}, std::move(model));
  }
  if (doc.contains("report")) {
    for (const auto& r : doc.at("report")) {
      SlotReport rep;
      rep.source = parse_signal_source(require_string(r, "signal_source")).value_or(SignalSource::machine);
      rep.milestone = parse_milestone(require_string(r, "milestone")).value_or(Milestone::survival);
      rep.trained = require_bool(r, "trained");
      rep.degenerate = require_bool(r, "degenerate");
      rep.rows = static_cast<std::size_t>(require_int(r, "rows"));
      rep.reason = optional_string(r, "reason");
      set.report.push_back(std::move(rep));
    }
  }
  return set;
}

std::string ModelSet::id() const { return content_hash(canonical(to_document())); }

ModelSet train_all(const DatasetProvider& datasets, const CartParams& params, double hybrid_weight,
                   std::size_t k_min) {
  if (!(hybrid_weight >= 0.0 && hybrid_weight <= 1.0)) fail("invalid-config", "hybrid weight must lie in [0,1]");
  ModelSet set;
  set.hybrid_weight = hybrid_weight;
  set.k_min = k_min;
  for (auto source : {SignalSource::machine, SignalSource::crowd}) {
    for (auto milestone : kMilestones) {
      SlotReport rep{source, milestone, false, false, 0, {}};
      auto data = datasets(source, milestone);
      rep.rows = data.rows.size();
      if (data.rows.empty()) {
        rep.reason = source == SignalSource::crowd ? "no labeled versions with enough judgments"
                                                   : "no labeled versions";
      } else {
        auto model = train_cart(data, params);
        rep.trained = true;
        rep.degenerate = model.degenerate();
        if (rep.degenerate) rep.reason = "single-class outcomes";
        set.slots.emplace(SlotKey{source, milestone}, std::move(model));
      }
      set.report.push_back(std::move(rep));
    }
  }
  return set;
}

std::string_view to_string(Basis b) {
  switch (b) {
    case Basis::machine_only: return "machine-only";
    case Basis::crowd_only: return "crowd-only";
    case Basis::hybrid: return "hybrid";
  }
  return "machine-only";
}

Document to_document(const MilestonePrediction& p) {
  Document doc = {{"p_hybrid", p.p_hybrid}, {"basis", to_string(p.basis)}};
  doc["p_machine"] = p.p_machine ? Document(*p.p_machine) : Document();
  doc["p_crowd"] = p.p_crowd ? Document(*p.p_crowd) : Document();
  return doc;
}

MilestonePrediction hybrid_predict(const ModelSet& set, const FeatureVector& machine_features,
                                   const AggregatedAssessment* assessment, Milestone milestone) {
  const TreeModel* machine = set.find(SignalSource::machine, milestone);
  if (!machine)
    fail("no-model", "no trained machine model for milestone " + std::string(to_string(milestone)), "milestone");
  if (machine->schema_id() != machine_features.schema_id)
    fail("schema-mismatch", "model was trained on schema '" + machine->schema_id() + "'", "schema_id");

  MilestonePrediction out;
  out.milestone = milestone;
  out.p_machine = machine->predict(machine_features.values);

  const TreeModel* crowd = set.find(SignalSource::crowd, milestone);
  if (crowd && assessment && assessment->judge_count >= set.k_min && assessment->judge_count > 0)
    out.p_crowd = crowd->predict(crowd_features(*assessment));

  if (out.p_crowd) {
    out.p_hybrid = set.hybrid_weight * *out.p_machine + (1.0 - set.hybrid_weight) * *out.p_crowd;
    out.basis = Basis::hybrid;
  } else {
    out.p_hybrid = *out.p_machine;
    out.basis = Basis::machine_only;
  }
  return out;
}

MilestonePrediction hybrid_predict(const ModelSet& set, const BusinessModelVersion& version,
                                   const PatternCatalog& catalog, const AggregatedAssessment* assessment,
                                   Milestone milestone) {
  return hybrid_predict(set, encode(version, catalog), assessment, milestone);
}

std::map<Milestone, MilestonePrediction> predict_milestones(const ModelSet& set, const BusinessModelVersion& version,
                                                            const PatternCatalog& catalog,
                                                            const AggregatedAssessment* assessment) {
  std::map<Milestone, MilestonePrediction> out;
  auto features = encode(version, catalog);
  for (auto m : kMilestones)
    if (set.find(SignalSource::machine, m)) out.emplace(m, hybrid_predict(set, features, assessment, m));
  return out;
}

Document to_document(const Intervention& i) {
  return {{"element_id", i.element_id},   {"current_choice", i.current_choice},
          {"alternative_choice", i.alternative_choice}, {"p_current", i.p_current},
          {"p_new", i.p_new},             {"delta", i.delta}};
}

std::vector<Intervention> whatif_scan(const ModelSet& set, const BusinessModelVersion& version,
                                      const PatternCatalog& catalog, Milestone milestone) {
  const TreeModel* machine = set.find(SignalSource::machine, milestone);
  if (!machine) return {};
  const auto base = encode(version, catalog);
  const double p_current = machine->predict(base.values);

  std::vector<Intervention> found;
  std::size_t offset = 0;
  auto probe = base.values;
  for (const auto& def : catalog.elements()) {
    const auto& current = version.choices.at(def.id);
    const std::size_t current_idx = *def.choice_index(current);
    for (std::size_t c = 0; c < def.choices.size(); ++c) {
      if (c == current_idx) continue;
      probe[offset + current_idx] = 0.0;
      probe[offset + c] = 1.0;
      double p_new = machine->predict(probe);
      probe[offset + c] = 0.0;
      probe[offset + current_idx] = 1.0;
      double delta = p_new - p_current;
      if (delta > 0.0) found.push_back({def.id, current, def.choices[c], p_current, p_new, delta});
    }
    offset += def.choices.size();
  }
  // Catalog order is the discovery order, so a stable sort keeps it as the tie-break.
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.delta > b.delta; });
  if (found.size() > kMaxInterventions) found.resize(kMaxInterventions);
  return found;
}

BusinessModelVersion apply_intervention(BusinessModelVersion version, const Intervention& change) {
  version.choices[change.element_id] = change.alternative_choice;
  return version;
}

}  // namespace hidss
