#include "hidss/guidance.hpp"

#include <algorithm>

namespace hidss {

CommentsByDimension collect_comments(std::span<const Judgment> judgments) {
  CommentsByDimension out;
  for (auto d : kDimensions) out[d];
  for (const auto& j : judgments)
    for (const auto& [d, text] : j.comments)
      if (!text.empty()) out[d].push_back({j.mentor_id, text});
  for (auto& [d, list] : out)
    std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) { return a.mentor_id < b.mentor_id; });
  return out;
}

Document GuidanceReport::to_document() const {
  Document scores = Document::object();
  for (const auto& [d, s] : dimension_scores)
    scores[std::string(to_string(d))] = {{"label", display_label(d)}, {"score", s}};

  Document criteria_doc = Document::array();
  for (const auto& c : criteria)
    criteria_doc.push_back({{"criterion_id", c.criterion_id},
                            {"dimension", to_string(c.dimension)},
                            {"aggregate", c.aggregate},
                            {"dispersion", c.dispersion},
                            {"n", c.n},
                            {"contested", c.contested}});

  Document milestones = Document::object();
  for (const auto& [m, p] : predictions) milestones[std::string(to_string(m))] = hidss::to_document(p);

  Document comments_doc = Document::object();
  for (auto d : kDimensions) comments_doc[std::string(to_string(d))] = Document::array();
  for (const auto& [d, list] : comments)
    for (const auto& c : list)
      comments_doc[std::string(to_string(d))].push_back({{"mentor_id", c.mentor_id}, {"text", c.text}});

  Document interventions_doc = Document::object();
  for (const auto& [m, p] : predictions) interventions_doc[std::string(to_string(m))] = Document::array();
  for (const auto& [m, list] : interventions)
    for (const auto& i : list) interventions_doc[std::string(to_string(m))].push_back(hidss::to_document(i));

  Document history_doc;
  if (history) {
    Document score_deltas = Document::object();
    for (const auto& [d, v] : history->score_deltas) score_deltas[std::string(to_string(d))] = v;
    Document prob_deltas = Document::object();
    for (const auto& [m, fields] : history->probability_deltas) prob_deltas[std::string(to_string(m))] = fields;
    history_doc = {{"parent_version", history->parent_version},
                   {"dimension_score_deltas", score_deltas},
                   {"probability_deltas", prob_deltas}};
  }

  return {{"venture_id", version.venture_id},
          {"version_number", version.version_number},
          {"parent_version", parent_version ? Document(*parent_version) : Document()},
          {"informative",
           {{"dimension_scores", scores},
            {"criteria", criteria_doc},
            {"contested", contested},
            {"milestones", milestones}}},
          {"suggestive", {{"comments", comments_doc}, {"interventions", interventions_doc}}},
          {"provenance",
           {{"judge_count", judge_count},
            {"model_set_id", provenance.model_set_id},
            {"generated_at", provenance.generated_at}}},
          {"history", history_doc}};
}

GuidanceReport GuidanceReport::from_document(const Document& doc) {
  GuidanceReport r;
  r.version.venture_id = require_string(doc, "venture_id");
  r.version.version_number = static_cast<int>(require_int(doc, "version_number"));
  if (auto it = doc.find("parent_version"); it != doc.end() && it->is_number_integer()) r.parent_version = it->get<int>();
  const auto& informative = require(doc, "informative");
  for (const auto& [key, entry] : require(informative, "dimension_scores").items())
    if (auto d = parse_assessment_dimension(key)) r.dimension_scores[*d] = require_number(entry, "score");
  for (const auto& [key, entry] : require(informative, "milestones").items()) {
    auto m = parse_milestone(key);
    if (!m) continue;
    MilestonePrediction p;
    p.milestone = *m;
    p.p_hybrid = require_number(entry, "p_hybrid");
    if (entry.contains("p_machine") && entry.at("p_machine").is_number()) p.p_machine = entry.at("p_machine").get<double>();
    if (entry.contains("p_crowd") && entry.at("p_crowd").is_number()) p.p_crowd = entry.at("p_crowd").get<double>();
    auto basis = require_string(entry, "basis");
    p.basis = basis == "hybrid" ? Basis::hybrid : basis == "crowd-only" ? Basis::crowd_only : Basis::machine_only;
    r.predictions.emplace(*m, p);
  }
  r.judge_count = static_cast<std::size_t>(require_int(require(doc, "provenance"), "judge_count"));
  return r;
}

ReportHistory compare_reports(const GuidanceReport& current, const GuidanceReport& parent) {
  ReportHistory h;
  h.parent_version = parent.version.version_number;
  for (const auto& [d, s] : current.dimension_scores)
    if (auto it = parent.dimension_scores.find(d); it != parent.dimension_scores.end())
      h.score_deltas[d] = s - it->second;
  for (const auto& [m, p] : current.predictions) {
    auto it = parent.predictions.find(m);
    if (it == parent.predictions.end()) continue;
    auto& fields = h.probability_deltas[m];
    fields["p_hybrid"] = p.p_hybrid - it->second.p_hybrid;
    if (p.p_machine && it->second.p_machine) fields["p_machine"] = *p.p_machine - *it->second.p_machine;
    if (p.p_crowd && it->second.p_crowd) fields["p_crowd"] = *p.p_crowd - *it->second.p_crowd;
  }
  return h;
}

GuidanceReport build_report(const BusinessModelVersion& version, const AggregatedAssessment* assessment,
                            const std::map<Milestone, MilestonePrediction>& predictions,
                            const CommentsByDimension& comments,
                            const std::map<Milestone, std::vector<Intervention>>& interventions,
                            const GuidanceReport* parent, Provenance provenance) {
  if (predictions.empty()) fail("no-predictions", "a report needs a prediction for at least one milestone");
  GuidanceReport r;
  r.version = {version.venture_id, version.version_number};
  r.parent_version = version.parent_version;
  if (assessment && assessment->judge_count > 0) {
    if (assessment->version && *assessment->version != r.version)
      fail("mixed-versions", "assessment belongs to another version", "assessment");
    r.dimension_scores = assessment->dimension_scores;
    r.criteria = assessment->criteria;
    r.contested = assessment->contested;
    r.judge_count = assessment->judge_count;
  }
  r.predictions = predictions;
  r.comments = comments;
  for (auto d : kDimensions) r.comments[d];
  for (const auto& [m, list] : interventions)
    if (predictions.contains(m)) r.interventions[m] = list;
  r.provenance = std::move(provenance);
  if (version.parent_version) {
    if (parent) {
      if (parent->version.venture_id != version.venture_id)
        fail("different-ventures", "parent report belongs to another venture", "parent");
      r.history = compare_reports(r, *parent);
    } else {
      r.history = ReportHistory{*version.parent_version, {}, {}};
    }
  }
  return r;
}

}  // namespace hidss
