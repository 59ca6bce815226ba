#include "hidss/service.hpp"

#include <fstream>

namespace hidss {

namespace {

std::unique_ptr<EventStore> default_store(const ServiceConfig& config) {
  if (config.storage.empty()) return std::make_unique<MemoryEventStore>();
  return std::make_unique<FileEventStore>(config.storage, config.fsync);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail("io", "cannot write " + tmp.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

Document RetrainSummary::to_document() const {
  Document slot_docs = Document::array();
  for (const auto& r : slots)
    slot_docs.push_back({{"signal_source", to_string(r.source)},
                         {"milestone", to_string(r.milestone)},
                         {"trained", r.trained},
                         {"degenerate", r.degenerate},
                         {"rows", r.rows},
                         {"reason", r.reason}});
  return {{"slots", slot_docs}, {"swapped", swapped}, {"model_set_id", model_set_id}};
}

Service::Service(ServiceConfig config, Clock clock) : Service(config, default_store(config), std::move(clock)) {}

Service::Service(ServiceConfig config, std::unique_ptr<EventStore> store, Clock clock)
    : config_(std::move(config)), clock_(std::move(clock)) {
  config_.validate();
  repo_ = std::make_unique<Repository>(PatternCatalog::load(config_.pattern_catalog),
                                       CriteriaCatalog::load(config_.criteria_catalog), std::move(store), clock_);
  if (!config_.model_path.empty() && std::filesystem::exists(config_.model_path)) {
    std::ifstream in(config_.model_path);
    models_ = std::make_shared<const ModelSet>(ModelSet::from_document(Document::parse(in)));
  }
}

std::shared_ptr<const ModelSet> Service::models() const {
  std::lock_guard lock(models_mutex_);
  return models_;
}

void Service::install_models(ModelSet models) {
  auto next = std::make_shared<const ModelSet>(std::move(models));
  if (!config_.model_path.empty()) write_file(config_.model_path, canonical(next->to_document()) + "\n");
  std::lock_guard lock(models_mutex_);
  models_ = std::move(next);
}

Document Service::register_venture(const Document& body, const std::string& actor) {
  auto seq = repo_->append(EventKind::venture_registered, body, actor);
  auto id = require_string(body, "venture_id");
  return {{"venture_id", id}, {"sequence", seq}};
}

BusinessModelVersion Service::create_version(const std::string& venture_id, const Document& body,
                                             const std::string& actor) {
  auto draft = parse_draft(body);
  if (!draft.venture_id.empty() && draft.venture_id != venture_id)
    fail("different-ventures", "body venture_id does not match the path", "venture_id");
  draft.venture_id = venture_id;
  auto snap = repo_->snapshot(venture_id);
  auto v = new_version(draft, snap.latest(), repo_->patterns(), clock_());
  // The repository re-checks linearity under its write lock, so a racing
  // revision still fails with stale-base.
  repo_->append(EventKind::version_created, to_document(v), actor);
  return v;
}

BusinessModelVersion Service::version(const std::string& venture_id, int number) const {
  auto snap = repo_->snapshot(venture_id);
  const auto* v = snap.version(number);
  if (!v) fail("unknown-version", "version " + std::to_string(number) + " does not exist", "version_number");
  return *v;
}

MatchAssignment Service::matches(const std::string& venture_id, std::size_t k) const {
  auto snap = repo_->snapshot(venture_id);
  if (!snap.latest()) fail("unknown-version", "venture has no business model yet", "venture_id");
  auto pool = repo_->mentors();
  return recommend(*snap.latest(), pool, k, config_.matching);
}

Judgment Service::submit_judgment(const std::string& venture_id, int number, const Document& body,
                                  const std::string& actor) {
  Document payload = body;
  payload["venture_id"] = venture_id;
  payload["version_number"] = number;
  auto j = judgment_from_document(payload);
  validate_judgment(j, repo_->criteria());
  auto snap = repo_->snapshot(venture_id);
  const auto* v = snap.version(number);
  if (!v) fail("unknown-version", "version " + std::to_string(number) + " does not exist", "version_number");
  j.authority.clear();
  auto pool = repo_->mentors();
  if (!pool.empty()) {
    auto assignment = recommend(*v, pool, config_.match_k, config_.matching);
    for (const auto& [d, entries] : assignment)
      for (const auto& e : entries)
        if (e.mentor_id == j.mentor_id && !e.low_confidence) j.authority.push_back(d);
  }
  if (j.judgment_id.empty()) j.judgment_id = venture_id + ":" + std::to_string(number) + ":" + j.mentor_id;
  if (j.submitted_at.empty()) j.submitted_at = clock_();
  repo_->append(EventKind::judgment_submitted, to_document(j), actor);
  return j;
}

OutcomeRecord Service::record_outcome(const std::string& venture_id, const Document& body, const std::string& actor) {
  Document payload = body;
  payload["venture_id"] = venture_id;
  repo_->append(EventKind::outcome_recorded, payload, actor);
  auto milestone = parse_milestone(require_string(body, "milestone"));
  auto record = repo_->snapshot(venture_id).outcomes.at(*milestone);
  if (config_.retrain_policy == RetrainPolicy::on_outcome) retrain();
  return record;
}

MentorProfile Service::register_mentor(const Document& body, const std::string& actor) {
  auto m = mentor_from_document(body);
  repo_->append(EventKind::mentor_registered, to_document(m), actor);
  return m;
}

std::vector<MentorProfile> Service::mentors() const { return repo_->mentors(); }

PatternStats Service::pattern_stats(Milestone milestone) const { return repo_->pattern_stats(milestone); }

RetrainSummary Service::retrain() {
  std::lock_guard lock(retrain_mutex_);
  auto next = train_all(
      [&](SignalSource s, Milestone m) { return repo_->training_dataset(s, m, config_.k_min, config_.aggregation); },
      config_.cart, config_.hybrid_weight, config_.k_min);
  RetrainSummary summary;
  summary.slots = next.report;
  if (!next.slots.empty()) {
    install_models(std::move(next));
    summary.swapped = true;
  }
  if (auto active = models()) summary.model_set_id = active->id();
  return summary;
}

AggregatedAssessment Service::assess(const VentureSnapshot& venture, int number) const {
  auto judgments = venture.judgments_for(number);
  return aggregate(judgments, repo_->criteria(), config_.aggregation);
}

GuidanceReport Service::assemble(const VentureSnapshot& venture, const BusinessModelVersion& version,
                                 const ModelSet& models, const GuidanceReport* parent) const {
  const auto& patterns = repo_->patterns();
  auto assessment = assess(venture, version.version_number);
  const AggregatedAssessment* a = assessment.judge_count > 0 ? &assessment : nullptr;
  auto predictions = predict_milestones(models, version, patterns, a);
  std::map<Milestone, std::vector<Intervention>> whatif;
  for (const auto& [m, p] : predictions) whatif[m] = whatif_scan(models, version, patterns, m);
  auto judgments = venture.judgments_for(version.version_number);
  return build_report(version, a, predictions, collect_comments(judgments), whatif, parent,
                      Provenance{models.id(), clock_()});
}

GuidanceReport Service::process_validation_round(const std::string& venture_id, std::optional<int> number,
                                                 const std::string& actor) {
  auto venture = repo_->snapshot(venture_id);
  const BusinessModelVersion* version = number ? venture.version(*number) : venture.latest();
  if (!version) fail("unknown-version", "venture has no such business model version", "version_number");

  auto models = this->models();
  if (!models || !models->has_machine_model())
    fail("cold-start", "no trained machine model yet; seed labeled ventures and run `hidss train` (or POST /admin/retrain)");

  std::optional<GuidanceReport> parent;
  if (version->parent_version) {
    if (const auto* archived = venture.latest_guidance(*version->parent_version)) {
      parent = GuidanceReport::from_document(archived->report);
    } else {
      parent = assemble(venture, *venture.version(*version->parent_version), *models, nullptr);
    }
  }
  auto report = assemble(venture, *version, *models, parent ? &*parent : nullptr);
  repo_->append(EventKind::guidance_issued,
                {{"venture_id", venture_id}, {"version_number", version->version_number}, {"report", report.to_document()}},
                actor);
  return report;
}

std::size_t Service::seed_mentors(const std::filesystem::path& table, const std::string& actor) {
  std::ifstream in(table);
  if (!in) fail("io", "cannot open mentor table " + table.string(), "mentors");
  auto mentors = parse_mentor_table(in);
  for (const auto& m : mentors) repo_->append(EventKind::mentor_registered, to_document(m), actor);
  return mentors.size();
}

void Service::seed_world(const sim::World& world, const std::string& actor) {
  sim::import_world(*repo_, world, 0, world.ventures.size(), true, actor);
}

Document Service::export_document() const {
  Document events = Document::array();
  for (const auto& e : repo_->events()) events.push_back(to_document(e));
  return {{"format", "hidss-export/1"}, {"events", events}, {"state", repo_->state_document()}};
}

std::size_t Service::import_document(const Document& doc) {
  if (optional_string(doc, "format") != "hidss-export/1") fail("bad-request", "not an export document", "format");
  const bool was_empty = repo_->last_sequence() == 0;
  std::size_t n = 0;
  for (const auto& e : require(doc, "events")) {
    repo_->append(event_from_document(e));
    ++n;
  }
  if (was_empty && doc.contains("state") && canonical(repo_->state_document()) != canonical(doc.at("state")))
    fail("import-mismatch", "replayed state differs from the exported state", "state");
  return n;
}

}  // namespace hidss
