#include "hidss/repository.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unistd.h>

namespace hidss {

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {"VentureRegistered", "VersionCreated",
                                                        "JudgmentSubmitted", "GuidanceIssued",
                                                        "OutcomeRecorded",   "MentorRegistered"};

}  // namespace

std::string_view to_string(EventKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == s) return static_cast<EventKind>(i);
  return std::nullopt;
}

Document to_document(const Event& e) {
  return {{"sequence", e.sequence},
          {"kind", to_string(e.kind)},
          {"payload", e.payload},
          {"recorded_at", e.recorded_at},
          {"actor", e.actor}};
}

Event event_from_document(const Document& doc) {
  Event e;
  e.sequence = static_cast<std::uint64_t>(require_int(doc, "sequence"));
  auto kind = parse_event_kind(require_string(doc, "kind"));
  if (!kind) fail("bad-event", "unknown event kind", "kind");
  e.kind = *kind;
  e.payload = require(doc, "payload");
  e.recorded_at = optional_string(doc, "recorded_at");
  e.actor = optional_string(doc, "actor");
  return e;
}

FileEventStore::FileEventStore(std::filesystem::path path, bool fsync_on_append)
    : path_(std::move(path)), fsync_(fsync_on_append) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void FileEventStore::append(const Event& event) {
  std::string line = canonical(to_document(event));
  line.push_back('\n');
  std::FILE* f = std::fopen(path_.c_str(), "ab");
  if (!f) fail("io", "cannot open event log " + path_.string());
  bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size() && std::fflush(f) == 0;
  if (ok && fsync_) ok = ::fsync(fileno(f)) == 0;
  std::fclose(f);
  if (!ok) fail("io", "failed to append to event log " + path_.string());
}

std::vector<Event> FileEventStore::load() const {
  std::vector<Event> events;
  std::ifstream in(path_);
  if (!in) return events;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    events.push_back(event_from_document(Document::parse(line)));
  }
  return events;
}

Document to_document(const OutcomeRecord& o) {
  Document doc = {{"venture_id", o.venture_id},
                  {"version_number", o.version_number},
                  {"milestone", to_string(o.milestone)},
                  {"achieved", o.achieved},
                  {"observed_at", o.observed_at},
                  {"horizon_months", nullptr}};
  if (o.horizon_months) doc["horizon_months"] = *o.horizon_months;
  return doc;
}

const BusinessModelVersion* VentureSnapshot::latest() const { return versions.empty() ? nullptr : &versions.back(); }

const BusinessModelVersion* VentureSnapshot::version(int number) const {
  if (number < 1 || static_cast<std::size_t>(number) > versions.size()) return nullptr;
  return &versions[static_cast<std::size_t>(number - 1)];
}

std::vector<Judgment> VentureSnapshot::judgments_for(int number) const {
  std::vector<Judgment> out;
  if (auto it = judgments.find(number); it != judgments.end())
    for (const auto& [mentor, j] : it->second) out.push_back(j);
  return out;
}

std::size_t VentureSnapshot::judgment_count() const {
  std::size_t n = 0;
  for (const auto& [v, by_mentor] : judgments) n += by_mentor.size();
  return n;
}

const GuidanceEntry* VentureSnapshot::latest_guidance(int number) const {
  for (auto it = guidance.rbegin(); it != guidance.rend(); ++it)
    if (it->version_number == number) return &*it;
  return nullptr;
}

Document VentureSnapshot::to_document() const {
  Document versions_doc = Document::array();
  for (const auto& v : versions) versions_doc.push_back(hidss::to_document(v));
  Document judgments_doc = Document::array();
  for (const auto& [number, by_mentor] : judgments) {
    Document list = Document::array();
    for (const auto& [mentor, j] : by_mentor) list.push_back(hidss::to_document(j));
    judgments_doc.push_back({{"version_number", number}, {"judgments", list}});
  }
  Document outcomes_doc = Document::object();
  for (const auto& [m, o] : outcomes) outcomes_doc[std::string(to_string(m))] = hidss::to_document(o);
  Document guidance_doc = Document::array();
  for (const auto& g : guidance)
    guidance_doc.push_back({{"sequence", g.sequence},
                            {"version_number", g.version_number},
                            {"recorded_at", g.recorded_at},
                            {"report", g.report}});
  return {{"venture_id", venture_id}, {"name", name},         {"registered_at", registered_at},
          {"versions", versions_doc}, {"judgments", judgments_doc}, {"outcomes", outcomes_doc},
          {"guidance", guidance_doc}};
}

Document to_document(const PatternStats& stats) {
  Document list = Document::array();
  for (const auto& [key, s] : stats)
    list.push_back({{"element_id", key.first},
                    {"choice_id", key.second},
                    {"n", s.n},
                    {"successes", s.successes},
                    {"rate", s.rate ? Document(*s.rate) : Document()}});
  return list;
}

Repository::Repository(PatternCatalog patterns, CriteriaCatalog criteria, std::unique_ptr<EventStore> store,
                       Clock clock)
    : patterns_(std::move(patterns)), criteria_(std::move(criteria)), store_(std::move(store)), clock_(std::move(clock)) {
  for (const auto& e : store_->load()) {
    if (e.sequence != state_.last_sequence + 1)
      fail("corrupt-log", "event log is not contiguous at sequence " + std::to_string(e.sequence));
    commit(e, false);
  }
}

Document Repository::validate(EventKind kind, const Document& payload, const State& state,
                              const std::string& recorded_at) const {
  auto venture_of = [&](const std::string& id) -> const VentureSnapshot& {
    auto it = state.ventures.find(id);
    if (it == state.ventures.end()) fail("unknown-venture", "venture '" + id + "' is not registered", "venture_id");
    return it->second;
  };

  switch (kind) {
    case EventKind::venture_registered: {
      auto id = require_string(payload, "venture_id");
      if (id.empty()) fail("bad-request", "venture_id is empty", "venture_id");
      if (state.ventures.contains(id)) fail("duplicate-venture", "venture '" + id + "' already exists", "venture_id");
      return {{"venture_id", id}, {"name", optional_string(payload, "name")}};
    }
    case EventKind::version_created: {
      auto v = validate_model(payload, patterns_);
      const auto& venture = venture_of(v.venture_id);
      const auto* latest = venture.latest();
      int expected = latest ? latest->version_number + 1 : 1;
      std::optional<int> expected_parent;
      if (latest) expected_parent = latest->version_number;
      if (v.version_number != expected || v.parent_version != expected_parent)
        fail("stale-base", "version " + std::to_string(v.version_number) + " does not extend the latest version",
             "version_number");
      return to_document(v);
    }
    case EventKind::judgment_submitted: {
      auto j = judgment_from_document(payload);
      validate_judgment(j, criteria_);
      auto it = state.ventures.find(j.version.venture_id);
      if (it == state.ventures.end() || !it->second.version(j.version.version_number))
        fail("unknown-version",
             "version " + j.version.venture_id + "/" + std::to_string(j.version.version_number) + " does not exist",
             "version_number");
      if (j.judgment_id.empty())
        j.judgment_id = j.version.venture_id + ":" + std::to_string(j.version.version_number) + ":" + j.mentor_id;
      if (j.submitted_at.empty()) j.submitted_at = recorded_at;
      return to_document(j);
    }
    case EventKind::guidance_issued: {
      const auto& venture = venture_of(require_string(payload, "venture_id"));
      int number = static_cast<int>(require_int(payload, "version_number"));
      if (!venture.version(number)) fail("unknown-version", "guidance references a missing version", "version_number");
      const auto& report = require(payload, "report");
      if (!report.is_object()) fail("bad-request", "report must be an object", "report");
      return {{"venture_id", venture.venture_id}, {"version_number", number}, {"report", report}};
    }
    case EventKind::outcome_recorded: {
      OutcomeRecord o;
      o.venture_id = require_string(payload, "venture_id");
      const auto& venture = venture_of(o.venture_id);
      auto milestone = parse_milestone(require_string(payload, "milestone"));
      if (!milestone) fail("unknown-milestone", "milestone must be survival or series_a", "milestone");
      o.milestone = *milestone;
      o.achieved = require_bool(payload, "achieved");
      const auto* latest = venture.latest();
      if (!latest) fail("unknown-version", "venture has no business model version to label", "venture_id");
      o.version_number = latest->version_number;
      if (auto it = payload.find("version_number"); it != payload.end() && !it->is_null()) {
        if (!it->is_number_integer() || it->get<int>() != latest->version_number)
          fail("stale-base", "outcomes label the latest version", "version_number");
      }
      if (venture.outcomes.contains(o.milestone))
        fail("duplicate-outcome",
             "outcome for " + std::string(to_string(o.milestone)) + " already recorded for '" + o.venture_id + "'",
             "milestone");
      o.observed_at = optional_string(payload, "observed_at", recorded_at);
      if (auto it = payload.find("horizon_months"); it != payload.end() && !it->is_null()) {
        if (!it->is_number_integer() || it->get<int>() < 0)
          fail("bad-request", "horizon_months must be a non-negative integer", "horizon_months");
        o.horizon_months = it->get<int>();
      }
      return to_document(o);
    }
    case EventKind::mentor_registered:
      return to_document(mentor_from_document(payload));
  }
  fail("bad-event", "unhandled event kind");
}

void Repository::apply(State& state, const Event& e, const PatternCatalog& patterns) {
  const auto& p = e.payload;
  switch (e.kind) {
    case EventKind::venture_registered: {
      VentureSnapshot v;
      v.venture_id = p.at("venture_id").get<std::string>();
      v.name = p.at("name").get<std::string>();
      v.registered_at = e.recorded_at;
      state.ventures.emplace(v.venture_id, std::move(v));
      break;
    }
    case EventKind::version_created: {
      auto version = validate_model(p, patterns);
      state.ventures.at(version.venture_id).versions.push_back(std::move(version));
      break;
    }
    case EventKind::judgment_submitted: {
      auto j = judgment_from_document(p);
      state.ventures.at(j.version.venture_id).judgments[j.version.version_number][j.mentor_id] = std::move(j);
      break;
    }
    case EventKind::guidance_issued: {
      auto& v = state.ventures.at(p.at("venture_id").get<std::string>());
      v.guidance.push_back({e.sequence, p.at("version_number").get<int>(), e.recorded_at, p.at("report")});
      break;
    }
    case EventKind::outcome_recorded: {
      OutcomeRecord o;
      o.venture_id = p.at("venture_id").get<std::string>();
      o.version_number = p.at("version_number").get<int>();
      o.milestone = *parse_milestone(p.at("milestone").get<std::string>());
      o.achieved = p.at("achieved").get<bool>();
      o.observed_at = p.at("observed_at").get<std::string>();
      if (!p.at("horizon_months").is_null()) o.horizon_months = p.at("horizon_months").get<int>();
      state.ventures.at(o.venture_id).outcomes[o.milestone] = std::move(o);
      break;
    }
    case EventKind::mentor_registered: {
      auto m = mentor_from_document(p);
      state.mentors[m.mentor_id] = std::move(m);
      break;
    }
  }
  state.last_sequence = e.sequence;
}

std::uint64_t Repository::commit(Event event, bool persist) {
  event.payload = validate(event.kind, event.payload, state_, event.recorded_at);
  event.sequence = state_.last_sequence + 1;
  if (persist) store_->append(event);
  apply(state_, event, patterns_);
  return event.sequence;
}

std::uint64_t Repository::append(EventKind kind, Document payload, std::string actor) {
  std::unique_lock lock(mutex_);
  Event e;
  e.kind = kind;
  e.payload = std::move(payload);
  e.recorded_at = clock_();
  e.actor = std::move(actor);
  return commit(std::move(e), true);
}

std::uint64_t Repository::append(const Event& event) {
  std::unique_lock lock(mutex_);
  return commit(event, true);
}

VentureSnapshot Repository::snapshot(const std::string& venture_id) const {
  std::shared_lock lock(mutex_);
  auto it = state_.ventures.find(venture_id);
  if (it == state_.ventures.end())
    fail("unknown-venture", "venture '" + venture_id + "' is not registered", "venture_id");
  return it->second;
}

bool Repository::has_venture(const std::string& venture_id) const {
  std::shared_lock lock(mutex_);
  return state_.ventures.contains(venture_id);
}

std::vector<std::string> Repository::venture_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, v] : state_.ventures) ids.push_back(id);
  return ids;
}

std::vector<MentorProfile> Repository::mentors() const {
  std::shared_lock lock(mutex_);
  std::vector<MentorProfile> out;
  for (const auto& [id, m] : state_.mentors) out.push_back(m);
  return out;
}

std::vector<Event> Repository::events() const {
  std::shared_lock lock(mutex_);
  return store_->load();
}

std::uint64_t Repository::last_sequence() const {
  std::shared_lock lock(mutex_);
  return state_.last_sequence;
}

Document Repository::state_document() const {
  std::shared_lock lock(mutex_);
  Document ventures = Document::object();
  for (const auto& [id, v] : state_.ventures) ventures[id] = v.to_document();
  Document mentors = Document::array();
  for (const auto& [id, m] : state_.mentors) mentors.push_back(to_document(m));
  return {{"last_sequence", state_.last_sequence}, {"ventures", ventures}, {"mentors", mentors}};
}

PatternStats Repository::pattern_stats(Milestone milestone) const {
  std::shared_lock lock(mutex_);
  PatternStats stats;
  for (const auto& [id, venture] : state_.ventures) {
    auto it = venture.outcomes.find(milestone);
    if (it == venture.outcomes.end()) continue;
    const auto* version = venture.version(it->second.version_number);
    for (const auto& [element, choice] : version->choices) {
      auto& s = stats[{element, choice}];
      ++s.n;
      if (it->second.achieved) ++s.successes;
    }
  }
  for (auto& [key, s] : stats)
    if (s.n > 0) s.rate = static_cast<double>(s.successes) / static_cast<double>(s.n);
  return stats;
}

LabeledDataset Repository::training_dataset(SignalSource source, Milestone milestone, std::size_t k_min,
                                            const AggregationConfig& aggregation) const {
  std::shared_lock lock(mutex_);
  LabeledDataset data;
  data.milestone = milestone;
  data.source = source;
  data.schema_id = source == SignalSource::machine ? patterns_.version() : std::string(kCrowdSchemaId);
  for (const auto& [id, venture] : state_.ventures) {
    auto it = venture.outcomes.find(milestone);
    if (it == venture.outcomes.end()) continue;
    const auto& outcome = it->second;
    if (source == SignalSource::machine) {
      data.rows.push_back({encode(*venture.version(outcome.version_number), patterns_).values, outcome.achieved});
      continue;
    }
    auto judgments = venture.judgments_for(outcome.version_number);
    if (judgments.empty() || judgments.size() < k_min) continue;
    auto assessment = aggregate(judgments, criteria_, aggregation);
    data.rows.push_back({crowd_features(assessment), outcome.achieved});
  }
  return data;
}

}  // namespace hidss
