#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "hidss/feedback.hpp"
#include "hidss/hybrid.hpp"
#include "hidss/matching.hpp"
#include "hidss/ontology.hpp"

namespace hidss {

enum class EventKind {
  venture_registered,
  version_created,
  judgment_submitted,
  guidance_issued,
  outcome_recorded,
  mentor_registered,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct Event {
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::venture_registered;
  Document payload;
  std::string recorded_at;
  std::string actor;
};

Document to_document(const Event& e);
Event event_from_document(const Document& doc);

/// Durable home of the event log. `append` must not return before the
/// event is stored.
class EventStore {
 public:
  virtual ~EventStore() = default;
  virtual void append(const Event& event) = 0;
  virtual std::vector<Event> load() const = 0;
};

class MemoryEventStore final : public EventStore {
 public:
  void append(const Event& event) override { events_.push_back(event); }
  std::vector<Event> load() const override { return events_; }

 private:
  std::vector<Event> events_;
};

/// Newline-delimited canonical documents, one event per line.
class FileEventStore final : public EventStore {
 public:
  explicit FileEventStore(std::filesystem::path path, bool fsync_on_append = false);
  void append(const Event& event) override;
  std::vector<Event> load() const override;

 private:
  std::filesystem::path path_;
  bool fsync_;
};

struct OutcomeRecord {
  std::string venture_id;
  int version_number = 0;
  Milestone milestone = Milestone::survival;
  bool achieved = false;
  std::string observed_at;
  std::optional<int> horizon_months;
};

Document to_document(const OutcomeRecord& o);

struct GuidanceEntry {
  std::uint64_t sequence = 0;
  int version_number = 0;
  std::string recorded_at;
  Document report;
};

/// Current state of one venture: a left fold of its events.
struct VentureSnapshot {
  std::string venture_id;
  std::string name;
  std::string registered_at;
  std::vector<BusinessModelVersion> versions;
  /// version number -> mentor id -> judgment (a resubmission replaces)
  std::map<int, std::map<std::string, Judgment>> judgments;
  std::map<Milestone, OutcomeRecord> outcomes;
  std::vector<GuidanceEntry> guidance;

  const BusinessModelVersion* latest() const;
  const BusinessModelVersion* version(int number) const;
  std::vector<Judgment> judgments_for(int number) const;
  std::size_t judgment_count() const;
  /// Most recent archived report for the version, if any.
  const GuidanceEntry* latest_guidance(int number) const;
  Document to_document() const;
};

struct PatternStat {
  std::size_t n = 0;
  std::size_t successes = 0;
  std::optional<double> rate;
};

using PatternStats = std::map<std::pair<std::string, std::string>, PatternStat>;

Document to_document(const PatternStats& stats);

/// Append-only event-sourced store of ventures, versions, judgments,
/// guidance, outcomes and mentors. Writes are serialized; readers share
/// a consistent view.
class Repository {
 public:
  Repository(PatternCatalog patterns, CriteriaCatalog criteria,
             std::unique_ptr<EventStore> store = std::make_unique<MemoryEventStore>(),
             Clock clock = system_clock());

  Repository(const Repository&) = delete;
  Repository& operator=(const Repository&) = delete;

  /// Validates the payload against the current state, persists the event
  /// and returns its sequence number.
  std::uint64_t append(EventKind kind, Document payload, std::string actor = {});
  /// Re-appends an event from another log, keeping its timestamp and actor.
  std::uint64_t append(const Event& event);

  VentureSnapshot snapshot(const std::string& venture_id) const;
  bool has_venture(const std::string& venture_id) const;
  std::vector<std::string> venture_ids() const;
  std::vector<MentorProfile> mentors() const;
  std::vector<Event> events() const;
  std::uint64_t last_sequence() const;
  /// Canonical rendering of every venture snapshot plus the mentor pool.
  Document state_document() const;

  PatternStats pattern_stats(Milestone milestone) const;
  LabeledDataset training_dataset(SignalSource source, Milestone milestone, std::size_t k_min = 3,
                                  const AggregationConfig& aggregation = {}) const;

  const PatternCatalog& patterns() const noexcept { return patterns_; }
  const CriteriaCatalog& criteria() const noexcept { return criteria_; }

 private:
  struct State {
    std::map<std::string, VentureSnapshot> ventures;
    std::map<std::string, MentorProfile> mentors;
    std::uint64_t last_sequence = 0;
  };

  Document validate(EventKind kind, const Document& payload, const State& state,
                    const std::string& recorded_at) const;
  std::uint64_t commit(Event event, bool persist);
  static void apply(State& state, const Event& event, const PatternCatalog& patterns);

  PatternCatalog patterns_;
  CriteriaCatalog criteria_;
  std::unique_ptr<EventStore> store_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  State state_;
};

}  // namespace hidss
