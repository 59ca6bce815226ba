#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hidss/config.hpp"
#include "hidss/guidance.hpp"
#include "hidss/hybrid.hpp"
#include "hidss/repository.hpp"
#include "hidss/simkit.hpp"

namespace hidss {

struct RetrainSummary {
  std::vector<SlotReport> slots;
  bool swapped = false;
  std::string model_set_id;  // id of the active set after the call

  Document to_document() const;
};

/// Orchestrates the validation loop over one repository and one active
/// model set. Every mutating call appends exactly the matching event.
class Service {
 public:
  /// Uses a file-backed log at config.storage, or memory when it is empty.
  explicit Service(ServiceConfig config, Clock clock = system_clock());
  Service(ServiceConfig config, std::unique_ptr<EventStore> store, Clock clock = system_clock());

  const ServiceConfig& config() const noexcept { return config_; }
  Repository& repository() noexcept { return *repo_; }
  const Repository& repository() const noexcept { return *repo_; }

  /// Active model set; callers keep it alive while they use it.
  std::shared_ptr<const ModelSet> models() const;
  void install_models(ModelSet models);

  Document register_venture(const Document& body, const std::string& actor = {});
  BusinessModelVersion create_version(const std::string& venture_id, const Document& body,
                                      const std::string& actor = {});
  BusinessModelVersion version(const std::string& venture_id, int number) const;
  MatchAssignment matches(const std::string& venture_id, std::size_t k) const;
  Judgment submit_judgment(const std::string& venture_id, int number, const Document& body,
                           const std::string& actor = {});
  OutcomeRecord record_outcome(const std::string& venture_id, const Document& body, const std::string& actor = {});
  MentorProfile register_mentor(const Document& body, const std::string& actor = {});
  std::vector<MentorProfile> mentors() const;
  PatternStats pattern_stats(Milestone milestone) const;

  /// Rebuilds datasets, trains and swaps the active set. When nothing
  /// trains the previous set stays active.
  RetrainSummary retrain();

  /// aggregate -> hybrid_predict -> whatif_scan -> build_report for the
  /// given (default: latest) version; archives the report as GuidanceIssued.
  GuidanceReport process_validation_round(const std::string& venture_id, std::optional<int> number = std::nullopt,
                                          const std::string& actor = {});

  std::size_t seed_mentors(const std::filesystem::path& table, const std::string& actor = "seed");
  void seed_world(const sim::World& world, const std::string& actor = "seed");

  Document export_document() const;
  /// Appends every event of an export. When the repository was empty the
  /// resulting state must reproduce the exported state exactly.
  std::size_t import_document(const Document& doc);

 private:
  AggregatedAssessment assess(const VentureSnapshot& venture, int number) const;
  GuidanceReport assemble(const VentureSnapshot& venture, const BusinessModelVersion& version, const ModelSet& models,
                          const GuidanceReport* parent) const;

  ServiceConfig config_;
  Clock clock_;
  std::unique_ptr<Repository> repo_;
  mutable std::mutex models_mutex_;
  std::shared_ptr<const ModelSet> models_;
  std::mutex retrain_mutex_;
};

}  // namespace hidss
