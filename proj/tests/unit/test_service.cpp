#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "fixtures.hpp"
#include "hidss/service.hpp"
#include "hidss/simkit.hpp"

using namespace hidss;

namespace {

ServiceConfig base_config() {
  ServiceConfig c;
  c.pattern_catalog = std::string(HIDSS_DATA_DIR) + "/pattern_catalog.json";
  c.criteria_catalog = std::string(HIDSS_DATA_DIR) + "/criteria_catalog.json";
  return c;
}

std::unique_ptr<Service> make_service(ServiceConfig c = base_config()) {
  return std::make_unique<Service>(std::move(c), std::make_unique<MemoryEventStore>(), counting_clock());
}

sim::World small_world(std::size_t n = 40) {
  sim::WorldParams p;
  p.seed = 5;
  p.n_ventures = n;
  p.n_mentors = 8;
  return sim::generate_world(p, test::patterns(), test::criteria());
}

Document draft(std::optional<int> base, const std::string& revenue = "asset_sale") {
  auto choices = test::first_choices(test::patterns());
  choices["revenue_stream"] = revenue;
  Document doc = {{"choices", choices},
                  {"metadata", {{"team_size", 4}, {"venture_age_months", 6}, {"industry", "fintech"}}},
                  {"profile", {{"value_proposition", "Cheaper invoices"}}}};
  if (base) doc["base_version"] = *base;
  return doc;
}

Document ratings(int value, const std::string& comment = "") {
  Document r = Document::object();
  for (const auto& c : test::criteria().criteria()) r[c.id] = value;
  Document doc = {{"ratings", r}};
  if (!comment.empty()) doc["comments"] = {{"value_capture", comment}};
  return doc;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / (name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("guidance before any model is a cold-start error") {
  auto svc = make_service();
  svc->register_venture({{"venture_id", "acme"}});
  svc->create_version("acme", draft(std::nullopt));
  try {
    svc->process_validation_round("acme");
    FAIL("expected cold-start");
  } catch (const Error& e) {
    CHECK(e.code() == "cold-start");
  }
}

TEST_CASE("full validation loop") {
  auto svc = make_service();
  svc->seed_world(small_world());
  auto summary = svc->retrain();
  CHECK(summary.swapped);
  CHECK(summary.slots.size() == 4);
  REQUIRE(svc->models());
  CHECK(svc->models()->has_machine_model());

  svc->register_venture({{"venture_id", "acme"}, {"name", "Acme"}});
  auto v1 = svc->create_version("acme", draft(std::nullopt));
  CHECK(v1.version_number == 1);

  SUBCASE("without judgments the report is machine-only") {
    auto r = svc->process_validation_round("acme");
    CHECK(r.judge_count == 0);
    for (const auto& [m, p] : r.predictions) CHECK(p.basis == Basis::machine_only);
  }

  SUBCASE("with enough judgments the crowd signal joins in") {
    auto matches = svc->matches("acme", 3);
    CHECK(matches.size() == 4);
    auto mentors = svc->mentors();
    REQUIRE(mentors.size() >= 3);
    CHECK_THROWS_AS(svc->submit_judgment("acme", 1, ratings(6)), Error);  // no mentor id
    for (int i = 0; i < 3; ++i) {
      auto body = ratings(5 + i, i == 0 ? "Charge monthly" : "");
      body["mentor_id"] = mentors[i].mentor_id;
      svc->submit_judgment("acme", 1, body);
    }
    auto r1 = svc->process_validation_round("acme");
    CHECK(r1.judge_count == 3);
    CHECK(r1.dimension_scores.at(AssessmentDimension::desirability) == doctest::Approx(6.0));
    bool any_crowd = svc->models()->find(SignalSource::crowd, Milestone::survival) != nullptr;
    if (any_crowd) CHECK(r1.predictions.at(Milestone::survival).basis == Basis::hybrid);
    CHECK(r1.comments.at(Dimension::value_capture).size() == 1);
    CHECK_FALSE(r1.history.has_value());

    auto v2 = svc->create_version("acme", draft(1, "subscription"));
    CHECK(v2.parent_version == 1);
    auto r2 = svc->process_validation_round("acme");
    REQUIRE(r2.history.has_value());
    CHECK(r2.history->parent_version == 1);
    CHECK(r2.history->probability_deltas.contains(Milestone::survival));
    double expected = r2.predictions.at(Milestone::survival).p_hybrid - r1.predictions.at(Milestone::survival).p_hybrid;
    CHECK(r2.history->probability_deltas.at(Milestone::survival).at("p_hybrid") == doctest::Approx(expected));

    auto snap = svc->repository().snapshot("acme");
    CHECK(snap.guidance.size() == 2);
    CHECK(snap.versions.size() == 2);
  }
}

TEST_CASE("stale revisions are rejected") {
  auto svc = make_service();
  svc->register_venture({{"venture_id", "acme"}});
  svc->create_version("acme", draft(std::nullopt));
  svc->create_version("acme", draft(1));
  try {
    svc->create_version("acme", draft(1));
    FAIL("expected stale-base");
  } catch (const Error& e) {
    CHECK(e.code() == "stale-base");
  }
}

TEST_CASE("judgment authority comes from the match list") {
  auto svc = make_service();
  svc->register_mentor({{"mentor_id", "fin"}, {"tags", {"finance"}}, {"industries", {"fintech"}}});
  svc->register_mentor({{"mentor_id", "tech"}, {"tags", {"technology"}}, {"industries", {"energy"}}});
  svc->register_venture({{"venture_id", "acme"}});
  svc->create_version("acme", draft(std::nullopt));
  auto body = ratings(7);
  body["mentor_id"] = "fin";
  auto j = svc->submit_judgment("acme", 1, body);
  // fin scores 3 on value_capture and 1 elsewhere (industry only).
  CHECK(j.authority.size() == 4);
  body["mentor_id"] = "outsider";
  CHECK(svc->submit_judgment("acme", 1, body).authority.empty());
}

TEST_CASE("retraining is deterministic and keeps the old set when nothing trains") {
  auto a = make_service();
  auto b = make_service();
  auto world = small_world();
  a->seed_world(world);
  b->seed_world(world);
  auto sa = a->retrain(), sb = b->retrain();
  CHECK(sa.model_set_id == sb.model_set_id);
  CHECK(canonical(a->models()->to_document()) == canonical(b->models()->to_document()));

  auto empty = make_service();
  auto summary = empty->retrain();
  CHECK_FALSE(summary.swapped);
  CHECK_FALSE(empty->models());
  empty->install_models(*a->models());
  CHECK_FALSE(empty->retrain().swapped);
  CHECK(empty->models()->id() == sa.model_set_id);
}

TEST_CASE("retrain on outcome policy") {
  auto config = base_config();
  config.retrain_policy = RetrainPolicy::on_outcome;
  auto svc = make_service(config);
  svc->register_venture({{"venture_id", "acme"}});
  svc->create_version("acme", draft(std::nullopt));
  CHECK_FALSE(svc->models());
  svc->record_outcome("acme", {{"milestone", "survival"}, {"achieved", true}});
  REQUIRE(svc->models());
  CHECK(svc->models()->find(SignalSource::machine, Milestone::survival));
}

TEST_CASE("models persist next to the log and reload on start") {
  auto dir = scratch_dir("hidss-service");
  auto config = base_config();
  config.storage = dir / "events.ndjson";
  config.model_path = dir / "models.json";
  std::string id;
  {
    Service svc(config, counting_clock());
    svc.seed_world(small_world(30));
    id = svc.retrain().model_set_id;
  }
  Service reopened(config, counting_clock());
  REQUIRE(reopened.models());
  CHECK(reopened.models()->id() == id);
  CHECK(reopened.repository().venture_ids().size() == 30);
  std::filesystem::remove_all(dir);
}

TEST_CASE("export then import reproduces the state") {
  auto svc = make_service();
  svc->seed_world(small_world(15));
  svc->register_venture({{"venture_id", "acme"}});
  svc->create_version("acme", draft(std::nullopt));
  auto exported = svc->export_document();

  auto copy = make_service();
  CHECK(copy->import_document(exported) == exported["events"].size());
  CHECK(canonical(copy->repository().state_document()) == canonical(exported["state"]));

  auto tampered = exported;
  tampered["state"]["last_sequence"] = 1;
  CHECK_THROWS_AS(make_service()->import_document(tampered), Error);
  CHECK_THROWS_AS(make_service()->import_document(Document{{"format", "other"}}), Error);
}

TEST_CASE("configuration file and environment overrides") {
  auto dir = scratch_dir("hidss-config");
  {
    std::ofstream out(dir / "hidss.json");
    out << R"({"pattern_catalog": "p.json", "storage": "var/log.ndjson", "hybrid_weight": 0.7,
               "k_min": 4, "listen": "0.0.0.0:9000"})";
  }
  auto c = ServiceConfig::from_document(Document::parse(std::ifstream(dir / "hidss.json")), dir);
  CHECK(c.pattern_catalog == dir / "p.json");
  CHECK(c.storage == dir / "var/log.ndjson");
  CHECK(c.hybrid_weight == 0.7);
  CHECK(c.k_min == 4);
  CHECK(c.host() == "0.0.0.0");
  CHECK(c.port() == 9000);

  std::map<std::string, std::string> env = {{"HIDSS_HYBRID_WEIGHT", "0.25"},
                                            {"HIDSS_CONTESTED_THRESHOLD", "inf"},
                                            {"HIDSS_RETRAIN_POLICY", "on-outcome"},
                                            {"HIDSS_CART_MAX_DEPTH", "3"}};
  c.apply_overrides([&](const std::string& key) -> std::optional<std::string> {
    auto it = env.find(key);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
  CHECK(c.hybrid_weight == 0.25);
  CHECK(std::isinf(c.aggregation.contested_threshold));
  CHECK(c.retrain_policy == RetrainPolicy::on_outcome);
  CHECK(c.cart.max_depth == 3);
  CHECK_NOTHROW(c.validate());

  c.hybrid_weight = 1.5;
  c.k_min = 0;
  try {
    c.validate();
    FAIL("expected invalid-config");
  } catch (const Error& e) {
    CHECK(e.issues().size() >= 2);
    CHECK(e.code() == "invalid-config");
  }
  std::filesystem::remove_all(dir);
}
