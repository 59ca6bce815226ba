#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include <unistd.h>

#include "fixtures.hpp"
#include "hidss/repository.hpp"

using namespace hidss;

namespace {

std::unique_ptr<Repository> fresh(std::unique_ptr<EventStore> store = std::make_unique<MemoryEventStore>()) {
  return std::make_unique<Repository>(test::patterns(), test::criteria(), std::move(store), counting_clock());
}

Document version_doc(const std::string& venture, int number, ChoiceMap choices) {
  auto v = test::version_with(test::patterns(), venture, number, std::move(choices));
  if (number > 1) v.parent_version = number - 1;
  return to_document(v);
}

Document judgment_doc(const std::string& venture, int number, const std::string& mentor, int rating = 6) {
  auto j = test::uniform_judgment(test::criteria(), venture, number, mentor, rating);
  j.judgment_id.clear();
  return to_document(j);
}

Document outcome_doc(const std::string& venture, Milestone m, bool achieved) {
  return {{"venture_id", venture}, {"milestone", to_string(m)}, {"achieved", achieved}};
}

void register_with_version(Repository& repo, const std::string& venture, ChoiceMap choices) {
  repo.append(EventKind::venture_registered, {{"venture_id", venture}, {"name", venture}});
  repo.append(EventKind::version_created, version_doc(venture, 1, std::move(choices)));
}

}  // namespace

TEST_CASE("sequence numbers start at one and increase by one") {
  auto repo = fresh();
  CHECK(repo->last_sequence() == 0);
  CHECK(repo->append(EventKind::venture_registered, {{"venture_id", "a"}}) == 1);
  CHECK(repo->append(EventKind::venture_registered, {{"venture_id", "b"}}) == 2);
  auto events = repo->events();
  REQUIRE(events.size() == 2);
  CHECK(events[0].sequence == 1);
  CHECK(events[1].sequence == 2);
  CHECK(events[0].recorded_at < events[1].recorded_at);
}

TEST_CASE("concurrent writers produce a gap-free log") {
  auto repo = fresh();
  constexpr int kThreads = 8, kPerThread = 50;
  std::vector<std::thread> threads;
  std::vector<std::vector<std::uint64_t>> seen(kThreads);
  for (int t = 0; t < kThreads; ++t)
    threads.emplace_back([&, t] {
      for (int i = 0; i < kPerThread; ++i)
        seen[t].push_back(repo->append(EventKind::venture_registered,
                                       {{"venture_id", "t" + std::to_string(t) + "-" + std::to_string(i)}}));
    });
  for (auto& th : threads) th.join();
  std::set<std::uint64_t> all;
  for (const auto& s : seen) all.insert(s.begin(), s.end());
  CHECK(all.size() == kThreads * kPerThread);
  CHECK(*all.begin() == 1);
  CHECK(*all.rbegin() == kThreads * kPerThread);
  auto events = repo->events();
  for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i].sequence == i + 1);
}

TEST_CASE("rejected events leave no trace") {
  auto repo = fresh();
  register_with_version(*repo, "a", test::first_choices(test::patterns()));
  auto before = repo->last_sequence();
  CHECK_THROWS_AS(repo->append(EventKind::venture_registered, {{"venture_id", "a"}}), Error);
  CHECK_THROWS_AS(repo->append(EventKind::version_created, version_doc("a", 3, test::first_choices(test::patterns()))),
                  Error);
  CHECK_THROWS_AS(repo->append(EventKind::judgment_submitted, judgment_doc("a", 2, "m")), Error);
  CHECK_THROWS_AS(repo->append(EventKind::judgment_submitted, judgment_doc("nobody", 1, "m")), Error);
  CHECK(repo->last_sequence() == before);
  CHECK(repo->events().size() == before);
}

TEST_CASE("a second outcome for the same milestone is rejected") {
  auto repo = fresh();
  register_with_version(*repo, "a", test::first_choices(test::patterns()));
  repo->append(EventKind::outcome_recorded, outcome_doc("a", Milestone::survival, true));
  try {
    repo->append(EventKind::outcome_recorded, outcome_doc("a", Milestone::survival, false));
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == "duplicate-outcome");
  }
  CHECK_NOTHROW(repo->append(EventKind::outcome_recorded, outcome_doc("a", Milestone::series_a, false)));
  auto snap = repo->snapshot("a");
  CHECK(snap.outcomes.at(Milestone::survival).achieved);
}

TEST_CASE("outcomes label the latest version") {
  auto repo = fresh();
  register_with_version(*repo, "a", test::first_choices(test::patterns()));
  repo->append(EventKind::version_created, version_doc("a", 2, test::first_choices(test::patterns())));
  auto doc = outcome_doc("a", Milestone::survival, true);
  doc["version_number"] = 1;
  CHECK_THROWS_AS(repo->append(EventKind::outcome_recorded, doc), Error);
  repo->append(EventKind::outcome_recorded, outcome_doc("a", Milestone::survival, true));
  CHECK(repo->snapshot("a").outcomes.at(Milestone::survival).version_number == 2);
}

TEST_CASE("snapshot folds versions and judgments") {
  auto repo = fresh();
  register_with_version(*repo, "a", test::first_choices(test::patterns()));
  repo->append(EventKind::version_created, version_doc("a", 2, test::first_choices(test::patterns())));
  for (const auto* m : {"m1", "m2", "m3"}) repo->append(EventKind::judgment_submitted, judgment_doc("a", 2, m));
  // A resubmission replaces the earlier judgment.
  repo->append(EventKind::judgment_submitted, judgment_doc("a", 2, "m1", 9));
  auto snap = repo->snapshot("a");
  CHECK(snap.versions.size() == 2);
  CHECK(snap.judgment_count() == 3);
  CHECK(snap.judgments_for(2).size() == 3);
  CHECK(snap.judgments_for(1).empty());
  CHECK(snap.latest()->version_number == 2);
  CHECK(snap.judgments.at(2).at("m1").ratings.begin()->second == 9);
  CHECK(snap.judgments.at(2).at("m2").judgment_id == "a:2:m2");
  CHECK_THROWS_AS(repo->snapshot("zzz"), Error);
}

TEST_CASE("a version must extend the latest one") {
  auto repo = fresh();
  register_with_version(*repo, "a", test::first_choices(test::patterns()));
  auto doc = version_doc("a", 2, test::first_choices(test::patterns()));
  doc["parent_version"] = nullptr;
  try {
    repo->append(EventKind::version_created, doc);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(e.code() == "stale-base");
  }
}

TEST_CASE("replaying a log rebuilds identical state") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    auto repo = fresh();
    for (int v = 0; v < 5; ++v) {
      std::string id = "v" + std::to_string(v);
      register_with_version(*repo, id, test::random_choices(test::patterns(), rng));
      if (rng() % 2) repo->append(EventKind::version_created, version_doc(id, 2, test::random_choices(test::patterns(), rng)));
      for (int j = 0; j < static_cast<int>(rng() % 4); ++j)
        repo->append(EventKind::judgment_submitted, judgment_doc(id, 1, "m" + std::to_string(j), 1 + rng() % 10));
      if (rng() % 2) repo->append(EventKind::outcome_recorded, outcome_doc(id, Milestone::survival, rng() % 2));
    }
    auto store = std::make_unique<MemoryEventStore>();
    for (const auto& e : repo->events()) store->append(e);
    auto replayed = fresh(std::move(store));
    CHECK(canonical(replayed->state_document()) == canonical(repo->state_document()));
  }
}

TEST_CASE("a log with a gap is refused") {
  auto store = std::make_unique<MemoryEventStore>();
  store->append({1, EventKind::venture_registered, {{"venture_id", "a"}}, "t", ""});
  store->append({3, EventKind::venture_registered, {{"venture_id", "b"}}, "t", ""});
  CHECK_THROWS_AS(fresh(std::move(store)), Error);
}

TEST_CASE("file store survives a restart") {
  auto dir = std::filesystem::temp_directory_path() / ("hidss-repo-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  auto path = dir / "events.ndjson";
  std::string state;
  {
    auto repo = fresh(std::make_unique<FileEventStore>(path, true));
    register_with_version(*repo, "a", test::first_choices(test::patterns()));
    repo->append(EventKind::judgment_submitted, judgment_doc("a", 1, "m1"));
    repo->append(EventKind::outcome_recorded, outcome_doc("a", Milestone::series_a, true));
    state = canonical(repo->state_document());
  }
  auto reopened = fresh(std::make_unique<FileEventStore>(path));
  CHECK(reopened->last_sequence() == 4);
  CHECK(canonical(reopened->state_document()) == state);
  CHECK(reopened->append(EventKind::venture_registered, {{"venture_id", "b"}}) == 5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("pattern statistics count labeled ventures per choice") {
  auto repo = fresh();
  auto base = test::first_choices(test::patterns());
  auto with_subscription = base;
  with_subscription["revenue_stream"] = "subscription";
  register_with_version(*repo, "a", with_subscription);
  register_with_version(*repo, "b", with_subscription);
  register_with_version(*repo, "c", with_subscription);
  register_with_version(*repo, "d", base);
  register_with_version(*repo, "e", base);  // unlabeled
  repo->append(EventKind::outcome_recorded, outcome_doc("a", Milestone::survival, true));
  repo->append(EventKind::outcome_recorded, outcome_doc("b", Milestone::survival, true));
  repo->append(EventKind::outcome_recorded, outcome_doc("c", Milestone::survival, false));
  repo->append(EventKind::outcome_recorded, outcome_doc("d", Milestone::survival, false));

  auto stats = repo->pattern_stats(Milestone::survival);
  const auto& sub = stats.at({"revenue_stream", "subscription"});
  CHECK(sub.n == 3);
  CHECK(sub.successes == 2);
  CHECK(*sub.rate == doctest::Approx(2.0 / 3.0));
  CHECK(stats.at({"revenue_stream", "asset_sale"}).n == 1);
  CHECK(stats.at({"channel", base.at("channel")}).n == 4);
  CHECK(repo->pattern_stats(Milestone::series_a).empty());
}

TEST_CASE("training datasets pair features with outcomes") {
  auto repo = fresh();
  register_with_version(*repo, "a", test::first_choices(test::patterns()));
  register_with_version(*repo, "b", test::first_choices(test::patterns()));
  repo->append(EventKind::outcome_recorded, outcome_doc("a", Milestone::survival, true));
  repo->append(EventKind::outcome_recorded, outcome_doc("b", Milestone::survival, false));

  auto machine = repo->training_dataset(SignalSource::machine, Milestone::survival);
  CHECK(machine.rows.size() == 2);
  CHECK(machine.rows[0].features.size() == test::patterns().feature_count());
  CHECK(machine.positives() == 1);
  CHECK(repo->training_dataset(SignalSource::crowd, Milestone::survival).rows.empty());

  for (const auto* m : {"m1", "m2"}) repo->append(EventKind::judgment_submitted, judgment_doc("a", 1, m));
  CHECK(repo->training_dataset(SignalSource::crowd, Milestone::survival, 3).rows.empty());
  repo->append(EventKind::judgment_submitted, judgment_doc("a", 1, "m3"));
  auto crowd = repo->training_dataset(SignalSource::crowd, Milestone::survival, 3);
  REQUIRE(crowd.rows.size() == 1);
  CHECK(crowd.rows[0].features.size() == kCrowdFeatureCount);
  CHECK(crowd.schema_id == kCrowdSchemaId);
}

TEST_CASE("mentors are validated and listed") {
  auto repo = fresh();
  MentorProfile m{"m-1", {ExpertiseTag::finance}, {"fintech"}, "One"};
  repo->append(EventKind::mentor_registered, to_document(m));
  CHECK(repo->mentors() == std::vector<MentorProfile>{m});
  Document bad = {{"mentor_id", "m-2"}, {"tags", Document::array()}, {"industries", Document::array()}};
  CHECK_THROWS_AS(repo->append(EventKind::mentor_registered, bad), Error);
}
