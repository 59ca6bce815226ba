#include "hidss/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "hidss/repository.hpp"

namespace hidss::sim {

namespace {

constexpr std::int64_t kWorldEpoch = 1'577'836'800;  // 2020-01-01T00:00:00Z

std::string padded(std::string_view prefix, std::size_t i, int width) {
  std::ostringstream os;
  os << prefix << std::setw(width) << std::setfill('0') << i;
  return os.str();
}

}  // namespace

void validate(const WorldParams& p) {
  std::vector<Issue> issues;
  auto finite_nonneg = [&](double v, const char* field) {
    if (!std::isfinite(v) || v < 0.0) issues.push_back({"invalid-params", std::string(field) + " must be finite and >= 0", field});
  };
  finite_nonneg(p.hard_weight, "hard_weight");
  finite_nonneg(p.soft_weight, "soft_weight");
  finite_nonneg(p.judge_noise, "judge_noise");
  if (p.judges_per_venture > 0 && p.n_mentors == 0)
    issues.push_back({"invalid-params", "judges need a mentor pool", "n_mentors"});
  if (!issues.empty()) throw Error(std::move(issues));
}

Document to_document(const WorldParams& p) {
  return {{"seed", p.seed},
          {"n_ventures", p.n_ventures},
          {"n_mentors", p.n_mentors},
          {"hard_weight", p.hard_weight},
          {"soft_weight", p.soft_weight},
          {"judge_noise", p.judge_noise},
          {"judges_per_venture", p.judges_per_venture}};
}

WorldParams params_from_document(const Document& doc) {
  WorldParams p;
  p.seed = static_cast<std::uint64_t>(require_int(doc, "seed"));
  p.n_ventures = static_cast<std::size_t>(require_int(doc, "n_ventures"));
  p.n_mentors = static_cast<std::size_t>(require_int(doc, "n_mentors"));
  p.hard_weight = require_number(doc, "hard_weight");
  p.soft_weight = require_number(doc, "soft_weight");
  p.judge_noise = require_number(doc, "judge_noise");
  p.judges_per_venture = static_cast<std::size_t>(require_int(doc, "judges_per_venture"));
  validate(p);
  return p;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Document World::to_document() const {
  Document mentors_doc = Document::array();
  for (const auto& m : mentors) mentors_doc.push_back(hidss::to_document(m));
  Document ventures_doc = Document::array();
  for (const auto& v : ventures) {
    Document judgments_doc = Document::array();
    for (const auto& j : v.judgments) judgments_doc.push_back(hidss::to_document(j));
    Document outcomes_doc = Document::object();
    for (const auto& [m, achieved] : v.outcomes) outcomes_doc[std::string(to_string(m))] = achieved;
    ventures_doc.push_back({{"version", hidss::to_document(v.version)},
                            {"judgments", judgments_doc},
                            {"outcomes", outcomes_doc},
                            {"hidden", {{"hard", v.hard}, {"soft", v.soft}, {"probability", v.probability}}}});
  }
  return {{"format", "hidss-world/1"},
          {"params", sim::to_document(params)},
          {"catalog_version", catalog_version},
          {"coefficients", coefficients},
          {"mentors", mentors_doc},
          {"ventures", ventures_doc}};
}

World World::from_document(const Document& doc, const PatternCatalog& patterns) {
  World w;
  w.params = params_from_document(require(doc, "params"));
  w.catalog_version = require_string(doc, "catalog_version");
  if (w.catalog_version != patterns.version())
    fail("catalog-mismatch", "world was generated for catalog '" + w.catalog_version + "'", "catalog_version");
  for (const auto& [element, coefs] : require(doc, "coefficients").items())
    w.coefficients[element] = coefs.get<std::vector<double>>();
  for (const auto& m : require(doc, "mentors")) w.mentors.push_back(mentor_from_document(m));
  for (const auto& v : require(doc, "ventures")) {
    SimVenture sv;
    sv.version = validate_model(require(v, "version"), patterns);
    for (const auto& j : require(v, "judgments")) sv.judgments.push_back(judgment_from_document(j));
    for (const auto& [key, achieved] : require(v, "outcomes").items()) {
      auto m = parse_milestone(key);
      if (!m) fail("unknown-milestone", "unknown milestone '" + key + "'", "outcomes");
      sv.outcomes[*m] = achieved.get<bool>();
    }
    if (auto it = v.find("hidden"); it != v.end()) {
      sv.hard = require_number(*it, "hard");
      sv.soft = require_number(*it, "soft");
      sv.probability = require_number(*it, "probability");
    }
    w.ventures.push_back(std::move(sv));
  }
  return w;
}

World generate_world(const WorldParams& params, const PatternCatalog& patterns, const CriteriaCatalog& criteria) {
  validate(params);
  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  World world;
  world.params = params;
  world.catalog_version = patterns.version();

  for (const auto& def : patterns.elements()) {
    auto& coefs = world.coefficients[def.id];
    for (std::size_t c = 0; c < def.choices.size(); ++c) coefs.push_back(std_normal(rng));
  }
  const double hard_scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, patterns.elements().size())));

  std::vector<std::string> industries(patterns.industries().begin(), patterns.industries().end());
  if (industries.empty()) industries.push_back("general");

  for (std::size_t i = 0; i < params.n_mentors; ++i) {
    MentorProfile m;
    m.mentor_id = padded("mentor-", i + 1, 4);
    m.display_name = "Simulated mentor " + std::to_string(i + 1);
    while (m.tags.empty())
      for (auto tag : {ExpertiseTag::market, ExpertiseTag::technology, ExpertiseTag::finance})
        if (unit(rng) < 0.4) m.tags.insert(tag);
    m.industries.insert(industries[pick(industries.size())]);
    if (unit(rng) < 0.5) m.industries.insert(industries[pick(industries.size())]);
    world.mentors.push_back(std::move(m));
  }

  const std::size_t judges = std::min(params.judges_per_venture, params.n_mentors);
  std::vector<std::size_t> mentor_order(params.n_mentors);
  for (std::size_t i = 0; i < params.n_ventures; ++i) {
    SimVenture v;
    v.version.venture_id = padded("sim-", i + 1, 6);
    v.version.version_number = 1;
    v.version.catalog_version = patterns.version();
    v.version.created_at = format_timestamp(kWorldEpoch + static_cast<std::int64_t>(i));
    double hard = 0.0;
    for (const auto& def : patterns.elements()) {
      auto c = pick(def.choices.size());
      v.version.choices[def.id] = def.choices[c];
      hard += world.coefficients[def.id][c];
    }
    v.version.metadata.team_size = static_cast<std::int64_t>(1 + pick(12));
    v.version.metadata.venture_age_months = static_cast<std::int64_t>(pick(61));
    v.version.metadata.industry = industries[pick(industries.size())];
    v.hard = hard * hard_scale;
    v.soft = std_normal(rng);
    v.probability = logistic(params.hard_weight * v.hard + params.soft_weight * v.soft);
    for (auto m : kMilestones) v.outcomes[m] = unit(rng) < v.probability;

    std::iota(mentor_order.begin(), mentor_order.end(), 0);
    for (std::size_t k = 0; k < judges; ++k) {
      std::swap(mentor_order[k], mentor_order[k + pick(params.n_mentors - k)]);
      Judgment j;
      j.version = {v.version.venture_id, 1};
      j.mentor_id = world.mentors[mentor_order[k]].mentor_id;
      j.judgment_id = v.version.venture_id + ":1:" + j.mentor_id;
      j.submitted_at = v.version.created_at;
      for (const auto& c : criteria.criteria()) {
        double noise = params.judge_noise > 0.0 ? params.judge_noise * std_normal(rng) : 0.0;
        double raw = std::round(kRatingBaseline + kRatingSlope * v.soft + noise);
        j.ratings[c.id] = static_cast<int>(std::clamp(raw, double(kMinRating), double(kMaxRating)));
      }
      v.judgments.push_back(std::move(j));
    }
    world.ventures.push_back(std::move(v));
  }
  return world;
}

void import_world(Repository& repo, const World& world, std::size_t begin, std::size_t end, bool with_outcomes,
                  const std::string& actor) {
  for (const auto& m : world.mentors) repo.append(EventKind::mentor_registered, hidss::to_document(m), actor);
  end = std::min(end, world.ventures.size());
  for (std::size_t i = begin; i < end; ++i) {
    const auto& v = world.ventures[i];
    repo.append(EventKind::venture_registered, {{"venture_id", v.version.venture_id}, {"name", v.version.venture_id}},
                actor);
    repo.append(EventKind::version_created, hidss::to_document(v.version), actor);
    for (const auto& j : v.judgments) repo.append(EventKind::judgment_submitted, hidss::to_document(j), actor);
    if (!with_outcomes) continue;
    for (const auto& [m, achieved] : v.outcomes)
      repo.append(EventKind::outcome_recorded,
                  {{"venture_id", v.version.venture_id},
                   {"milestone", to_string(m)},
                   {"achieved", achieved},
                   {"observed_at", v.version.created_at}},
                  actor);
  }
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const bool> labels) {
  if (scores.size() != labels.size()) fail("schema-mismatch", "scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  // Average ranks over tie groups, then the Mann-Whitney U statistic.
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    i = j;
  }
  std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  double u = rank_sum_pos - static_cast<double>(n_pos) * static_cast<double>(n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double brier_score(std::span<const double> scores, std::span<const bool> labels) {
  if (scores.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    double d = scores[i] - (labels[i] ? 1.0 : 0.0);
    s += d * d;
  }
  return s / static_cast<double>(scores.size());
}

const MilestoneMetrics& Evaluation::at(Milestone m) const {
  for (const auto& mm : milestones)
    if (mm.milestone == m) return mm;
  fail("no-model", "no metrics for milestone " + std::string(to_string(m)));
}

Document Evaluation::to_document() const {
  auto sig = [](const SignalMetrics& s) {
    return Document{{"auc", s.auc ? Document(*s.auc) : Document()},
                    {"brier", s.brier ? Document(*s.brier) : Document()},
                    {"n", s.n}};
  };
  Document doc = Document::object();
  for (const auto& m : milestones)
    doc[std::string(to_string(m.milestone))] = {{"machine", sig(m.machine)},
                                                {"crowd", sig(m.crowd)},
                                                {"hybrid", sig(m.hybrid)},
                                                {"truth", sig(m.truth)}};
  return doc;
}

std::string Evaluation::table() const {
  std::ostringstream os;
  auto cell = [](const std::optional<double>& v) {
    std::ostringstream c;
    if (v) c << std::fixed << std::setprecision(4) << *v;
    else c << "undefined";
    return c.str();
  };
  os << std::left << std::setw(10) << "milestone" << std::setw(9) << "signal" << std::setw(11) << "auc"
     << std::setw(11) << "brier" << "n\n";
  for (const auto& m : milestones) {
    const std::pair<const char*, const SignalMetrics*> rows[] = {
        {"machine", &m.machine}, {"crowd", &m.crowd}, {"hybrid", &m.hybrid}, {"truth", &m.truth}};
    for (const auto& [name, s] : rows)
      os << std::setw(10) << to_string(m.milestone) << std::setw(9) << name << std::setw(11) << cell(s->auc)
         << std::setw(11) << cell(s->brier) << s->n << "\n";
  }
  return os.str();
}

std::string Evaluation::csv() const {
  std::ostringstream os;
  os << "milestone,signal,auc,brier,n\n";
  os << std::setprecision(10);
  for (const auto& m : milestones) {
    const std::pair<const char*, const SignalMetrics*> rows[] = {
        {"machine", &m.machine}, {"crowd", &m.crowd}, {"hybrid", &m.hybrid}, {"truth", &m.truth}};
    for (const auto& [name, s] : rows) {
      os << to_string(m.milestone) << ',' << name << ',';
      if (s->auc) os << *s->auc;
      os << ',';
      if (s->brier) os << *s->brier;
      os << ',' << s->n << '\n';
    }
  }
  return os.str();
}

Evaluation evaluate_guidance(const World& world, const ModelSet& models, const PatternCatalog& patterns,
                             const CriteriaCatalog& criteria, std::size_t begin, std::size_t end,
                             const AggregationConfig& aggregation) {
  end = std::min(end, world.ventures.size());
  Evaluation eval;
  for (auto milestone : kMilestones) {
    if (!models.find(SignalSource::machine, milestone)) continue;
    MilestoneMetrics mm;
    mm.milestone = milestone;
    std::vector<double> machine, hybrid, truth, crowd;
    std::vector<bool> labels_all, labels_crowd;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& v = world.ventures[i];
      std::optional<AggregatedAssessment> assessment;
      if (!v.judgments.empty()) assessment = aggregate(v.judgments, criteria, aggregation);
      auto p = hybrid_predict(models, v.version, patterns, assessment ? &*assessment : nullptr, milestone);
      bool y = v.outcomes.at(milestone);
      machine.push_back(*p.p_machine);
      hybrid.push_back(p.p_hybrid);
      truth.push_back(v.probability);
      labels_all.push_back(y);
      if (p.p_crowd) {
        crowd.push_back(*p.p_crowd);
        labels_crowd.push_back(y);
      }
    }
    // vector<bool> is not contiguous, so labels are copied out before taking a span.
    auto score = [](const std::vector<double>& s, const std::vector<bool>& y) {
      std::unique_ptr<bool[]> labels(new bool[y.size()]);
      std::copy(y.begin(), y.end(), labels.get());
      std::span<const bool> ls(labels.get(), y.size());
      SignalMetrics m;
      m.n = s.size();
      if (!s.empty()) {
        m.auc = roc_auc(s, ls);
        m.brier = brier_score(s, ls);
      }
      return m;
    };
    mm.machine = score(machine, labels_all);
    mm.hybrid = score(hybrid, labels_all);
    mm.truth = score(truth, labels_all);
    mm.crowd = score(crowd, labels_crowd);
    eval.milestones.push_back(std::move(mm));
  }
  return eval;
}

Evaluation run_experiment(const ExperimentConfig& config, const PatternCatalog& patterns,
                          const CriteriaCatalog& criteria) {
  auto world = generate_world(config.world, patterns, criteria);
  Repository repo(patterns, criteria, std::make_unique<MemoryEventStore>(), counting_clock());
  import_world(repo, world, 0, config.n_train, true);
  auto models = train_all(
      [&](SignalSource s, Milestone m) { return repo.training_dataset(s, m, config.k_min, config.aggregation); },
      config.cart, config.hybrid_weight, config.k_min);
  return evaluate_guidance(world, models, patterns, criteria, config.n_train, world.ventures.size(),
                           config.aggregation);
}

}  // namespace hidss::sim
