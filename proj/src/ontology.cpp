#include "hidss/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace hidss {

namespace {

constexpr std::array<std::string_view, 4> kDimensionNames = {
    "value_proposition", "value_delivery", "value_creation", "value_capture"};

ProfileText parse_profile(const Document& doc) {
  ProfileText profile;
  if (doc.is_null()) return profile;
  if (!doc.is_object()) fail("bad-request", "profile must be an object", "profile");
  for (const auto& [key, value] : doc.items()) {
    auto dim = parse_dimension(key);
    if (!dim) fail("unknown-dimension", "unknown profile dimension '" + key + "'", "profile." + key);
    if (!value.is_string()) fail("bad-request", "profile text must be a string", "profile." + key);
    profile[*dim] = value.get<std::string>();
  }
  return profile;
}

Document profile_document(const ProfileText& profile) {
  Document doc = Document::object();
  for (const auto& [dim, text] : profile) doc[std::string(to_string(dim))] = text;
  return doc;
}

// Shape parsing only; range checks belong to check_choices.
void parse_choices_and_metadata(const Document& doc, ChoiceMap& choices, VentureMetadata& meta,
                                std::vector<Issue>& issues) {
  const auto& c = require(doc, "choices");
  if (!c.is_object()) fail("bad-request", "choices must be an object", "choices");
  for (const auto& [element, choice] : c.items()) {
    if (!choice.is_string()) {
      issues.push_back({"unknown-choice", "choice for '" + element + "' must be a string",
                        "choices." + element});
      continue;
    }
    choices[element] = choice.get<std::string>();
  }
  const auto& m = require(doc, "metadata");
  meta.team_size = require_int(m, "team_size");
  meta.venture_age_months = require_int(m, "venture_age_months");
  meta.industry = require_string(m, "industry");
}

}  // namespace

std::string_view to_string(Dimension d) { return kDimensionNames[static_cast<std::size_t>(d)]; }

std::optional<Dimension> parse_dimension(std::string_view s) {
  for (std::size_t i = 0; i < kDimensionNames.size(); ++i)
    if (kDimensionNames[i] == s) return static_cast<Dimension>(i);
  return std::nullopt;
}

std::optional<std::size_t> ElementDef::choice_index(std::string_view choice) const {
  auto it = std::find(choices.begin(), choices.end(), choice);
  if (it == choices.end()) return std::nullopt;
  return static_cast<std::size_t>(it - choices.begin());
}

PatternCatalog::PatternCatalog(std::string version, std::vector<ElementDef> elements,
                               std::vector<std::string> industries)
    : version_(std::move(version)), elements_(std::move(elements)), industries_(std::move(industries)) {
  std::vector<Issue> issues;
  if (version_.empty()) issues.push_back({"invalid-catalog", "catalog_version is empty", "catalog_version"});
  std::set<std::string> ids;
  for (const auto& e : elements_) {
    if (!ids.insert(e.id).second)
      issues.push_back({"invalid-catalog", "duplicate element '" + e.id + "'", "elements." + e.id});
    if (e.choices.size() < 2)
      issues.push_back({"invalid-catalog", "element '" + e.id + "' needs at least two choices",
                        "elements." + e.id});
    std::set<std::string> seen(e.choices.begin(), e.choices.end());
    if (seen.size() != e.choices.size())
      issues.push_back({"invalid-catalog", "duplicate choice in '" + e.id + "'", "elements." + e.id});
  }
  std::set<std::string> ind(industries_.begin(), industries_.end());
  if (ind.size() != industries_.size())
    issues.push_back({"invalid-catalog", "duplicate industry", "industries"});
  if (!issues.empty()) throw Error(std::move(issues));
}

PatternCatalog PatternCatalog::from_document(const Document& doc) {
  std::vector<ElementDef> elements;
  const auto& list = require(doc, "elements");
  if (!list.is_array()) fail("invalid-catalog", "elements must be a list", "elements");
  for (const auto& e : list) {
    ElementDef def;
    def.id = require_string(e, "id");
    auto dim = parse_dimension(require_string(e, "dimension"));
    if (!dim) fail("invalid-catalog", "element '" + def.id + "' has an unknown dimension", "elements." + def.id);
    def.dimension = *dim;
    def.display_name = optional_string(e, "name", def.id);
    for (const auto& c : require(e, "choices")) def.choices.push_back(c.get<std::string>());
    elements.push_back(std::move(def));
  }
  std::vector<std::string> industries;
  if (doc.contains("industries"))
    for (const auto& i : doc.at("industries")) industries.push_back(i.get<std::string>());
  return PatternCatalog(require_string(doc, "catalog_version"), std::move(elements), std::move(industries));
}

PatternCatalog PatternCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("io", "cannot open pattern catalog " + path.string());
  return from_document(Document::parse(in));
}

Document PatternCatalog::to_document() const {
  Document elements = Document::array();
  for (const auto& e : elements_)
    elements.push_back({{"id", e.id},
                        {"dimension", to_string(e.dimension)},
                        {"name", e.display_name},
                        {"choices", e.choices}});
  return {{"catalog_version", version_}, {"elements", elements}, {"industries", industries_}};
}

const ElementDef* PatternCatalog::find(std::string_view element_id) const {
  auto idx = element_index(element_id);
  return idx ? &elements_[*idx] : nullptr;
}

std::optional<std::size_t> PatternCatalog::element_index(std::string_view element_id) const {
  for (std::size_t i = 0; i < elements_.size(); ++i)
    if (elements_[i].id == element_id) return i;
  return std::nullopt;
}

bool PatternCatalog::accepts_industry(std::string_view industry) const {
  return industries_.empty() || industry_index(industry).has_value();
}

std::optional<std::size_t> PatternCatalog::industry_index(std::string_view industry) const {
  auto it = std::find(industries_.begin(), industries_.end(), industry);
  if (it == industries_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - industries_.begin());
}

std::size_t PatternCatalog::indicator_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : elements_) n += e.choices.size();
  return n;
}

Document to_document(const BusinessModelVersion& v) {
  Document doc = {{"venture_id", v.venture_id},
                  {"version_number", v.version_number},
                  {"parent_version", nullptr},
                  {"choices", v.choices},
                  {"metadata",
                   {{"team_size", v.metadata.team_size},
                    {"venture_age_months", v.metadata.venture_age_months},
                    {"industry", v.metadata.industry}}},
                  {"profile", profile_document(v.profile)},
                  {"created_at", v.created_at},
                  {"catalog_version", v.catalog_version}};
  if (v.parent_version) doc["parent_version"] = *v.parent_version;
  return doc;
}

ModelDraft parse_draft(const Document& doc) {
  ModelDraft draft;
  draft.venture_id = optional_string(doc, "venture_id");
  if (auto it = doc.find("base_version"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer()) fail("bad-request", "base_version must be an integer", "base_version");
    draft.base_version = it->get<int>();
  }
  std::vector<Issue> issues;
  parse_choices_and_metadata(doc, draft.choices, draft.metadata, issues);
  if (!issues.empty()) throw Error(std::move(issues));
  draft.profile = parse_profile(doc.value("profile", Document()));
  return draft;
}

std::vector<Issue> check_choices(const ChoiceMap& choices, const VentureMetadata& metadata,
                                 const PatternCatalog& catalog) {
  std::vector<Issue> issues;
  for (const auto& [element, choice] : choices) {
    const ElementDef* def = catalog.find(element);
    if (!def) {
      issues.push_back({"unknown-element", "element '" + element + "' is not in the catalog",
                        "choices." + element});
    } else if (!def->choice_index(choice)) {
      issues.push_back({"unknown-choice",
                        "choice '" + choice + "' is not allowed for element '" + element + "'",
                        "choices." + element});
    }
  }
  for (const auto& def : catalog.elements())
    if (!choices.contains(def.id))
      issues.push_back({"missing-element", "element '" + def.id + "' has no choice", "choices." + def.id});
  if (metadata.team_size < 0)
    issues.push_back({"negative-metadata", "team_size must be non-negative", "metadata.team_size"});
  if (metadata.venture_age_months < 0)
    issues.push_back({"negative-metadata", "venture_age_months must be non-negative",
                      "metadata.venture_age_months"});
  if (!catalog.accepts_industry(metadata.industry))
    issues.push_back({"unknown-industry", "industry '" + metadata.industry + "' is not in the catalog",
                      "metadata.industry"});
  return issues;
}

BusinessModelVersion validate_model(const Document& candidate, const PatternCatalog& catalog) {
  BusinessModelVersion v;
  std::vector<Issue> issues;
  v.venture_id = require_string(candidate, "venture_id");
  if (v.venture_id.empty()) issues.push_back({"bad-request", "venture_id is empty", "venture_id"});
  v.version_number = static_cast<int>(require_int(candidate, "version_number"));
  if (v.version_number < 1)
    issues.push_back({"bad-version", "version_number must be positive", "version_number"});
  if (auto it = candidate.find("parent_version"); it != candidate.end() && !it->is_null()) {
    if (!it->is_number_integer()) fail("bad-request", "parent_version must be an integer", "parent_version");
    v.parent_version = it->get<int>();
    if (*v.parent_version < 1 || *v.parent_version >= v.version_number)
      issues.push_back({"bad-version", "parent_version must be in [1, version_number)", "parent_version"});
  }
  v.catalog_version = optional_string(candidate, "catalog_version", catalog.version());
  if (v.catalog_version != catalog.version())
    issues.push_back({"catalog-mismatch",
                      "document uses catalog '" + v.catalog_version + "', expected '" + catalog.version() + "'",
                      "catalog_version"});
  v.created_at = optional_string(candidate, "created_at");
  parse_choices_and_metadata(candidate, v.choices, v.metadata, issues);
  v.profile = parse_profile(candidate.value("profile", Document()));
  auto more = check_choices(v.choices, v.metadata, catalog);
  issues.insert(issues.end(), more.begin(), more.end());
  if (!issues.empty()) throw Error(std::move(issues));
  return v;
}

BusinessModelVersion new_version(const ModelDraft& draft, const BusinessModelVersion* latest,
                                 const PatternCatalog& catalog, std::string created_at) {
  if (latest && latest->venture_id != draft.venture_id)
    fail("different-ventures", "latest version belongs to another venture", "venture_id");
  if (draft.base_version) {
    if (!latest || *draft.base_version != latest->version_number)
      fail("stale-base",
           "base version " + std::to_string(*draft.base_version) + " is not the venture's latest version",
           "base_version");
  } else if (latest) {
    fail("stale-base", "a revision must cite the latest version " + std::to_string(latest->version_number),
         "base_version");
  }
  auto issues = check_choices(draft.choices, draft.metadata, catalog);
  if (!issues.empty()) throw Error(std::move(issues));

  BusinessModelVersion v;
  v.venture_id = draft.venture_id;
  v.version_number = latest ? latest->version_number + 1 : 1;
  if (latest) v.parent_version = latest->version_number;
  v.choices = draft.choices;
  v.metadata = draft.metadata;
  v.profile = draft.profile;
  v.created_at = std::move(created_at);
  v.catalog_version = catalog.version();
  return v;
}

FeatureVector encode(const BusinessModelVersion& version, const PatternCatalog& catalog) {
  if (version.catalog_version != catalog.version())
    fail("catalog-mismatch", "version was built against catalog '" + version.catalog_version + "'",
         "catalog_version");
  FeatureVector fv;
  fv.schema_id = catalog.version();
  fv.values.reserve(catalog.feature_count());
  for (const auto& def : catalog.elements()) {
    auto it = version.choices.find(def.id);
    if (it == version.choices.end())
      fail("missing-element", "element '" + def.id + "' has no choice", "choices." + def.id);
    auto idx = def.choice_index(it->second);
    if (!idx) fail("unknown-choice", "choice '" + it->second + "' not allowed", "choices." + def.id);
    for (std::size_t c = 0; c < def.choices.size(); ++c) fv.values.push_back(c == *idx ? 1.0 : 0.0);
  }
  fv.values.push_back(static_cast<double>(version.metadata.team_size));
  fv.values.push_back(static_cast<double>(version.metadata.venture_age_months));
  if (catalog.metadata_count() == 3) {
    auto idx = catalog.industry_index(version.metadata.industry);
    if (!idx) fail("unknown-industry", "industry not in catalog", "metadata.industry");
    fv.values.push_back(static_cast<double>(*idx));
  }
  return fv;
}

ChoiceMap decode_choices(const FeatureVector& features, const PatternCatalog& catalog) {
  if (features.schema_id != catalog.version() || features.values.size() != catalog.feature_count())
    fail("catalog-mismatch", "feature vector does not match catalog", "schema_id");
  ChoiceMap choices;
  std::size_t offset = 0;
  for (const auto& def : catalog.elements()) {
    std::optional<std::size_t> hot;
    for (std::size_t c = 0; c < def.choices.size(); ++c) {
      if (features.values[offset + c] == 1.0) {
        if (hot) fail("invalid-encoding", "block for '" + def.id + "' has several hot indicators", def.id);
        hot = c;
      }
    }
    if (!hot) fail("invalid-encoding", "block for '" + def.id + "' has no hot indicator", def.id);
    choices[def.id] = def.choices[*hot];
    offset += def.choices.size();
  }
  return choices;
}

std::vector<ChoiceChange> diff(const BusinessModelVersion& from, const BusinessModelVersion& to,
                               const PatternCatalog& catalog) {
  if (from.venture_id != to.venture_id)
    fail("different-ventures", "cannot diff versions of different ventures", "venture_id");
  if (from.catalog_version != to.catalog_version || from.catalog_version != catalog.version())
    fail("catalog-mismatch", "versions use different catalogs", "catalog_version");
  std::vector<ChoiceChange> changes;
  for (const auto& def : catalog.elements()) {
    auto a = from.choices.find(def.id);
    auto b = to.choices.find(def.id);
    std::string old_choice = a == from.choices.end() ? std::string() : a->second;
    std::string new_choice = b == to.choices.end() ? std::string() : b->second;
    if (old_choice != new_choice) changes.push_back({def.id, old_choice, new_choice});
  }
  return changes;
}

}  // namespace hidss
