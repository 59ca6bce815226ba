#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hidss/canonical.hpp"
#include "hidss/errors.hpp"

namespace hidss {

/// The four value dimensions every business model element belongs to.
enum class Dimension { value_proposition, value_delivery, value_creation, value_capture };

inline constexpr std::array<Dimension, 4> kDimensions = {
    Dimension::value_proposition, Dimension::value_delivery, Dimension::value_creation,
    Dimension::value_capture};

std::string_view to_string(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view s);

struct ElementDef {
  std::string id;
  Dimension dimension = Dimension::value_proposition;
  std::string display_name;
  std::vector<std::string> choices;

  std::optional<std::size_t> choice_index(std::string_view choice) const;
};

/// Ordered catalog of business model elements and their allowed design
/// choices. Element order is part of the encoding contract.
class PatternCatalog {
 public:
  PatternCatalog() = default;
  PatternCatalog(std::string version, std::vector<ElementDef> elements,
                 std::vector<std::string> industries = {});

  static PatternCatalog from_document(const Document& doc);
  static PatternCatalog load(const std::filesystem::path& path);
  Document to_document() const;

  const std::string& version() const noexcept { return version_; }
  std::span<const ElementDef> elements() const noexcept { return elements_; }
  std::span<const std::string> industries() const noexcept { return industries_; }

  const ElementDef* find(std::string_view element_id) const;
  std::optional<std::size_t> element_index(std::string_view element_id) const;
  /// Accepts anything when the catalog declares no industry list.
  bool accepts_industry(std::string_view industry) const;
  std::optional<std::size_t> industry_index(std::string_view industry) const;

  /// Sum of choice counts over all elements.
  std::size_t indicator_count() const noexcept;
  /// team size, venture age, and industry ordinal when industries are declared.
  std::size_t metadata_count() const noexcept { return industries_.empty() ? 2 : 3; }
  std::size_t feature_count() const noexcept { return indicator_count() + metadata_count(); }

 private:
  std::string version_;
  std::vector<ElementDef> elements_;
  std::vector<std::string> industries_;
};

/// element-id -> choice-id
using ChoiceMap = std::map<std::string, std::string>;
/// Free-text startup profile, one entry per value dimension.
using ProfileText = std::map<Dimension, std::string>;

struct VentureMetadata {
  std::int64_t team_size = 0;
  std::int64_t venture_age_months = 0;
  std::string industry;

  friend bool operator==(const VentureMetadata&, const VentureMetadata&) = default;
};

struct BusinessModelVersion {
  std::string venture_id;
  int version_number = 0;
  std::optional<int> parent_version;
  ChoiceMap choices;
  VentureMetadata metadata;
  ProfileText profile;
  std::string created_at;
  std::string catalog_version;

  friend bool operator==(const BusinessModelVersion&, const BusinessModelVersion&) = default;
};

Document to_document(const BusinessModelVersion& version);

/// Entrepreneur input for a new revision; version numbering is assigned by
/// `new_version`.
struct ModelDraft {
  std::string venture_id;
  std::optional<int> base_version;
  ChoiceMap choices;
  VentureMetadata metadata;
  ProfileText profile;
};

ModelDraft parse_draft(const Document& doc);

/// Collects every choice/metadata violation against the catalog.
std::vector<Issue> check_choices(const ChoiceMap& choices, const VentureMetadata& metadata,
                                 const PatternCatalog& catalog);

/// Parses and fully validates a business model document. Throws `Error`
/// listing every violation.
BusinessModelVersion validate_model(const Document& candidate, const PatternCatalog& catalog);

/// Creates the next version in a venture's linear history. `latest` is the
/// venture's current head (null for a venture without versions).
BusinessModelVersion new_version(const ModelDraft& draft, const BusinessModelVersion* latest,
                                 const PatternCatalog& catalog, std::string created_at);

struct FeatureVector {
  std::vector<double> values;
  std::string schema_id;
};

/// One-hot indicators over (element, choice) in catalog order followed by
/// the numeric metadata.
FeatureVector encode(const BusinessModelVersion& version, const PatternCatalog& catalog);

/// Inverse of the indicator blocks of `encode`.
ChoiceMap decode_choices(const FeatureVector& features, const PatternCatalog& catalog);

struct ChoiceChange {
  std::string element_id;
  std::string old_choice;
  std::string new_choice;

  friend bool operator==(const ChoiceChange&, const ChoiceChange&) = default;
};

std::vector<ChoiceChange> diff(const BusinessModelVersion& from, const BusinessModelVersion& to,
                               const PatternCatalog& catalog);

}  // namespace hidss
