#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hidss/canonical.hpp"

namespace hidss {

enum class Milestone { survival, series_a };
enum class SignalSource { crowd, machine };

inline constexpr std::array<Milestone, 2> kMilestones = {Milestone::survival, Milestone::series_a};
inline constexpr std::array<SignalSource, 2> kSignalSources = {SignalSource::crowd, SignalSource::machine};

std::string_view to_string(Milestone m);
std::string_view to_string(SignalSource s);
std::optional<Milestone> parse_milestone(std::string_view s);
std::optional<SignalSource> parse_signal_source(std::string_view s);

struct LabeledRow {
  std::vector<double> features;
  bool label = false;
};

struct LabeledDataset {
  std::vector<LabeledRow> rows;
  std::string schema_id;
  Milestone milestone = Milestone::survival;
  SignalSource source = SignalSource::machine;

  std::size_t positives() const noexcept;
};

struct CartParams {
  int max_depth = 6;
  std::size_t min_leaf = 5;
  double min_impurity_decrease = 1e-7;

  friend bool operator==(const CartParams&, const CartParams&) = default;
};

/// Pre-order node. Internal nodes route left iff features[feature] <= threshold.
/// Every node keeps the class counts of the training rows that reached it.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::size_t positive = 0;
  std::size_t total = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Laplace-smoothed class-1 probability: (positive + 1) / (total + 2).
inline double smoothed_probability(std::size_t positive, std::size_t total) {
  return (static_cast<double>(positive) + 1.0) / (static_cast<double>(total) + 2.0);
}

/// Gini impurity 1 - p^2 - q^2 of a node with the given class counts.
double gini_impurity(std::size_t positive, std::size_t total);

class TreeModel {
 public:
  TreeModel() = default;
  TreeModel(std::vector<TreeNode> nodes, std::size_t feature_count, CartParams params,
            Milestone milestone, SignalSource source, std::string schema_id, bool degenerate);

  double predict(std::span<const double> features) const;
  /// Index of the leaf the features route to.
  std::size_t leaf_for(std::span<const double> features) const;

  std::span<const TreeNode> nodes() const noexcept { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  int depth() const;
  std::size_t feature_count() const noexcept { return feature_count_; }
  const CartParams& params() const noexcept { return params_; }
  Milestone milestone() const noexcept { return milestone_; }
  SignalSource source() const noexcept { return source_; }
  const std::string& schema_id() const noexcept { return schema_id_; }
  /// True when the training data held a single class.
  bool degenerate() const noexcept { return degenerate_; }

  Document to_document() const;
  static TreeModel from_document(const Document& doc);

  friend bool operator==(const TreeModel&, const TreeModel&) = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t feature_count_ = 0;
  CartParams params_;
  Milestone milestone_ = Milestone::survival;
  SignalSource source_ = SignalSource::machine;
  std::string schema_id_;
  bool degenerate_ = false;
};

/// Greedy binary CART with Gini impurity. Candidate thresholds are
/// midpoints between consecutive distinct values; ties go to the lowest
/// feature index, then the lowest threshold. Throws empty-data and
/// schema-mismatch.
TreeModel train_cart(const LabeledDataset& data, const CartParams& params = {});

}  // namespace hidss
