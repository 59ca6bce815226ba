#include "hidss/cart.hpp"

#include <algorithm>
#include <numeric>

#include "hidss/errors.hpp"

namespace hidss {

namespace {

constexpr std::array<std::string_view, 2> kMilestoneNames = {"survival", "series_a"};
constexpr std::array<std::string_view, 2> kSourceNames = {"crowd", "machine"};

using Wide = __int128;

// Split quality as the exact fraction num/den where
//   num/den = (pL^2 + qL^2) / nL + (pR^2 + qR^2) / nR.
// Larger is better; it is the parent's weighted child purity times n.
struct SplitScore {
  Wide num = 0;
  Wide den = 1;

  static SplitScore of(std::size_t pos_left, std::size_t n_left, std::size_t pos_right, std::size_t n_right) {
    auto sq = [](std::size_t p, std::size_t n) {
      Wide a = static_cast<Wide>(p), b = static_cast<Wide>(n - p);
      return a * a + b * b;
    };
    Wide nl = static_cast<Wide>(n_left), nr = static_cast<Wide>(n_right);
    return {sq(pos_left, n_left) * nr + sq(pos_right, n_right) * nl, nl * nr};
  }

  bool better_than(const SplitScore& o) const { return num * o.den > o.num * den; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct Candidate {
  int feature = -1;
  double threshold = 0.0;
  SplitScore score;
};

class Builder {
 public:
  Builder(const LabeledDataset& data, const CartParams& params, std::size_t feature_count)
      : data_(data), params_(params), feature_count_(feature_count) {}

  int build(std::vector<std::size_t> rows, int depth) {
    std::size_t positive = 0;
    for (auto r : rows) positive += data_.rows[r].label ? 1 : 0;
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back({-1, 0.0, -1, -1, positive, rows.size()});

    auto split = best_split(rows, positive, depth);
    if (!split) return index;

    std::vector<std::size_t> left, right;
    for (auto r : rows)
      (data_.rows[r].features[static_cast<std::size_t>(split->feature)] <= split->threshold ? left : right)
          .push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    nodes_[static_cast<std::size_t>(index)].feature = split->feature;
    nodes_[static_cast<std::size_t>(index)].threshold = split->threshold;
    int l = build(std::move(left), depth + 1);
    nodes_[static_cast<std::size_t>(index)].left = l;
    int r = build(std::move(right), depth + 1);
    nodes_[static_cast<std::size_t>(index)].right = r;
    return index;
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  std::optional<Candidate> best_split(const std::vector<std::size_t>& rows, std::size_t positive, int depth) const {
    const std::size_t n = rows.size();
    if (depth >= params_.max_depth) return std::nullopt;
    if (n < 2 * params_.min_leaf || n < 2) return std::nullopt;
    if (positive == 0 || positive == n) return std::nullopt;

    std::optional<Candidate> best;
    std::vector<std::pair<double, bool>> column(n);
    for (std::size_t f = 0; f < feature_count_; ++f) {
      for (std::size_t i = 0; i < n; ++i)
        column[i] = {data_.rows[rows[i]].features[f], data_.rows[rows[i]].label};
      std::sort(column.begin(), column.end());
      std::size_t pos_left = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        pos_left += column[i].second ? 1 : 0;
        if (column[i].first == column[i + 1].first) continue;
        std::size_t n_left = i + 1, n_right = n - n_left;
        if (n_left < params_.min_leaf || n_right < params_.min_leaf) continue;
        auto score = SplitScore::of(pos_left, n_left, positive - pos_left, n_right);
        if (!best || score.better_than(best->score)) {
          double lo = column[i].first, hi = column[i + 1].first;
          double mid = (lo + hi) / 2.0;
          if (!(mid < hi)) mid = lo;
          best = Candidate{static_cast<int>(f), mid, score};
        }
      }
    }
    if (!best) return std::nullopt;

    const double parent = static_cast<double>(positive * positive + (n - positive) * (n - positive)) /
                          static_cast<double>(n);
    const double decrease = (best->score.value() - parent) / static_cast<double>(n);
    if (decrease < params_.min_impurity_decrease) return std::nullopt;
    return best;
  }

  const LabeledDataset& data_;
  const CartParams& params_;
  std::size_t feature_count_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

std::string_view to_string(Milestone m) { return kMilestoneNames[static_cast<std::size_t>(m)]; }
std::string_view to_string(SignalSource s) { return kSourceNames[static_cast<std::size_t>(s)]; }

std::optional<Milestone> parse_milestone(std::string_view s) {
  for (std::size_t i = 0; i < kMilestoneNames.size(); ++i)
    if (kMilestoneNames[i] == s) return static_cast<Milestone>(i);
  return std::nullopt;
}

std::optional<SignalSource> parse_signal_source(std::string_view s) {
  for (std::size_t i = 0; i < kSourceNames.size(); ++i)
    if (kSourceNames[i] == s) return static_cast<SignalSource>(i);
  return std::nullopt;
}

std::size_t LabeledDataset::positives() const noexcept {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.label; }));
}

double gini_impurity(std::size_t positive, std::size_t total) {
  if (total == 0) return 0.0;
  double p = static_cast<double>(positive) / static_cast<double>(total);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

TreeModel::TreeModel(std::vector<TreeNode> nodes, std::size_t feature_count, CartParams params,
                     Milestone milestone, SignalSource source, std::string schema_id, bool degenerate)
    : nodes_(std::move(nodes)),
      feature_count_(feature_count),
      params_(params),
      milestone_(milestone),
      source_(source),
      schema_id_(std::move(schema_id)),
      degenerate_(degenerate) {
  if (nodes_.empty()) fail("invalid-model", "a tree needs at least one node");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (node.is_leaf()) continue;
    auto valid_child = [&](int c) { return c > static_cast<int>(i) && c < static_cast<int>(nodes_.size()); };
    if (static_cast<std::size_t>(node.feature) >= feature_count_ || !valid_child(node.left) ||
        !valid_child(node.right))
      fail("invalid-model", "node " + std::to_string(i) + " has an invalid split or child index");
  }
}

std::size_t TreeModel::leaf_for(std::span<const double> features) const {
  if (features.size() != feature_count_)
    fail("schema-mismatch",
         "expected " + std::to_string(feature_count_) + " features, got " + std::to_string(features.size()),
         "features");
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    i = static_cast<std::size_t>(features[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                     : node.right);
  }
  return i;
}

double TreeModel::predict(std::span<const double> features) const {
  const auto& leaf = nodes_[leaf_for(features)];
  return smoothed_probability(leaf.positive, leaf.total);
}

int TreeModel::depth() const {
  std::vector<int> depth(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes_[i].is_leaf()) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

Document TreeModel::to_document() const {
  Document nodes = Document::array();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    Document node = {{"index", i}, {"positive", n.positive}, {"total", n.total}};
    if (n.is_leaf()) {
      node["leaf"] = true;
    } else {
      node["leaf"] = false;
      node["feature"] = n.feature;
      node["threshold"] = n.threshold;
      node["left"] = n.left;
      node["right"] = n.right;
    }
    nodes.push_back(std::move(node));
  }
  return {{"schema_id", schema_id_},
          {"feature_count", feature_count_},
          {"milestone", to_string(milestone_)},
          {"signal_source", to_string(source_)},
          {"degenerate", degenerate_},
          {"params",
           {{"max_depth", params_.max_depth},
            {"min_leaf", params_.min_leaf},
            {"min_impurity_decrease", params_.min_impurity_decrease}}},
          {"nodes", nodes}};
}

TreeModel TreeModel::from_document(const Document& doc) {
  std::vector<TreeNode> nodes;
  for (const auto& n : require(doc, "nodes")) {
    if (static_cast<std::size_t>(require_int(n, "index")) != nodes.size())
      fail("invalid-model", "nodes must be listed in index order", "nodes");
    TreeNode node;
    node.positive = static_cast<std::size_t>(require_int(n, "positive"));
    node.total = static_cast<std::size_t>(require_int(n, "total"));
    if (!require_bool(n, "leaf")) {
      node.feature = static_cast<int>(require_int(n, "feature"));
      node.threshold = require_number(n, "threshold");
      node.left = static_cast<int>(require_int(n, "left"));
      node.right = static_cast<int>(require_int(n, "right"));
    }
    nodes.push_back(node);
  }
  const auto& p = require(doc, "params");
  CartParams params{static_cast<int>(require_int(p, "max_depth")),
                    static_cast<std::size_t>(require_int(p, "min_leaf")),
                    require_number(p, "min_impurity_decrease")};
  auto milestone = parse_milestone(require_string(doc, "milestone"));
  auto source = parse_signal_source(require_string(doc, "signal_source"));
  if (!milestone || !source) fail("invalid-model", "unknown milestone or signal source");
  return TreeModel(std::move(nodes), static_cast<std::size_t>(require_int(doc, "feature_count")), params,
                   *milestone, *source, require_string(doc, "schema_id"), require_bool(doc, "degenerate"));
}

TreeModel train_cart(const LabeledDataset& data, const CartParams& params) {
  if (data.rows.empty()) fail("empty-data", "cannot train on an empty dataset", "rows");
  if (params.max_depth < 0 || params.min_leaf < 1)
    fail("invalid-params", "max_depth must be >= 0 and min_leaf >= 1", "params");
  const std::size_t feature_count = data.rows.front().features.size();
  for (std::size_t i = 0; i < data.rows.size(); ++i)
    if (data.rows[i].features.size() != feature_count)
      fail("schema-mismatch", "row " + std::to_string(i) + " has a different feature count", "rows");

  std::vector<std::size_t> rows(data.rows.size());
  std::iota(rows.begin(), rows.end(), 0);
  Builder builder(data, params, feature_count);
  builder.build(std::move(rows), 0);

  std::size_t positive = data.positives();
  bool degenerate = positive == 0 || positive == data.rows.size();
  return TreeModel(builder.take(), feature_count, params, data.milestone, data.source, data.schema_id, degenerate);
}

}  // namespace hidss
