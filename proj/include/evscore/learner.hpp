#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace evscore::learner {

/// One feature row. SMOTE output rows carry the ids of the two originals
/// they interpolate.
struct Sample {
  std::string id;
  std::vector<double> features;
  int label = 1;
  std::optional<std::pair<std::string, std::string>> origin;

  bool synthetic() const { return origin.has_value(); }
  bool operator==(const Sample&) const = default;
};

class Dataset {
 public:
  Dataset() = default;
  /// Rows must share one feature length (equal to the schema size when a
  /// schema is given) and carry labels in 1..4.
  Dataset(std::vector<std::string> schema, std::vector<Sample> rows);

  const std::vector<std::string>& schema() const { return schema_; }
  const std::vector<Sample>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::size_t width() const { return width_; }
  const Sample& operator[](std::size_t i) const { return rows_[i]; }

  std::array<std::size_t, 4> class_counts() const;
  /// Rows at the given indices, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<std::string> schema_;
  std::vector<Sample> rows_;
  std::size_t width_ = 0;
};

struct SmoteParams {
  std::size_t k_neighbors = 5;
  std::uint64_t seed = 0;
};

/// Upsamples every present minority class to the majority count with
/// synthetic points x + u (nn - x), u ~ U[0,1], nn one of the k nearest
/// same-class rows. Originals come first, unchanged. A class needing
/// upsampling must have at least two rows; k shrinks to class size - 1.
Dataset smote(const Dataset& data, const SmoteParams& params);

struct ForestParams {
  std::size_t tree_count = 100;
  std::size_t max_depth = 5;
  std::size_t features_per_split = 0;  // 0 selects ceil(sqrt(F))
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const ForestParams& p);
void from_json(const nlohmann::json& j, ForestParams& p);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;
  int right = -1;
  int label = 1;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes);

  int predict(std::span<const double> x) const;
  /// Edges on the longest root-to-leaf path.
  std::size_t depth() const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

class ForestModel {
 public:
  ForestModel(ForestParams params, std::vector<std::string> schema, std::size_t width, std::vector<DecisionTree> trees);
  /// A model that always answers `label`.
  static ForestModel constant(int label, std::vector<std::string> schema, std::size_t width, ForestParams params = {});

  /// Majority vote over trees, ties to the lower label. Throws InputError
  /// when x does not match the training width.
  int predict(std::span<const double> x) const;
  std::array<int, 4> votes(std::span<const double> x) const;

  const std::vector<DecisionTree>& trees() const { return trees_; }
  const std::vector<std::string>& schema() const { return schema_; }
  const ForestParams& params() const { return params_; }
  std::size_t width() const { return width_; }
  bool is_constant() const { return constant_; }

  nlohmann::json to_json() const;
  static ForestModel from_json(const nlohmann::json& j);

 private:
  ForestParams params_;
  std::vector<std::string> schema_;
  std::size_t width_ = 0;
  std::vector<DecisionTree> trees_;
  bool constant_ = false;
};

/// Bootstrap-sampled Gini trees of bounded depth. A dataset with a single
/// label yields a constant model (and a warning on std::clog).
ForestModel train_forest(const Dataset& data, const ForestParams& params);

inline int predict(const ForestModel& model, std::span<const double> x) { return model.predict(x); }

}  // namespace evscore::learner
