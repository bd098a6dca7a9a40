#include "evscore/learner.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>

#include "evscore/errors.hpp"
#include "evscore/hash.hpp"

namespace evscore::learner {

Dataset::Dataset(std::vector<std::string> schema, std::vector<Sample> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  width_ = !schema_.empty() ? schema_.size() : (rows_.empty() ? 0 : rows_.front().features.size());
  for (const auto& r : rows_) {
    if (r.features.size() != width_) {
      throw InputError("dataset row '" + r.id + "' has " + std::to_string(r.features.size()) + " features, expected " +
                       std::to_string(width_));
    }
    if (r.label < 1 || r.label > 4) throw InputError("dataset row '" + r.id + "' has label outside 1..4");
  }
}

std::array<std::size_t, 4> Dataset::class_counts() const {
  std::array<std::size_t, 4> c{};
  for (const auto& r : rows_) ++c[static_cast<std::size_t>(r.label - 1)];
  return c;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Sample> rows;
  rows.reserve(indices.size());
  for (auto i : indices) rows.push_back(rows_[i]);
  Dataset d;
  d.schema_ = schema_;
  d.rows_ = std::move(rows);
  d.width_ = width_;
  return d;
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

Dataset smote(const Dataset& data, const SmoteParams& params) {
  if (params.k_neighbors < 1) throw InputError("SMOTE k_neighbors must be >= 1");
  auto counts = data.class_counts();
  std::size_t majority = *std::max_element(counts.begin(), counts.end());

  std::vector<Sample> rows = data.rows();
  for (int label = 1; label <= 4; ++label) {
    std::size_t have = counts[static_cast<std::size_t>(label - 1)];
    if (have == 0 || have == majority) continue;
    if (have < 2) {
      throw InputError("SMOTE: class " + std::to_string(label) + " has " + std::to_string(have) +
                       " row; at least 2 are needed to interpolate");
    }
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data[i].label == label) members.push_back(i);
    const std::size_t k = std::min(params.k_neighbors, have - 1);

    // k nearest same-class neighbours of each member, ties to lower index.
    std::vector<std::vector<std::size_t>> neighbors(have);
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t a = 0; a < have; ++a) {
      dist.clear();
      for (std::size_t b = 0; b < have; ++b) {
        if (a == b) continue;
        dist.emplace_back(squared_distance(data[members[a]].features, data[members[b]].features), b);
      }
      std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
      for (std::size_t j = 0; j < k; ++j) neighbors[a].push_back(dist[j].second);
    }

    std::mt19937_64 rng(mix_seed(params.seed, static_cast<std::uint64_t>(label)));
    const std::size_t need = majority - have;
    // Every member seeds need/have points; a random subset seeds one more.
    std::vector<std::size_t> seeds;
    for (std::size_t r = 0; r < need / have; ++r)
      for (std::size_t a = 0; a < have; ++a) seeds.push_back(a);
    std::vector<std::size_t> extra(have);
    std::iota(extra.begin(), extra.end(), 0);
    std::shuffle(extra.begin(), extra.end(), rng);
    extra.resize(need % have);
    std::sort(extra.begin(), extra.end());
    seeds.insert(seeds.end(), extra.begin(), extra.end());

    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t n = 0; n < seeds.size(); ++n) {
      const auto& x = data[members[seeds[n]]];
      const auto& nn = data[members[neighbors[seeds[n]][pick(rng)]]];
      double u = unit(rng);
      Sample s;
      s.id = "smote:" + std::to_string(label) + ":" + std::to_string(n);
      s.label = label;
      s.origin = std::make_pair(x.id, nn.id);
      s.features.resize(x.features.size());
      for (std::size_t i = 0; i < x.features.size(); ++i) {
        double lo = std::min(x.features[i], nn.features[i]);
        double hi = std::max(x.features[i], nn.features[i]);
        s.features[i] = std::clamp(x.features[i] + u * (nn.features[i] - x.features[i]), lo, hi);
      }
      rows.push_back(std::move(s));
    }
  }
  return Dataset(data.schema(), std::move(rows));
}

void ForestParams::validate() const {
  if (tree_count < 1) throw InputError("tree_count must be >= 1");
  if (max_depth < 1) throw InputError("max_depth must be >= 1");
}

void to_json(nlohmann::json& j, const ForestParams& p) {
  j = nlohmann::json{{"tree_count", p.tree_count},
                     {"max_depth", p.max_depth},
                     {"features_per_split", p.features_per_split},
                     {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, ForestParams& p) {
  ForestParams d;
  p.tree_count = j.value("tree_count", d.tree_count);
  p.max_depth = j.value("max_depth", d.max_depth);
  p.features_per_split = j.value("features_per_split", d.features_per_split);
  p.seed = j.value("seed", d.seed);
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw InputError("decision tree without nodes");
  for (const auto& n : nodes_) {
    if (n.feature < 0) continue;
    auto size = static_cast<int>(nodes_.size());
    if (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size) {
      throw InputError("decision tree node has invalid children");
    }
  }
}

int DecisionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  for (;;) {
    const auto& n = nodes_[i];
    if (n.feature < 0) return n.label;
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
}

std::size_t DecisionTree::depth() const {
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const auto& n = nodes_[i];
    if (n.feature >= 0) {
      stack.emplace_back(static_cast<std::size_t>(n.left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(n.right), d + 1);
    }
  }
  return deepest;
}

ForestModel::ForestModel(ForestParams params, std::vector<std::string> schema, std::size_t width,
                         std::vector<DecisionTree> trees)
    : params_(params), schema_(std::move(schema)), width_(width), trees_(std::move(trees)) {
  if (trees_.empty()) throw InputError("forest without trees");
}

ForestModel ForestModel::constant(int label, std::vector<std::string> schema, std::size_t width, ForestParams params) {
  TreeNode leaf;
  leaf.label = label;
  ForestModel m(params, std::move(schema), width, {DecisionTree({leaf})});
  m.constant_ = true;
  return m;
}

std::array<int, 4> ForestModel::votes(std::span<const double> x) const {
  if (x.size() != width_) {
    throw InputError("feature vector has " + std::to_string(x.size()) + " values, model expects " +
                     std::to_string(width_));
  }
  std::array<int, 4> v{};
  for (const auto& t : trees_) ++v[static_cast<std::size_t>(t.predict(x) - 1)];
  return v;
}

int ForestModel::predict(std::span<const double> x) const {
  auto v = votes(x);
  // max_element returns the first maximum, i.e. the lower label on ties.
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()) + 1;
}

nlohmann::json ForestModel::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) {
    nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                   left = nlohmann::json::array(), right = nlohmann::json::array(), label = nlohmann::json::array();
    for (const auto& n : t.nodes()) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      label.push_back(n.label);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right}, {"label", label}});
  }
  return {{"kind", "random_forest"}, {"params", params_}, {"schema", schema_},
          {"width", width_},         {"constant", constant_}, {"trees", trees}};
}

ForestModel ForestModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "random_forest") throw InputError("not a random_forest model");
    std::vector<DecisionTree> trees;
    for (const auto& t : j.at("trees")) {
      auto feature = t.at("feature").get<std::vector<int>>();
      auto threshold = t.at("threshold").get<std::vector<double>>();
      auto left = t.at("left").get<std::vector<int>>();
      auto right = t.at("right").get<std::vector<int>>();
      auto label = t.at("label").get<std::vector<int>>();
      std::size_t n = feature.size();
      if (threshold.size() != n || left.size() != n || right.size() != n || label.size() != n) {
        throw InputError("tree node arrays differ in length");
      }
      std::vector<TreeNode> nodes(n);
      for (std::size_t i = 0; i < n; ++i) nodes[i] = {feature[i], threshold[i], left[i], right[i], label[i]};
      trees.emplace_back(std::move(nodes));
    }
    ForestModel m(j.at("params").get<ForestParams>(), j.at("schema").get<std::vector<std::string>>(),
                  j.at("width").get<std::size_t>(), std::move(trees));
    m.constant_ = j.value("constant", false);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed forest model: ") + e.what());
  }
}

namespace {

struct TreeBuilder {
  const Dataset& data;
  std::size_t max_depth;
  std::size_t mtry;
  std::mt19937_64 rng;
  std::vector<TreeNode> nodes;
  std::vector<std::size_t> features;  // permutation scratch

  static double gini(const std::array<std::size_t, 4>& c, std::size_t n) {
    if (n == 0) return 0;
    double s = 0;
    for (auto k : c) {
      double p = static_cast<double>(k) / static_cast<double>(n);
      s += p * p;
    }
    return 1.0 - s;
  }

  static int majority(const std::array<std::size_t, 4>& c) {
    return static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin()) + 1;
  }

  int build(std::vector<std::size_t>& rows, std::size_t depth) {
    std::array<std::size_t, 4> counts{};
    for (auto r : rows) ++counts[static_cast<std::size_t>(data[r].label - 1)];
    int node = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[static_cast<std::size_t>(node)].label = majority(counts);

    const std::size_t n = rows.size();
    const double parent = gini(counts, n);
    if (depth >= max_depth || n < 2 || parent == 0.0) return node;

    // Partial Fisher-Yates: the first mtry entries are this node's candidates.
    for (std::size_t i = 0; i < mtry; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, features.size() - 1);
      std::swap(features[i], features[pick(rng)]);
    }

    double best_impurity = parent;
    int best_feature = -1;
    double best_threshold = 0;
    std::vector<std::pair<double, int>> column(n);
    for (std::size_t c = 0; c < mtry; ++c) {
      auto f = features[c];
      for (std::size_t i = 0; i < n; ++i) column[i] = {data[rows[i]].features[f], data[rows[i]].label};
      std::sort(column.begin(), column.end());
      std::array<std::size_t, 4> left{};
      for (std::size_t i = 0; i + 1 < n; ++i) {
        ++left[static_cast<std::size_t>(column[i].second - 1)];
        if (column[i].first == column[i + 1].first) continue;
        std::array<std::size_t, 4> right{};
        for (std::size_t k = 0; k < 4; ++k) right[k] = counts[k] - left[k];
        std::size_t nl = i + 1, nr = n - nl;
        double impurity = (static_cast<double>(nl) * gini(left, nl) + static_cast<double>(nr) * gini(right, nr)) /
                          static_cast<double>(n);
        if (impurity < best_impurity - 1e-12) {
          best_impurity = impurity;
          best_feature = static_cast<int>(f);
          best_threshold = column[i].first + (column[i + 1].first - column[i].first) / 2.0;
          if (best_threshold >= column[i + 1].first) best_threshold = column[i].first;
        }
      }
    }
    if (best_feature < 0) return node;

    std::vector<std::size_t> lrows, rrows;
    for (auto r : rows) {
      (data[r].features[static_cast<std::size_t>(best_feature)] <= best_threshold ? lrows : rrows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    int l = build(lrows, depth + 1);
    int r = build(rrows, depth + 1);
    auto& self = nodes[static_cast<std::size_t>(node)];
    self.feature = best_feature;
    self.threshold = best_threshold;
    self.left = l;
    self.right = r;
    return node;
  }
};

}  // namespace

ForestModel train_forest(const Dataset& data, const ForestParams& params) {
  params.validate();
  if (data.empty()) throw InputError("train_forest: empty dataset");
  auto counts = data.class_counts();
  auto present = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  if (present < 2) {
    int label = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin()) + 1;
    std::clog << "warning: training data has a single label (" << label << "); using a constant classifier\n";
    return ForestModel::constant(label, data.schema(), data.width(), params);
  }
  const std::size_t F = data.width();
  std::size_t mtry = params.features_per_split;
  if (mtry == 0) mtry = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(F))));
  mtry = std::clamp<std::size_t>(mtry, 1, std::max<std::size_t>(F, 1));

  std::vector<DecisionTree> trees;
  trees.reserve(params.tree_count);
  for (std::size_t t = 0; t < params.tree_count; ++t) {
    TreeBuilder b{data, params.max_depth, mtry, std::mt19937_64(mix_seed(params.seed, t)), {}, {}};
    b.features.resize(F);
    std::iota(b.features.begin(), b.features.end(), 0);
    std::uniform_int_distribution<std::size_t> draw(0, data.size() - 1);
    std::vector<std::size_t> bag(data.size());
    for (auto& r : bag) r = draw(b.rng);
    if (F == 0) {
      b.nodes.push_back({});
      std::array<std::size_t, 4> c{};
      for (auto r : bag) ++c[static_cast<std::size_t>(data[r].label - 1)];
      b.nodes.back().label = TreeBuilder::majority(c);
    } else {
      b.build(bag, 0);
    }
    trees.emplace_back(std::move(b.nodes));
  }
  return ForestModel(params, data.schema(), F, std::move(trees));
}

}  // namespace evscore::learner
