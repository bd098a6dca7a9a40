#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "evscore/errors.hpp"
#include "evscore/learner.hpp"

using namespace evscore;
using namespace evscore::learner;

namespace {

// Integer-valued rows shaped like rubric features, class centres apart.
Dataset class_blobs(const std::array<std::size_t, 4>& counts, std::uint64_t seed, double spread = 1.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  std::vector<Sample> rows;
  for (int label = 1; label <= 4; ++label) {
    for (std::size_t i = 0; i < counts[label - 1]; ++i) {
      Sample s;
      s.id = "r" + std::to_string(label) + "-" + std::to_string(i);
      s.label = label;
      s.features = {std::round(label + noise(rng)), std::round(2 * label + noise(rng)), std::round(noise(rng)),
                    std::round(100 + 30 * label + 10 * noise(rng))};
      rows.push_back(std::move(s));
    }
  }
  return Dataset({"a", "b", "c", "d"}, std::move(rows));
}

double sq(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Checks every synthetic row of `out` against the SMOTE contract.
void check_smote(const Dataset& in, const Dataset& out, std::size_t k) {
  std::map<std::string, const Sample*> by_id;
  for (const auto& r : in.rows()) by_id[r.id] = &r;
  // Originals first, unchanged.
  for (std::size_t i = 0; i < in.size(); ++i) CHECK(out[i] == in[i]);
  std::set<std::string> ids;
  for (const auto& r : out.rows()) CHECK(ids.insert(r.id).second);
  for (std::size_t i = in.size(); i < out.size(); ++i) {
    const auto& s = out[i];
    REQUIRE(s.synthetic());
    const auto& x = *by_id.at(s.origin->first);
    const auto& nn = *by_id.at(s.origin->second);
    CHECK(x.label == s.label);
    CHECK(nn.label == s.label);
    CHECK(x.id != nn.id);
    // Inside the pair's bounding box, and on the segment.
    std::size_t widest = 0;
    for (std::size_t f = 0; f < s.features.size(); ++f) {
      CHECK(s.features[f] >= std::min(x.features[f], nn.features[f]));
      CHECK(s.features[f] <= std::max(x.features[f], nn.features[f]));
      if (std::abs(nn.features[f] - x.features[f]) > std::abs(nn.features[widest] - x.features[widest])) widest = f;
    }
    double span = nn.features[widest] - x.features[widest];
    double u = span == 0 ? 0 : (s.features[widest] - x.features[widest]) / span;
    for (std::size_t f = 0; f < s.features.size(); ++f) {
      CHECK(s.features[f] == doctest::Approx(x.features[f] + u * (nn.features[f] - x.features[f])).epsilon(1e-9));
    }
    // nn is among the k nearest same-class rows of x.
    std::vector<double> d;
    for (const auto& r : in.rows()) {
      if (r.label == x.label && r.id != x.id) d.push_back(sq(r.features, x.features));
    }
    std::sort(d.begin(), d.end());
    std::size_t kk = std::min(k, d.size());
    CHECK(sq(nn.features, x.features) <= d[kk - 1]);
  }
}

}  // namespace

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(Dataset({"a"}, {{"x", {1.0, 2.0}, 1, std::nullopt}}), InputError);
  CHECK_THROWS_AS(Dataset({}, {{"x", {1.0}, 1, std::nullopt}, {"y", {1.0, 2.0}, 1, std::nullopt}}), InputError);
  CHECK_THROWS_AS(Dataset({}, {{"x", {1.0}, 5, std::nullopt}}), InputError);
  Dataset d({}, {{"x", {1.0}, 2, std::nullopt}, {"y", {3.0}, 4, std::nullopt}});
  CHECK(d.class_counts() == std::array<std::size_t, 4>{0, 1, 0, 1});
  std::vector<std::size_t> idx = {1};
  CHECK(d.subset(idx)[0].id == "y");
}

TEST_CASE("SMOTE balances Space class counts") {
  auto d = class_blobs({538, 789, 512, 237}, 1);
  auto out = smote(d, {5, 11});
  CHECK(out.class_counts() == std::array<std::size_t, 4>{789, 789, 789, 789});
  CHECK(out.size() == 4 * 789);
  check_smote(d, out, 5);
  // Deterministic under the seed.
  CHECK(smote(d, {5, 11}).rows() == out.rows());
}

TEST_CASE("SMOTE edge cases") {
  auto balanced = class_blobs({10, 10, 10, 10}, 2);
  CHECK(smote(balanced, {5, 1}).rows() == balanced.rows());

  // k shrinks to class size - 1.
  auto small = class_blobs({30, 3, 0, 2}, 3);
  auto out = smote(small, {5, 1});
  CHECK(out.class_counts() == std::array<std::size_t, 4>{30, 30, 0, 30});
  check_smote(small, out, 5);

  CHECK_THROWS_AS(smote(class_blobs({10, 1, 0, 0}, 4), {5, 1}), InputError);
  CHECK_THROWS_AS(smote(class_blobs({10, 2, 0, 0}, 4), {0, 1}), InputError);
}

TEST_CASE("forest separates blobs and respects depth") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.5);
  std::vector<Sample> rows;
  for (int i = 0; i < 200; ++i) {
    int label = i % 2 == 0 ? 1 : 3;
    double c = label == 1 ? -2.0 : 2.0;
    rows.push_back({"p" + std::to_string(i), {c + g(rng), c + g(rng), g(rng)}, label, std::nullopt});
  }
  Dataset d({"x", "y", "z"}, rows);
  ForestParams p;
  p.seed = 9;
  auto m = train_forest(d, p);
  CHECK(m.trees().size() == 100);
  std::size_t correct = 0;
  for (const auto& r : d.rows()) correct += m.predict(r.features) == r.label;
  CHECK(static_cast<double>(correct) / d.size() >= 0.95);

  auto blobs = class_blobs({150, 200, 120, 60}, 6);
  for (std::size_t depth : {1, 3, 5}) {
    ForestParams q;
    q.max_depth = depth;
    q.tree_count = 25;
    q.seed = 3;
    auto f = train_forest(blobs, q);
    for (const auto& t : f.trees()) CHECK(t.depth() <= depth);
  }
  auto again = train_forest(d, p);
  CHECK(again.to_json() == m.to_json());
}

TEST_CASE("prediction is a per-tree vote with ties to the lower label") {
  auto d = class_blobs({100, 140, 90, 40}, 7, 3.0);
  ForestParams p;
  p.tree_count = 31;
  p.seed = 4;
  auto m = train_forest(d, p);

  std::vector<DecisionTree> reversed(m.trees().rbegin(), m.trees().rend());
  ForestModel r(m.params(), m.schema(), m.width(), reversed);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5, 250);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> x = {u(rng) / 20, u(rng) / 20, u(rng) / 50, u(rng)};
    std::array<int, 4> tally{};
    for (const auto& t : m.trees()) ++tally[t.predict(x) - 1];
    int want = 1;
    for (int k = 2; k <= 4; ++k) {
      if (tally[k - 1] > tally[want - 1]) want = k;
    }
    CHECK(m.predict(x) == want);
    CHECK(r.predict(x) == want);  // tree order does not matter
  }

  // Hand-built tie: two trees voting 3 and 2.
  DecisionTree three({{-1, 0, -1, -1, 3}});
  DecisionTree two({{-1, 0, -1, -1, 2}});
  ForestModel tie({}, {"a"}, 1, {three, two});
  std::vector<double> x = {0.0};
  CHECK(tie.predict(x) == 2);

  auto c = ForestModel::constant(3, {"a", "b"}, 2);
  std::vector<double> y = {1.0, 2.0};
  CHECK(c.predict(y) == 3);
  CHECK_THROWS_AS(m.predict(y), InputError);
}

TEST_CASE("single-class data gives a constant model") {
  auto d = class_blobs({0, 20, 0, 0}, 8);
  auto m = train_forest(d, {});
  CHECK(m.is_constant());
  CHECK(m.predict(d[0].features) == 2);
}

TEST_CASE("forest serialization round-trips") {
  auto d = class_blobs({40, 60, 30, 20}, 9);
  ForestParams p;
  p.tree_count = 10;
  p.seed = 1;
  auto m = train_forest(d, p);
  auto back = ForestModel::from_json(m.to_json());
  CHECK(back.to_json() == m.to_json());
  CHECK(back.schema() == m.schema());
  for (const auto& r : d.rows()) CHECK(back.predict(r.features) == m.predict(r.features));
  auto j = m.to_json();
  j["kind"] = "svm";
  CHECK_THROWS_AS(ForestModel::from_json(j), InputError);
}
