#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "evscore/errors.hpp"
#include "evscore/eval.hpp"
#include "evscore/pipeline.hpp"
#include "evscore/synthetic.hpp"
#include "oracles.hpp"

using namespace evscore;
using namespace evscore::eval;

namespace {

// Reads the label back out of feature 0.
class OraclePredictor : public Predictor {
 public:
  int predict(std::span<const double> x) const override { return static_cast<int>(x[0]); }
};

class ConstantPredictor : public Predictor {
 public:
  int predict(std::span<const double>) const override { return 2; }
};

// Features are [label]; fit() hands back either the oracle or a constant.
class ToyPipeline : public Pipeline {
 public:
  explicit ToyPipeline(bool oracle) : oracle_(oracle) {}
  learner::Dataset featurize(const corpus::EssayCollection& essays) const override {
    std::vector<learner::Sample> rows;
    for (const auto& e : essays) rows.push_back({e.id, {static_cast<double>(e.label())}, e.label(), std::nullopt});
    return learner::Dataset({"label"}, rows);
  }
  std::unique_ptr<Predictor> fit(const learner::Dataset& train, std::uint64_t, FitRecord* rec) const override {
    if (rec) {
      for (const auto& r : train.rows()) rec->seen_ids.push_back(r.id);
    }
    if (oracle_) return std::make_unique<OraclePredictor>();
    return std::make_unique<ConstantPredictor>();
  }
  std::string describe() const override { return oracle_ ? "oracle" : "constant"; }

 private:
  bool oracle_;
};

corpus::EssayCollection labelled(const std::array<std::size_t, 4>& counts, const std::string& name) {
  std::vector<corpus::Essay> v;
  for (int k = 1; k <= 4; ++k) {
    for (std::size_t i = 0; i < counts[k - 1]; ++i) {
      corpus::Essay e;
      e.id = name + std::to_string(k) + "-" + std::to_string(i);
      e.text = "essay text";
      e.score_rater1 = k;
      v.push_back(e);
    }
  }
  return corpus::EssayCollection(name, v);
}

std::vector<int> random_labels(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> d(1, 4);
  std::vector<int> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("label pairs validation") {
  CHECK_THROWS_AS((LabelPairs{{1, 2}, {1}}.validate()), InputError);
  CHECK_THROWS_AS((LabelPairs{{}, {}}.validate()), InputError);
  CHECK_THROWS_AS((LabelPairs{{0}, {1}}.validate()), InputError);
  CHECK_THROWS_AS(qwk({{1, 5}, {1, 2}}), InputError);
}

TEST_CASE("confusion matrix") {
  auto m = confusion_matrix({{1, 2, 3, 4}, {1, 2, 3, 4}});
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) CHECK(m[i][j] == (i == j ? 1 : 0));
  }
  auto one = confusion_matrix({{1}, {4}});
  CHECK(one[0][3] == 1);
  std::int64_t total = 0;
  for (auto& row : one) total += std::accumulate(row.begin(), row.end(), std::int64_t{0});
  CHECK(total == 1);

  std::mt19937_64 rng(1);
  auto a = random_labels(rng, 300), b = random_labels(rng, 300);
  auto c = confusion_matrix({a, b});
  for (int k = 0; k < 4; ++k) {
    std::int64_t row = 0, col = 0;
    for (int j = 0; j < 4; ++j) {
      row += c[k][j];
      col += c[j][k];
    }
    CHECK(row == std::count(a.begin(), a.end(), k + 1));
    CHECK(col == std::count(b.begin(), b.end(), k + 1));
  }
}

TEST_CASE("kappa values") {
  CHECK(cohen_kappa({{1, 2, 3, 4}, {1, 2, 3, 4}}) == 1.0);
  // po = 0, pe = 4 * (1/4 * 1/4) = 1/4, kappa = -1/3
  CHECK(cohen_kappa({{1, 2, 3, 4}, {4, 3, 2, 1}}) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  CHECK(cohen_kappa({{2, 2}, {2, 2}}) == 1.0);

  std::mt19937_64 rng(12);
  auto a = random_labels(rng, 100000), b = random_labels(rng, 100000);
  CHECK(std::abs(cohen_kappa({a, b})) < 0.02);
}

TEST_CASE("qwk values") {
  CHECK(qwk({{1, 2, 3, 4}, {1, 2, 3, 4}}) == 1.0);
  std::vector<int> a = {1, 1, 2, 2}, b = {1, 2, 1, 2};
  CHECK(std::abs(qwk({a, b}) - oracle::qwk(a, b)) <= 1e-9);
  CHECK(qwk({a, b}) == doctest::Approx(0.0).epsilon(1e-12));  // independent marginals

  // Shifting one side away from identity lowers QWK.
  std::vector<int> x = {1, 2, 3, 1, 2, 3, 2, 1}, shifted = x;
  for (auto& v : shifted) ++v;
  CHECK(qwk({x, shifted}) < qwk({x, x}));

  // Degenerate: both sides constant.
  CHECK(qwk({{3, 3, 3}, {3, 3, 3}}) == 1.0);
  CHECK(qwk({{3, 3, 3}, {2, 2, 2}}) == 0.0);
  CHECK(qwk({{1, 2, 3}, {2, 2, 2}}) == 0.0);  // constant predictor
}

TEST_CASE("metrics agree with direct-formula oracles") {
  std::mt19937_64 rng(2025);
  std::uniform_int_distribution<std::size_t> len(1, 200);
  std::bernoulli_distribution copy(0.6);
  for (int i = 0; i < 300; ++i) {
    std::size_t n = len(rng);
    auto a = random_labels(rng, n), b = random_labels(rng, n);
    for (std::size_t j = 0; j < n; ++j) {
      if (copy(rng)) b[j] = a[j];
    }
    CHECK(std::abs(qwk({a, b}) - oracle::qwk(a, b)) <= 1e-9);
    CHECK(std::abs(cohen_kappa({a, b}) - oracle::cohen_kappa(a, b)) <= 1e-9);
    // Symmetry and permutation invariance.
    CHECK(std::abs(qwk({a, b}) - qwk({b, a})) <= 1e-12);
    CHECK(std::abs(cohen_kappa({a, b}) - cohen_kappa({b, a})) <= 1e-12);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> pa, pb;
    for (auto p : perm) {
      pa.push_back(a[p]);
      pb.push_back(b[p]);
    }
    CHECK(std::abs(qwk({a, b}) - qwk({pa, pb})) <= 1e-12);
  }
}

TEST_CASE("paired t-test") {
  std::vector<double> a = {0.6, 0.7, 0.65, 0.8};
  CHECK(paired_t_test(a, a).p == 1.0);
  CHECK(significance(a, a) == 1.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> x(100), y(100);
  for (int i = 0; i < 100; ++i) {
    x[i] = 0.5 + noise(rng);
    y[i] = x[i] + 0.2 + noise(rng);
  }
  CHECK(paired_t_test(y, x).p < 0.001);

  // t from its defining formula on the differences.
  std::vector<double> u = {0.61, 0.70, 0.64, 0.72, 0.69, 0.66}, v = {0.60, 0.66, 0.65, 0.70, 0.64, 0.61};
  std::vector<double> d;
  for (std::size_t i = 0; i < u.size(); ++i) d.push_back(u[i] - v[i]);
  double mean = std::accumulate(d.begin(), d.end(), 0.0) / d.size();
  double ss = 0;
  for (double e : d) ss += (e - mean) * (e - mean);
  double t = mean / std::sqrt(ss / (d.size() - 1) / d.size());
  auto r = paired_t_test(u, v);
  CHECK(r.t == doctest::Approx(t).epsilon(1e-12));
  CHECK(r.df == 5);

  // Differences built so t equals the tabulated two-sided 5% point for df = 9.
  const double t975 = 2.2621571628;
  std::vector<double> base(10, 0.0), diff = {1, -1, 1, -1, 1, -1, 1, -1, 1, -1};
  double s = std::sqrt(10.0 / 9.0);  // sample sd of the +-1 pattern
  for (auto& e : diff) e += t975 * s / std::sqrt(10.0);
  auto tab = paired_t_test(diff, base);
  CHECK(tab.t == doctest::Approx(t975).epsilon(1e-9));
  CHECK(tab.p == doctest::Approx(0.05).epsilon(1e-6));

  std::vector<double> c = {0.5, 0.6}, shifted = {0.6, 0.7};
  CHECK(paired_t_test(shifted, c).p == 0.0);  // zero-variance differences with a nonzero mean
  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1.0}, std::vector<double>{2.0}), InputError);
  CHECK_THROWS_AS(paired_t_test(c, std::vector<double>{1.0}), InputError);
}

TEST_CASE("stratified folds") {
  std::vector<int> labels;
  for (int k = 1; k <= 4; ++k) {
    for (int i = 0; i < 13 * k; ++i) labels.push_back(k);
  }
  auto f = stratified_folds(labels, 10, 5);
  for (int k = 1; k <= 4; ++k) {
    std::array<int, 10> per{};
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == k) ++per[f[i]];
    }
    CHECK(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()) <= 1);
  }
  CHECK(stratified_folds(labels, 10, 5) == f);
  std::vector<int> tiny = {1, 1, 1, 2, 2};
  CHECK_THROWS_AS(stratified_folds(tiny, 3, 1), InputError);
}

TEST_CASE("cross validation with oracle and constant pipelines") {
  auto test = labelled({30, 40, 25, 12}, "t");
  auto perfect = cross_validate(test, ToyPipeline(true), {10, 10, 1});
  CHECK(perfect.unit_qwk.size() == 10);
  CHECK(perfect.mean_qwk == 1.0);
  CHECK(perfect.kappa == 1.0);
  auto constant = cross_validate(test, ToyPipeline(false), {10, 10, 1});
  CHECK(constant.mean_qwk == 0.0);
  CHECK_THROWS_AS(cross_validate(labelled({30, 40, 25, 9}, "s"), ToyPipeline(true), {1, 10, 1}), InputError);
}

TEST_CASE("cross validation on planted evidence never leaks and is reproducible") {
  const auto& world = synthetic::village_world();
  synthetic::GeneratorParams gp;
  gp.graded = 400;
  gp.ungraded = 0;
  gp.seed = 31;
  auto g = synthetic::generate(world, gp);
  std::istringstream ts(synthetic::topic_list_text(world)), es(synthetic::example_list_text(world));
  auto topics = std::make_shared<const evidence::TopicList>(evidence::TopicList::parse(ts));
  auto examples = std::make_shared<const evidence::ExampleList>(evidence::ExampleList::parse(es, *topics));
  LearnerParams lp;
  lp.forest.tree_count = 30;
  EvidencePipeline pipeline(topics, examples, evidence::Matcher::exact(), {}, lp);

  std::size_t folds_seen = 0;
  auto check = [&](const FoldRecord& fr) {
    ++folds_seen;
    std::set<std::string> test(fr.test_ids.begin(), fr.test_ids.end());
    std::set<std::string> train(fr.train_ids.begin(), fr.train_ids.end());
    CHECK(test.size() + train.size() == g.essays.size());
    for (const auto& id : fr.train_ids) CHECK(test.count(id) == 0);
    for (const auto& id : fr.seen_ids) {
      CHECK(test.count(id) == 0);
      CHECK(train.count(id) == 1);
    }
  };
  auto r = cross_validate(g.essays, pipeline, {3, 10, 77}, check);
  CHECK(folds_seen == 30);
  CHECK(r.mean_qwk >= 0.8);
  double mean = std::accumulate(r.unit_qwk.begin(), r.unit_qwk.end(), 0.0) / r.unit_qwk.size();
  CHECK(std::abs(r.mean_qwk - mean) <= 1e-12);

  auto again = cross_validate(g.essays, pipeline, {3, 10, 77});
  CHECK(again.to_text() == r.to_text());
  CHECK(again.to_table() == r.to_table());
  auto other = cross_validate(g.essays, pipeline, {3, 10, 78});
  CHECK(other.fingerprint != r.fingerprint);
}

TEST_CASE("cross-corpus evaluation") {
  auto a = labelled({30, 40, 25, 12}, "a");
  auto b = labelled({50, 20, 20, 15}, "b");
  CHECK(cross_corpus(a, a, ToyPipeline(true), {10, 10, 3}).mean_qwk == 1.0);

  std::vector<std::vector<std::string>> parts;
  auto r = cross_corpus(a, b, ToyPipeline(true), {10, 2, 3}, [&](const FoldRecord& fr) {
    if (fr.run == 0) parts.push_back(fr.test_ids);
    CHECK(fr.train_ids.size() == a.size());
  });
  CHECK(r.unit_qwk.size() == 20);
  REQUIRE(parts.size() == 10);
  std::multiset<std::string> seen;
  for (const auto& p : parts) seen.insert(p.begin(), p.end());
  std::multiset<std::string> all;
  for (const auto& e : b) all.insert(e.id);
  CHECK(seen == all);  // disjoint parts covering the test corpus

  auto swapped = cross_corpus(b, a, ToyPipeline(false), {10, 2, 3});
  CHECK(swapped.unit_qwk.size() == 20);
  CHECK(swapped.protocol == "cross-corpus");
  CHECK(swapped.fingerprint != r.fingerprint);
}
