#include "evscore/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "evscore/errors.hpp"
#include "evscore/hash.hpp"

namespace evscore::eval {

void LabelPairs::validate() const {
  if (a.size() != b.size()) throw InputError("label lists differ in length");
  if (a.empty()) throw InputError("label lists are empty");
  for (const auto* v : {&a, &b})
    for (int x : *v)
      if (x < 1 || x > kScoreLevels) throw InputError("label " + std::to_string(x) + " outside 1..4");
}

ConfusionMatrix confusion_matrix(const LabelPairs& p) {
  p.validate();
  ConfusionMatrix m{};
  for (std::size_t i = 0; i < p.a.size(); ++i) ++m[static_cast<std::size_t>(p.a[i] - 1)][static_cast<std::size_t>(p.b[i] - 1)];
  return m;
}

namespace {

struct Marginals {
  std::array<double, kScoreLevels> row{};
  std::array<double, kScoreLevels> col{};
  double n = 0;
};

Marginals marginals(const ConfusionMatrix& m) {
  Marginals g;
  for (std::size_t i = 0; i < kScoreLevels; ++i) {
    for (std::size_t j = 0; j < kScoreLevels; ++j) {
      auto c = static_cast<double>(m[i][j]);
      g.row[i] += c;
      g.col[j] += c;
      g.n += c;
    }
  }
  return g;
}

}  // namespace

double cohen_kappa(const LabelPairs& p) {
  auto m = confusion_matrix(p);
  auto g = marginals(m);
  double po = 0, pe = 0;
  for (std::size_t i = 0; i < kScoreLevels; ++i) {
    po += static_cast<double>(m[i][i]) / g.n;
    pe += (g.row[i] / g.n) * (g.col[i] / g.n);
  }
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

double qwk(const LabelPairs& p) {
  auto m = confusion_matrix(p);
  auto g = marginals(m);
  constexpr double denom = (kScoreLevels - 1) * (kScoreLevels - 1);
  double observed = 0, expected = 0;
  for (std::size_t i = 0; i < kScoreLevels; ++i) {
    for (std::size_t j = 0; j < kScoreLevels; ++j) {
      double d = static_cast<double>(i) - static_cast<double>(j);
      double w = d * d / denom;
      observed += w * static_cast<double>(m[i][j]);
      expected += w * g.row[i] * g.col[j] / g.n;
    }
  }
  if (expected == 0.0) {
    bool identical = p.a == p.b;
    if (!identical) std::clog << "warning: QWK undefined (constant labels); reporting 0\n";
    return identical ? 1.0 : 0.0;
  }
  return 1.0 - observed / expected;
}

TTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("paired t-test: score lists differ in length");
  if (a.size() < 2) throw InputError("paired t-test: need at least two paired units");
  const auto n = static_cast<double>(a.size());
  double mean = 0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  TTest r;
  r.df = n - 1;
  double sd = std::sqrt(ss / r.df);
  if (sd == 0.0) {
    r.t = 0;
    r.p = mean == 0.0 ? 1.0 : 0.0;
    if (mean != 0.0) std::clog << "warning: paired differences have zero variance; reporting p = 0\n";
    return r;
  }
  r.t = mean / (sd / std::sqrt(n));
  boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw InputError("need at least 2 folds");
  std::array<std::vector<std::size_t>, kScoreLevels> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i] - 1)].push_back(i);
  std::vector<std::size_t> fold(labels.size(), 0);
  std::mt19937_64 rng(seed);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < kScoreLevels; ++k) {
    auto& idx = by_class[k];
    if (idx.empty()) continue;
    if (idx.size() < folds) {
      throw InputError("score class " + std::to_string(k + 1) + " has " + std::to_string(idx.size()) +
                       " essays, fewer than " + std::to_string(folds) + " folds");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < idx.size(); ++i) fold[idx[i]] = (offset + i) % folds;
    offset = (offset + idx.size()) % folds;
  }
  return fold;
}

namespace {

void finalize(EvalReport& r, const LabelPairs& pooled) {
  r.mean_qwk = r.unit_qwk.empty()
                   ? 0.0
                   : std::accumulate(r.unit_qwk.begin(), r.unit_qwk.end(), 0.0) / static_cast<double>(r.unit_qwk.size());
  r.kappa = cohen_kappa(pooled);
  // pooled.a holds references, pooled.b predictions.
  r.confusion = confusion_matrix(pooled);
}

std::vector<int> labels_of(const learner::Dataset& d) {
  std::vector<int> out;
  out.reserve(d.size());
  for (const auto& r : d.rows()) out.push_back(r.label);
  return out;
}

}  // namespace

EvalReport cross_validate(const learner::Dataset& data, const Pipeline& pipeline, const CvParams& params,
                          const FoldObserver& observer) {
  if (params.runs < 1) throw InputError("cross-validation needs at least one run");
  if (data.empty()) throw InputError("cross-validation on an empty dataset");
  const auto labels = labels_of(data);
  EvalReport report;
  report.protocol = "cv";
  LabelPairs pooled;
  for (std::size_t run = 0; run < params.runs; ++run) {
    auto fold_of = stratified_folds(labels, params.folds, mix_seed(params.seed, 2 * run));
    std::vector<int> predicted(data.size(), 0);
    for (std::size_t f = 0; f < params.folds; ++f) {
      std::vector<std::size_t> train_idx, test_idx;
      for (std::size_t i = 0; i < data.size(); ++i) (fold_of[i] == f ? test_idx : train_idx).push_back(i);
      FitRecord rec;
      auto model = pipeline.fit(data.subset(train_idx), mix_seed(params.seed, 1000 * (run + 1) + f), &rec);
      for (auto i : test_idx) predicted[i] = model->predict(data[i].features);
      if (observer) {
        FoldRecord fr{run, f, {}, {}, rec.seen_ids};
        for (auto i : test_idx) fr.test_ids.push_back(data[i].id);
        for (auto i : train_idx) fr.train_ids.push_back(data[i].id);
        observer(fr);
      }
    }
    LabelPairs run_pairs{labels, predicted};
    report.unit_qwk.push_back(qwk(run_pairs));
    pooled.a.insert(pooled.a.end(), labels.begin(), labels.end());
    pooled.b.insert(pooled.b.end(), predicted.begin(), predicted.end());
  }
  finalize(report, pooled);
  std::ostringstream fp;
  fp << "cv|" << pipeline.describe() << "|runs=" << params.runs << "|folds=" << params.folds << "|seed=" << params.seed
     << "|n=" << data.size();
  report.fingerprint = fingerprint(fp.str());
  return report;
}

EvalReport cross_validate(const corpus::EssayCollection& test, const Pipeline& pipeline, const CvParams& params,
                          const FoldObserver& observer) {
  return cross_validate(pipeline.featurize(test), pipeline, params, observer);
}

EvalReport cross_corpus(const corpus::EssayCollection& train, const corpus::EssayCollection& test,
                        const Pipeline& pipeline, const CrossCorpusParams& params, const FoldObserver& observer) {
  if (params.repeats < 1) throw InputError("cross-corpus evaluation needs at least one repeat");
  auto train_data = pipeline.featurize(train);
  auto test_data = pipeline.featurize(test);
  if (train_data.empty() || test_data.empty()) throw InputError("cross-corpus evaluation on an empty corpus");
  const auto labels = labels_of(test_data);
  EvalReport report;
  report.protocol = "cross-corpus";
  LabelPairs pooled;
  for (std::size_t r = 0; r < params.repeats; ++r) {
    FitRecord rec;
    auto model = pipeline.fit(train_data, mix_seed(params.seed, 1000 * (r + 1)), &rec);
    auto part_of = stratified_folds(labels, params.parts, mix_seed(params.seed, 2 * r));
    for (std::size_t p = 0; p < params.parts; ++p) {
      LabelPairs unit;
      FoldRecord fr{r, p, {}, {}, {}};
      for (std::size_t i = 0; i < test_data.size(); ++i) {
        if (part_of[i] != p) continue;
        unit.a.push_back(labels[i]);
        unit.b.push_back(model->predict(test_data[i].features));
        if (observer) fr.test_ids.push_back(test_data[i].id);
      }
      report.unit_qwk.push_back(qwk(unit));
      pooled.a.insert(pooled.a.end(), unit.a.begin(), unit.a.end());
      pooled.b.insert(pooled.b.end(), unit.b.begin(), unit.b.end());
      if (observer) {
        for (const auto& row : train_data.rows()) fr.train_ids.push_back(row.id);
        fr.seen_ids = rec.seen_ids;
        observer(fr);
      }
    }
  }
  finalize(report, pooled);
  std::ostringstream fp;
  fp << "cross-corpus|" << pipeline.describe() << "|parts=" << params.parts << "|repeats=" << params.repeats
     << "|seed=" << params.seed << "|train=" << train_data.size() << "|test=" << test_data.size();
  report.fingerprint = fingerprint(fp.str());
  return report;
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << "protocol: " << protocol << '\n';
  os << "fingerprint: " << fingerprint << '\n';
  os << "units: " << unit_qwk.size() << '\n';
  os << "mean_qwk: " << fixed(mean_qwk, 6) << '\n';
  os << "kappa: " << fixed(kappa, 6) << '\n';
  os << "unit_qwk:";
  for (double q : unit_qwk) os << ' ' << fixed(q, 6);
  os << '\n';
  os << "confusion (rows reference 1-4, columns predicted 1-4):\n";
  for (const auto& row : confusion) {
    for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "\t" : "  ") << row[j];
    os << '\n';
  }
  return os.str();
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  os << "protocol\tunit\tqwk\n";
  for (std::size_t i = 0; i < unit_qwk.size(); ++i) os << protocol << '\t' << i << '\t' << fixed(unit_qwk[i], 9) << '\n';
  return os.str();
}

}  // namespace evscore::eval
