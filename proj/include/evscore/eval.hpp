#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "evscore/corpus.hpp"
#include "evscore/learner.hpp"

namespace evscore::eval {

/// Parallel label lists on the 1..4 scale: (predicted, reference) or
/// (rater1, rater2).
struct LabelPairs {
  std::vector<int> a;
  std::vector<int> b;

  /// Equal, non-zero lengths and labels in 1..4; throws InputError.
  void validate() const;
};

constexpr int kScoreLevels = 4;

using ConfusionMatrix = std::array<std::array<std::int64_t, kScoreLevels>, kScoreLevels>;

/// Entry (i, j) counts pairs with a = i+1 and b = j+1.
ConfusionMatrix confusion_matrix(const LabelPairs& p);

/// Unweighted Cohen's kappa. When chance agreement is 1 (both sides the
/// same constant) the result is 1.
double cohen_kappa(const LabelPairs& p);

/// Quadratic weighted kappa with weights (i-j)^2/(K-1)^2, K = 4. When the
/// expected weighted disagreement is zero the result is 1 for identical
/// lists and 0 otherwise.
double qwk(const LabelPairs& p);

struct TTest {
  double t = 0;
  double df = 0;
  double p = 1;
};

/// Two-tailed paired t-test over matched evaluation units. With zero
/// variance of the differences, p is 1 for equal means and 0 otherwise.
TTest paired_t_test(std::span<const double> a, std::span<const double> b);
inline double significance(std::span<const double> a, std::span<const double> b) { return paired_t_test(a, b).p; }

/// A fitted scorer.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual int predict(std::span<const double> features) const = 0;
};

/// Every row id the learner consumed during one fit, including the
/// originals behind synthetic rows.
struct FitRecord {
  std::vector<std::string> seen_ids;
};

/// Feature extraction plus a training procedure, evaluated as a unit.
class Pipeline {
 public:
  virtual ~Pipeline() = default;
  virtual learner::Dataset featurize(const corpus::EssayCollection& essays) const = 0;
  virtual std::unique_ptr<Predictor> fit(const learner::Dataset& train, std::uint64_t seed,
                                         FitRecord* record = nullptr) const = 0;
  virtual std::string describe() const = 0;
};

struct CvParams {
  std::size_t runs = 10;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
};

struct CrossCorpusParams {
  std::size_t parts = 10;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
};

/// One evaluation unit as seen by an observer: the ids held out, the ids
/// handed to the learner, and the ids the learner reports consuming
/// (SMOTE seeds and neighbours included).
struct FoldRecord {
  std::size_t run = 0;
  std::size_t fold = 0;
  std::vector<std::string> test_ids;
  std::vector<std::string> train_ids;
  std::vector<std::string> seen_ids;
};

using FoldObserver = std::function<void(const FoldRecord&)>;

struct EvalReport {
  std::string protocol;            // "cv" or "cross-corpus"
  std::vector<double> unit_qwk;    // per run (cv) or per part (cross-corpus)
  double mean_qwk = 0;
  double kappa = 0;                // over all pooled predictions
  ConfusionMatrix confusion{};     // rows reference, columns predicted
  std::string fingerprint;

  std::string to_text() const;
  /// Tab-separated `protocol unit qwk` rows with a header.
  std::string to_table() const;
};

/// Assigns each label to one of `folds` stratified folds. Throws InputError
/// if a present class has fewer members than folds.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed);

/// runs x folds stratified cross-validation; QWK per run over the pooled
/// predictions of its folds. The pipeline only ever sees training folds.
EvalReport cross_validate(const learner::Dataset& data, const Pipeline& pipeline, const CvParams& params,
                          const FoldObserver& observer = {});
EvalReport cross_validate(const corpus::EssayCollection& test, const Pipeline& pipeline, const CvParams& params,
                          const FoldObserver& observer = {});

/// Per repeat: fit once on the whole training corpus, then score each of
/// `parts` disjoint stratified parts of the test corpus.
EvalReport cross_corpus(const corpus::EssayCollection& train, const corpus::EssayCollection& test,
                        const Pipeline& pipeline, const CrossCorpusParams& params,
                        const FoldObserver& observer = {});

}  // namespace evscore::eval
