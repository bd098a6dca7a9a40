#pragma once

#include <memory>

#include "evscore/eval.hpp"
#include "evscore/evidence.hpp"
#include "evscore/learner.hpp"

namespace evscore {

struct LearnerParams {
  learner::SmoteParams smote;
  learner::ForestParams forest;
};

/// Rubric features under a given matcher, SMOTE on the training rows only,
/// then a depth-limited random forest.
class EvidencePipeline : public eval::Pipeline {
 public:
  EvidencePipeline(std::shared_ptr<const evidence::TopicList> topics,
                   std::shared_ptr<const evidence::ExampleList> examples, evidence::Matcher matcher,
                   evidence::WindowConfig window, LearnerParams learner);

  learner::Dataset featurize(const corpus::EssayCollection& essays) const override;
  std::unique_ptr<eval::Predictor> fit(const learner::Dataset& train, std::uint64_t seed,
                                       eval::FitRecord* record = nullptr) const override;
  std::string describe() const override;

  /// The forest fitted on `train`, for persisting a scoring model.
  learner::ForestModel fit_forest(const learner::Dataset& train, std::uint64_t seed,
                                  eval::FitRecord* record = nullptr) const;

  const evidence::Matcher& matcher() const { return matcher_; }
  const evidence::WindowConfig& window() const { return window_; }

 private:
  std::shared_ptr<const evidence::TopicList> topics_;
  std::shared_ptr<const evidence::ExampleList> examples_;
  evidence::Matcher matcher_;
  evidence::WindowConfig window_;
  LearnerParams learner_;
};

/// Rows of essay features labelled with score_rater1.
learner::Dataset featurize(const corpus::EssayCollection& essays, const evidence::TopicList& topics,
                           const evidence::ExampleList& examples, const evidence::Matcher& matcher,
                           const evidence::WindowConfig& window);

}  // namespace evscore
