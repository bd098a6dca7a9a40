#include "evscore/pipeline.hpp"

#include <sstream>

#include "evscore/hash.hpp"

namespace evscore {

namespace {

class ForestPredictor : public eval::Predictor {
 public:
  explicit ForestPredictor(learner::ForestModel model) : model_(std::move(model)) {}
  int predict(std::span<const double> features) const override { return model_.predict(features); }

 private:
  learner::ForestModel model_;
};

}  // namespace

EvidencePipeline::EvidencePipeline(std::shared_ptr<const evidence::TopicList> topics,
                                   std::shared_ptr<const evidence::ExampleList> examples, evidence::Matcher matcher,
                                   evidence::WindowConfig window, LearnerParams learner)
    : topics_(std::move(topics)),
      examples_(std::move(examples)),
      matcher_(std::move(matcher)),
      window_(window),
      learner_(learner) {
  window_.validate();
  learner_.forest.validate();
}

learner::Dataset featurize(const corpus::EssayCollection& essays, const evidence::TopicList& topics,
                           const evidence::ExampleList& examples, const evidence::Matcher& matcher,
                           const evidence::WindowConfig& window) {
  std::vector<learner::Sample> rows;
  rows.reserve(essays.size());
  for (const auto& e : essays) {
    auto f = evidence::extract_features(e, topics, examples, matcher, window);
    rows.push_back({e.id, f.values(), e.label(), std::nullopt});
  }
  return learner::Dataset(evidence::feature_schema(examples), std::move(rows));
}

learner::Dataset EvidencePipeline::featurize(const corpus::EssayCollection& essays) const {
  return evscore::featurize(essays, *topics_, *examples_, matcher_, window_);
}

learner::ForestModel EvidencePipeline::fit_forest(const learner::Dataset& train, std::uint64_t seed,
                                                  eval::FitRecord* record) const {
  auto smote_params = learner_.smote;
  smote_params.seed = mix_seed(seed, 1);
  auto balanced = learner::smote(train, smote_params);
  if (record) {
    for (const auto& r : balanced.rows()) {
      if (r.origin) {
        record->seen_ids.push_back(r.origin->first);
        record->seen_ids.push_back(r.origin->second);
      } else {
        record->seen_ids.push_back(r.id);
      }
    }
  }
  auto forest_params = learner_.forest;
  forest_params.seed = mix_seed(seed, 2);
  return learner::train_forest(balanced, forest_params);
}

std::unique_ptr<eval::Predictor> EvidencePipeline::fit(const learner::Dataset& train, std::uint64_t seed,
                                                       eval::FitRecord* record) const {
  return std::make_unique<ForestPredictor>(fit_forest(train, seed, record));
}

std::string EvidencePipeline::describe() const {
  std::ostringstream os;
  os << "evidence(matcher=" << (matcher_.uses_embedding() ? "embedding" : "exact");
  if (matcher_.uses_embedding()) {
    os << ",model=" << matcher_.model()->metadata().name << ",threshold=" << matcher_.threshold();
  }
  os << ",window=" << window_.size << "/" << window_.stride << ",smote_k=" << learner_.smote.k_neighbors
     << ",trees=" << learner_.forest.tree_count << ",depth=" << learner_.forest.max_depth
     << ",mtry=" << learner_.forest.features_per_split << ")";
  return os.str();
}

}  // namespace evscore
