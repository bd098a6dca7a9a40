#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "evscore/corpus.hpp"
#include "evscore/embedding.hpp"
#include "evscore/evidence.hpp"
#include "evscore/pipeline.hpp"

namespace evscore::selection {

/// 0.50, 0.55, ..., 0.95.
std::vector<double> default_thresholds();

struct Candidate {
  std::string name;
  std::shared_ptr<const embedding::EmbeddingModel> model;
};

struct Score {
  std::size_t candidate = 0;
  double threshold = 0;
  double qwk = 0;
};

struct Selection {
  std::size_t candidate = 0;
  double threshold = 0;
  double qwk = 0;
  std::vector<Score> table;  // every (candidate, threshold) tried, in grid order
};

struct SelectionParams {
  evidence::WindowConfig window;
  LearnerParams learner;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
};

/// Scores every (candidate, threshold) pair by one stratified k-fold run on
/// the dev essays and keeps the best QWK; ties go to the lower threshold,
/// then to the earlier candidate.
Selection select_config(const corpus::EssayCollection& dev, const std::vector<Candidate>& candidates,
                        const std::vector<double>& thresholds,
                        std::shared_ptr<const evidence::TopicList> topics,
                        std::shared_ptr<const evidence::ExampleList> examples, const SelectionParams& params);

}  // namespace evscore::selection
