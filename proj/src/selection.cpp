#include "evscore/selection.hpp"

#include "evscore/errors.hpp"

namespace evscore::selection {

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 10; i <= 19; ++i) t.push_back(i * 0.05);
  return t;
}

Selection select_config(const corpus::EssayCollection& dev, const std::vector<Candidate>& candidates,
                        const std::vector<double>& thresholds,
                        std::shared_ptr<const evidence::TopicList> topics,
                        std::shared_ptr<const evidence::ExampleList> examples, const SelectionParams& params) {
  if (candidates.empty()) throw InputError("select_config: no candidate embedding models");
  if (thresholds.empty()) throw InputError("select_config: empty threshold grid");
  if (dev.empty()) throw InputError("select_config: empty development set");

  eval::CvParams cv{1, params.folds, params.seed};
  Selection best;
  bool have = false;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    for (double t : thresholds) {
      EvidencePipeline pipeline(topics, examples, evidence::Matcher::embedding(candidates[c].model, t), params.window,
                                params.learner);
      double q = eval::cross_validate(dev, pipeline, cv).mean_qwk;
      best.table.push_back({c, t, q});
      bool better = !have || q > best.qwk || (q == best.qwk && t < best.threshold);
      if (better) {
        best.candidate = c;
        best.threshold = t;
        best.qwk = q;
        have = true;
      }
    }
  }
  return best;
}

}  // namespace evscore::selection
