#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evscore/corpus.hpp"

namespace evscore::synthetic {

// Generates essays with a known amount of planted evidence so the whole
// pipeline can be validated without proprietary data.

struct PlantedExample {
  std::string topic;
  std::string id;
  std::vector<std::string> key_words;  // the example-list entry
  std::vector<std::string> sentences;  // realizations containing every key word
};

struct World {
  std::vector<std::pair<std::string, std::vector<std::string>>> topics;
  std::vector<PlantedExample> examples;
  std::vector<std::string> theses;   // opening sentence restating the prompt
  std::vector<std::string> openers;  // filler sentence = opener + clause
  std::vector<std::string> clauses;
};

/// A source-article world modelled on the Millennium Villages reading:
/// four topics and eleven examples whose key-word sets are pairwise
/// disjoint, with filler free of list words. Every essay opens with a
/// thesis that mentions "poverty" and no other list word, the way students
/// restate the prompt.
const World& village_world();

std::string topic_list_text(const World& world);
std::string example_list_text(const World& world);

struct GeneratorParams {
  std::size_t graded = 1000;
  std::size_t ungraded = 200;
  /// Probability that an occurrence of `target` is written as `misspelling`.
  double misspell_rate = 0.10;
  std::string target = "poverty";
  std::string misspelling = "proverty";
  /// Probability that a label is moved one step away from its planted score.
  double label_noise = 0.10;
  std::size_t min_filler = 2;
  std::size_t max_filler = 6;
  std::uint64_t seed = 0;
};

/// clamp(1 + floor(k/3), 1, 4)
int planted_score(std::size_t k);

struct GeneratedCorpus {
  corpus::EssayCollection essays;      // graded essays followed by ungraded ones
  std::vector<std::size_t> planted;    // examples planted in each essay
};

GeneratedCorpus generate(const World& world, const GeneratorParams& params, const std::string& name = "synthetic");

}  // namespace evscore::synthetic
