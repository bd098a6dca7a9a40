#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evscore/corpus.hpp"
#include "evscore/embedding.hpp"
#include "evscore/eval.hpp"
#include "evscore/evidence.hpp"
#include "evscore/pipeline.hpp"

namespace evscore::cli {

/// Everything a command needs, resolved from one JSON config file plus
/// command-line overrides. Relative input paths are taken against the
/// config file's directory; a relative output directory against
/// $EVSCORE_HOME when set.
struct RunConfig {
  std::filesystem::path config_dir;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::optional<corpus::Format> format;  // forced input format, else by extension

  std::optional<std::filesystem::path> corpus;
  std::array<double, 3> ratios{0.40, 0.20, 0.40};
  std::optional<std::filesystem::path> topics;
  std::optional<std::filesystem::path> examples;
  // Default to the split outputs.
  std::filesystem::path embed_train;
  std::filesystem::path dev;
  std::filesystem::path test;
  std::filesystem::path ungraded;

  evidence::WindowConfig window;
  std::vector<embedding::Algorithm> algorithms{embedding::Algorithm::skipgram, embedding::Algorithm::cbow};
  std::vector<std::size_t> dimensions{100};
  std::vector<std::size_t> context_windows{5};
  embedding::TrainParams train;
  std::optional<std::filesystem::path> external_vectors;
  embedding::VectorFormat external_format = embedding::VectorFormat::text;

  std::vector<double> thresholds;
  std::size_t tune_folds = 10;
  LearnerParams learner;
  eval::CvParams cv;
  eval::CrossCorpusParams cross;
  std::optional<std::filesystem::path> cross_train;
  std::optional<std::filesystem::path> cross_test;

  /// Canonical JSON of the resolved settings, and its FNV-1a digest.
  nlohmann::json resolved() const;
  std::string fingerprint() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

/// Throws InputError on unreadable or malformed config, or a missing seed.
RunConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// File stem of a grid-trained model, e.g. "sg-d100-w5".
std::string model_name(embedding::Algorithm a, std::size_t dimension, std::size_t window);

/// Parses argv, runs the subcommand and maps errors to exit codes:
/// 0 success, 2 input or validation error, 3 internal invariant violation.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evscore::cli
