#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace evscore::embedding {

/// A tokenized document collection: one vector of token norms per essay.
using TokenCorpus = std::vector<std::vector<std::string>>;

class Vocabulary {
 public:
  Vocabulary() = default;
  /// `words` must be unique. `counts` may be empty (external vectors).
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts, std::uint64_t min_count);

  std::size_t size() const { return words_.size(); }
  std::optional<std::size_t> index(const std::string& word) const;
  const std::string& word(std::size_t i) const { return words_[i]; }
  std::uint64_t count(std::size_t i) const { return counts_.empty() ? 0 : counts_[i]; }
  std::uint64_t min_count() const { return min_count_; }
  std::uint64_t total_count() const;
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t min_count_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Words with count >= min_count, ordered by descending count, ties
/// lexicographic. Throws InputError on an empty corpus.
Vocabulary build_vocab(const TokenCorpus& corpus, std::uint64_t min_count);

enum class Algorithm { skipgram, cbow, external };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

struct TrainParams {
  std::size_t dimension = 100;
  std::size_t window = 5;
  std::size_t negatives = 10;
  double subsample = 1e-3;  // 0 disables
  std::size_t epochs = 20;
  double learning_rate = 0.025;
  std::uint64_t min_count = 2;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const TrainParams&) const = default;
};

void to_json(nlohmann::json& j, const TrainParams& p);
void from_json(const nlohmann::json& j, TrainParams& p);

struct ModelMetadata {
  std::string name;
  Algorithm algorithm = Algorithm::external;
  std::optional<TrainParams> params;
  std::string corpus_fingerprint;
  std::vector<double> epoch_loss;  // mean negative-sampling loss per epoch
};

void to_json(nlohmann::json& j, const ModelMetadata& m);
void from_json(const nlohmann::json& j, ModelMetadata& m);

/// Vocabulary plus a V x d row-major matrix of finite vectors.
class EmbeddingModel {
 public:
  EmbeddingModel(Vocabulary vocab, std::size_t dimension, std::vector<float> data, ModelMetadata meta = {});

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return vocab_.size(); }
  const Vocabulary& vocabulary() const { return vocab_; }
  const ModelMetadata& metadata() const { return meta_; }
  const std::vector<float>& data() const { return data_; }

  std::span<const float> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::optional<std::size_t> index(const std::string& word) const { return vocab_.index(word); }

  /// Cosine of two rows; nullopt if either row has zero norm.
  std::optional<double> row_similarity(std::size_t a, std::size_t b) const;
  /// Cosine of two words; nullopt if either is out of vocabulary.
  std::optional<double> similarity(const std::string& a, const std::string& b) const;
  /// The k most cosine-similar other words, best first.
  std::vector<std::pair<std::string, double>> nearest(const std::string& word, std::size_t k) const;

 private:
  Vocabulary vocab_;
  std::size_t dim_;
  std::vector<float> data_;
  std::vector<double> norms_;
  ModelMetadata meta_;
};

EmbeddingModel train_skipgram(const TokenCorpus& corpus, const TrainParams& params);
EmbeddingModel train_cbow(const TokenCorpus& corpus, const TrainParams& params);
EmbeddingModel train(Algorithm algorithm, const TokenCorpus& corpus, const TrainParams& params);

std::string corpus_fingerprint(const TokenCorpus& corpus);

enum class VectorFormat { text, binary };

VectorFormat parse_vector_format(std::string_view s);

/// word2vec layouts: header `V d`, then per row the word followed by d
/// decimal floats (text) or d little-endian float32 values (binary).
EmbeddingModel load_embeddings(const std::filesystem::path& path, VectorFormat format, std::string name = {});
void save_embeddings(const std::filesystem::path& path, const EmbeddingModel& model, VectorFormat format);

/// Sidecar JSON next to a vector file.
void save_metadata(const std::filesystem::path& path, const ModelMetadata& meta);
ModelMetadata load_metadata(const std::filesystem::path& path);

/// dot(u,v) / (|u| |v|). Throws InputError on a zero-norm input or a
/// dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(std::span<const float> u, std::span<const float> v);

enum class MatchKind { none, exact, embedding };

/// Word-equivalence policy. Exact mode compares stems only; embedding mode
/// additionally accepts two in-vocabulary norms whose cosine reaches the
/// threshold.
class Matcher {
 public:
  static Matcher exact();
  static Matcher embedding(std::shared_ptr<const EmbeddingModel> model, double threshold);

  bool uses_embedding() const { return model_ != nullptr; }
  double threshold() const { return threshold_; }
  const std::shared_ptr<const EmbeddingModel>& model() const { return model_; }

  MatchKind match(const std::string& a_norm, std::string_view a_stem, const std::string& b_norm,
                  std::string_view b_stem) const;

 private:
  Matcher() = default;
  std::shared_ptr<const EmbeddingModel> model_;
  double threshold_ = 1.0;
};

/// `a` and `b` are normalized words; stems are computed here.
bool fuzzy_match(std::string_view a, std::string_view b, const Matcher& m);

/// Negative-sampling objective and its gradient, exposed for gradient
/// checks. Rows are dense double vectors of equal dimension.
namespace sgns {

struct Weights {
  std::size_t vocab = 0;
  std::size_t dim = 0;
  std::vector<double> input;   // word vectors (the embedding)
  std::vector<double> output;  // context vectors

  std::span<double> in_row(std::size_t i) { return {input.data() + i * dim, dim}; }
  std::span<double> out_row(std::size_t i) { return {output.data() + i * dim, dim}; }
  std::span<const double> in_row(std::size_t i) const { return {input.data() + i * dim, dim}; }
  std::span<const double> out_row(std::size_t i) const { return {output.data() + i * dim, dim}; }
};

/// -log s(u_pos . h) - sum_k log s(-u_k . h)
double loss(std::span<const double> hidden, std::span<const double> positive,
            const std::vector<std::span<const double>>& negatives);

struct Gradient {
  double loss = 0;
  std::vector<double> hidden;
  std::vector<double> positive;
  std::vector<std::vector<double>> negatives;
};

Gradient gradient(std::span<const double> hidden, std::span<const double> positive,
                  const std::vector<std::span<const double>>& negatives);

/// Loss of predicting `context` from `center`.
double skipgram_loss(const Weights& w, std::size_t center, std::size_t context, std::span<const std::size_t> negatives);
/// Loss of predicting `center` from the average of `context` input rows.
double cbow_loss(const Weights& w, std::span<const std::size_t> context, std::size_t center,
                 std::span<const std::size_t> negatives);

/// One SGD step on the corresponding loss; all gradients are evaluated at
/// the pre-step weights. Returns the pre-step loss.
double skipgram_step(Weights& w, std::size_t center, std::size_t context, std::span<const std::size_t> negatives,
                     double learning_rate);
double cbow_step(Weights& w, std::span<const std::size_t> context, std::size_t center,
                 std::span<const std::size_t> negatives, double learning_rate);

}  // namespace sgns

}  // namespace evscore::embedding
