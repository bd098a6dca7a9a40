#include "evscore/embedding.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "evscore/errors.hpp"
#include "evscore/hash.hpp"
#include "evscore/text.hpp"

namespace evscore::embedding {

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts, std::uint64_t min_count)
    : words_(std::move(words)), counts_(std::move(counts)), min_count_(min_count) {
  if (!counts_.empty() && counts_.size() != words_.size()) {
    throw InvariantError("vocabulary counts and words differ in length");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) throw InputError("duplicate vocabulary word '" + words_[i] + "'");
    if (!counts_.empty() && counts_[i] < min_count_) {
      throw InvariantError("vocabulary word '" + words_[i] + "' below min_count");
    }
  }
}

std::optional<std::size_t> Vocabulary::index(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::total_count() const { return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}); }

Vocabulary build_vocab(const TokenCorpus& corpus, std::uint64_t min_count) {
  std::map<std::string, std::uint64_t, std::less<>> counts;
  std::size_t tokens = 0;
  for (const auto& doc : corpus) {
    for (const auto& w : doc) {
      ++counts[w];
      ++tokens;
    }
  }
  if (tokens == 0) throw InputError("build_vocab: empty corpus");
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [w, c] : counts)
    if (c >= min_count) kept.emplace_back(w, c);
  // std::map is already lexicographic, so a stable sort on count suffices.
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  std::vector<std::uint64_t> cnt;
  for (auto& [w, c] : kept) {
    words.push_back(w);
    cnt.push_back(c);
  }
  return Vocabulary(std::move(words), std::move(cnt), min_count);
}

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::skipgram: return "sg";
    case Algorithm::cbow: return "cbow";
    case Algorithm::external: return "external";
  }
  return "external";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "sg" || s == "skipgram") return Algorithm::skipgram;
  if (s == "cbow") return Algorithm::cbow;
  if (s == "external") return Algorithm::external;
  throw InputError("unknown embedding algorithm '" + std::string(s) + "'");
}

void TrainParams::validate() const {
  if (dimension < 1) throw InputError("embedding dimension must be >= 1");
  if (window < 1) throw InputError("context window must be >= 1");
  if (negatives < 1) throw InputError("negative samples must be >= 1");
  if (epochs < 1) throw InputError("epochs must be >= 1");
  if (!(learning_rate > 0)) throw InputError("learning rate must be positive");
  if (subsample < 0) throw InputError("subsampling threshold must be >= 0");
}

void to_json(nlohmann::json& j, const TrainParams& p) {
  j = nlohmann::json{{"dimension", p.dimension}, {"window", p.window},       {"negatives", p.negatives},
                     {"subsample", p.subsample}, {"epochs", p.epochs},       {"learning_rate", p.learning_rate},
                     {"min_count", p.min_count}, {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, TrainParams& p) {
  TrainParams d;
  p.dimension = j.value("dimension", d.dimension);
  p.window = j.value("window", d.window);
  p.negatives = j.value("negatives", d.negatives);
  p.subsample = j.value("subsample", d.subsample);
  p.epochs = j.value("epochs", d.epochs);
  p.learning_rate = j.value("learning_rate", d.learning_rate);
  p.min_count = j.value("min_count", d.min_count);
  p.seed = j.value("seed", d.seed);
}

void to_json(nlohmann::json& j, const ModelMetadata& m) {
  j = nlohmann::json{{"name", m.name},
                     {"algorithm", to_string(m.algorithm)},
                     {"corpus_fingerprint", m.corpus_fingerprint},
                     {"epoch_loss", m.epoch_loss}};
  if (m.params) {
    j["params"] = *m.params;
    j["seed"] = m.params->seed;
  }
}

void from_json(const nlohmann::json& j, ModelMetadata& m) {
  m.name = j.value("name", std::string());
  m.algorithm = parse_algorithm(j.value("algorithm", std::string("external")));
  m.corpus_fingerprint = j.value("corpus_fingerprint", std::string());
  m.epoch_loss = j.value("epoch_loss", std::vector<double>{});
  if (j.contains("params")) m.params = j["params"].get<TrainParams>();
}

EmbeddingModel::EmbeddingModel(Vocabulary vocab, std::size_t dimension, std::vector<float> data, ModelMetadata meta)
    : vocab_(std::move(vocab)), dim_(dimension), data_(std::move(data)), meta_(std::move(meta)) {
  if (dim_ < 1) throw InputError("embedding dimension must be >= 1");
  if (data_.size() != vocab_.size() * dim_) throw InvariantError("embedding matrix size does not match V x d");
  norms_.resize(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    double s = 0;
    for (float x : vector(i)) {
      if (!std::isfinite(x)) throw InputError("non-finite vector component for '" + vocab_.word(i) + "'");
      s += static_cast<double>(x) * x;
    }
    norms_[i] = std::sqrt(s);
  }
}

std::optional<double> EmbeddingModel::row_similarity(std::size_t a, std::size_t b) const {
  if (norms_[a] == 0 || norms_[b] == 0) return std::nullopt;
  auto u = vector(a);
  auto v = vector(b);
  double dot = 0;
  for (std::size_t i = 0; i < dim_; ++i) dot += static_cast<double>(u[i]) * v[i];
  return std::clamp(dot / (norms_[a] * norms_[b]), -1.0, 1.0);
}

std::optional<double> EmbeddingModel::similarity(const std::string& a, const std::string& b) const {
  auto ia = vocab_.index(a);
  auto ib = vocab_.index(b);
  if (!ia || !ib) return std::nullopt;
  return row_similarity(*ia, *ib);
}

std::vector<std::pair<std::string, double>> EmbeddingModel::nearest(const std::string& word, std::size_t k) const {
  std::vector<std::pair<std::string, double>> out;
  auto iw = vocab_.index(word);
  if (!iw) return out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (i == *iw) continue;
    if (auto s = row_similarity(*iw, i)) out.emplace_back(vocab_.word(i), *s);
  }
  auto cmp = [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; };
  if (out.size() > k) {
    std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), out.end(), cmp);
    out.resize(k);
  } else {
    std::sort(out.begin(), out.end(), cmp);
  }
  return out;
}

namespace sgns {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// -log(sigmoid(x)) without overflow.
double neg_log_sigmoid(double x) { return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

struct Scratch {
  std::vector<double> hidden;
  std::vector<double> grad_hidden;
  std::vector<double> coeff;
};

thread_local Scratch scratch;

// Shared update for both architectures: `hidden` is already in scratch.
// Computes every coefficient at the pre-step weights, then applies the
// output-row updates. Leaves dL/dh, negated and scaled by lr, in
// scratch.grad_hidden.
double apply_output_step(Weights& w, std::size_t positive, std::span<const std::size_t> negatives, double lr) {
  auto& s = scratch;
  std::span<const double> h(s.hidden);
  s.grad_hidden.assign(w.dim, 0.0);
  s.coeff.resize(negatives.size() + 1);
  double total = 0;
  for (std::size_t t = 0; t <= negatives.size(); ++t) {
    std::size_t row = t == 0 ? positive : negatives[t - 1];
    double label = t == 0 ? 1.0 : 0.0;
    double f = dot(h, w.out_row(row));
    total += t == 0 ? neg_log_sigmoid(f) : neg_log_sigmoid(-f);
    double g = (label - sigmoid(f)) * lr;  // -lr * dL/df
    s.coeff[t] = g;
    auto out = w.out_row(row);
    for (std::size_t i = 0; i < w.dim; ++i) s.grad_hidden[i] += g * out[i];
  }
  for (std::size_t t = 0; t <= negatives.size(); ++t) {
    std::size_t row = t == 0 ? positive : negatives[t - 1];
    auto out = w.out_row(row);
    for (std::size_t i = 0; i < w.dim; ++i) out[i] += s.coeff[t] * h[i];
  }
  return total;
}

void average_context(const Weights& w, std::span<const std::size_t> context, std::vector<double>& h) {
  h.assign(w.dim, 0.0);
  for (auto c : context) {
    auto row = w.in_row(c);
    for (std::size_t i = 0; i < w.dim; ++i) h[i] += row[i];
  }
  double inv = 1.0 / static_cast<double>(context.size());
  for (auto& x : h) x *= inv;
}

std::vector<std::span<const double>> out_rows(const Weights& w, std::span<const std::size_t> rows) {
  std::vector<std::span<const double>> out;
  for (auto r : rows) out.push_back(w.out_row(r));
  return out;
}

}  // namespace

double loss(std::span<const double> hidden, std::span<const double> positive,
            const std::vector<std::span<const double>>& negatives) {
  double total = neg_log_sigmoid(dot(hidden, positive));
  for (auto n : negatives) total += neg_log_sigmoid(-dot(hidden, n));
  return total;
}

Gradient gradient(std::span<const double> hidden, std::span<const double> positive,
                  const std::vector<std::span<const double>>& negatives) {
  Gradient g;
  g.loss = loss(hidden, positive, negatives);
  g.hidden.assign(hidden.size(), 0.0);
  // dL/df for the positive pair is s(f) - 1, for a negative pair s(f).
  double cp = sigmoid(dot(hidden, positive)) - 1.0;
  g.positive.resize(hidden.size());
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    g.positive[i] = cp * hidden[i];
    g.hidden[i] += cp * positive[i];
  }
  for (auto n : negatives) {
    double cn = sigmoid(dot(hidden, n));
    std::vector<double> gn(hidden.size());
    for (std::size_t i = 0; i < hidden.size(); ++i) {
      gn[i] = cn * hidden[i];
      g.hidden[i] += cn * n[i];
    }
    g.negatives.push_back(std::move(gn));
  }
  return g;
}

double skipgram_loss(const Weights& w, std::size_t center, std::size_t context, std::span<const std::size_t> negatives) {
  return loss(w.in_row(center), w.out_row(context), out_rows(w, negatives));
}

double cbow_loss(const Weights& w, std::span<const std::size_t> context, std::size_t center,
                 std::span<const std::size_t> negatives) {
  std::vector<double> h;
  average_context(w, context, h);
  return loss(h, w.out_row(center), out_rows(w, negatives));
}

double skipgram_step(Weights& w, std::size_t center, std::size_t context, std::span<const std::size_t> negatives,
                     double learning_rate) {
  auto in = w.in_row(center);
  scratch.hidden.assign(in.begin(), in.end());
  double l = apply_output_step(w, context, negatives, learning_rate);
  for (std::size_t i = 0; i < w.dim; ++i) in[i] += scratch.grad_hidden[i];
  return l;
}

double cbow_step(Weights& w, std::span<const std::size_t> context, std::size_t center,
                 std::span<const std::size_t> negatives, double learning_rate) {
  if (context.empty()) throw InvariantError("cbow_step: empty context");
  average_context(w, context, scratch.hidden);
  double l = apply_output_step(w, center, negatives, learning_rate);
  // dh/d(context row) = 1/C for each occurrence.
  double share = 1.0 / static_cast<double>(context.size());
  for (auto c : context) {
    auto row = w.in_row(c);
    for (std::size_t i = 0; i < w.dim; ++i) row[i] += share * scratch.grad_hidden[i];
  }
  return l;
}

}  // namespace sgns

std::string corpus_fingerprint(const TokenCorpus& corpus) {
  Fnv1a h;
  for (const auto& doc : corpus) {
    for (const auto& w : doc) h.update(w).update(" ");
    h.update("\n");
  }
  return h.hex();
}

namespace {

EmbeddingModel train_impl(Algorithm algorithm, const TokenCorpus& corpus, const TrainParams& params) {
  params.validate();
  auto vocab = build_vocab(corpus, params.min_count);
  if (vocab.size() < 2) throw InputError("degenerate vocabulary: need at least 2 words at min_count");

  const std::size_t V = vocab.size();
  const std::size_t d = params.dimension;
  std::mt19937_64 rng(params.seed);

  sgns::Weights w;
  w.vocab = V;
  w.dim = d;
  w.input.resize(V * d);
  w.output.assign(V * d, 0.0);
  std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d), 0.5 / static_cast<double>(d));
  for (auto& x : w.input) x = init(rng);

  std::vector<double> noise_weights(V);
  for (std::size_t i = 0; i < V; ++i) noise_weights[i] = std::pow(static_cast<double>(vocab.count(i)), 0.75);
  std::discrete_distribution<std::size_t> noise(noise_weights.begin(), noise_weights.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> shrink(0, params.window - 1);

  std::vector<std::vector<std::size_t>> docs;
  docs.reserve(corpus.size());
  for (const auto& doc : corpus) {
    std::vector<std::size_t> ids;
    for (const auto& t : doc)
      if (auto i = vocab.index(t)) ids.push_back(*i);
    docs.push_back(std::move(ids));
  }
  const double train_words = static_cast<double>(vocab.total_count());
  const double total_steps = static_cast<double>(params.epochs) * train_words + 1.0;

  std::vector<double> keep_prob(V, 1.0);
  if (params.subsample > 0) {
    double t = params.subsample * train_words;
    for (std::size_t i = 0; i < V; ++i) {
      double f = static_cast<double>(vocab.count(i));
      keep_prob[i] = std::min(1.0, (std::sqrt(f / t) + 1.0) * t / f);
    }
  }

  std::vector<std::size_t> negatives;
  std::vector<std::size_t> context;
  std::vector<std::size_t> sentence;
  std::vector<double> epoch_loss;
  double processed = 0;

  auto sample_negatives = [&](std::size_t exclude) {
    negatives.clear();
    for (std::size_t k = 0; k < params.negatives; ++k) {
      std::size_t n = noise(rng);
      if (n != exclude) negatives.push_back(n);
    }
  };

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    double loss_sum = 0;
    std::size_t predictions = 0;
    for (const auto& doc : docs) {
      sentence.clear();
      for (auto id : doc) {
        double u = unit(rng);
        if (u <= keep_prob[id]) sentence.push_back(id);
      }
      processed += static_cast<double>(doc.size());
      double lr = params.learning_rate * std::max(1e-4, 1.0 - processed / total_steps);
      const auto n = sentence.size();
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t reach = params.window - shrink(rng);
        std::size_t lo = i >= reach ? i - reach : 0;
        std::size_t hi = std::min(n - 1, i + reach);
        if (algorithm == Algorithm::skipgram) {
          for (std::size_t j = lo; j <= hi; ++j) {
            if (j == i) continue;
            sample_negatives(sentence[j]);
            loss_sum += sgns::skipgram_step(w, sentence[i], sentence[j], negatives, lr);
            ++predictions;
          }
        } else {
          context.clear();
          for (std::size_t j = lo; j <= hi; ++j)
            if (j != i) context.push_back(sentence[j]);
          if (context.empty()) continue;
          sample_negatives(sentence[i]);
          loss_sum += sgns::cbow_step(w, context, sentence[i], negatives, lr);
          ++predictions;
        }
      }
    }
    epoch_loss.push_back(predictions ? loss_sum / static_cast<double>(predictions) : 0.0);
  }

  std::vector<float> data(w.input.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(w.input[i])) throw InvariantError("embedding training diverged");
    data[i] = static_cast<float>(w.input[i]);
  }
  ModelMetadata meta;
  meta.name = std::string(to_string(algorithm));
  meta.algorithm = algorithm;
  meta.params = params;
  meta.corpus_fingerprint = corpus_fingerprint(corpus);
  meta.epoch_loss = std::move(epoch_loss);
  return EmbeddingModel(std::move(vocab), d, std::move(data), std::move(meta));
}

}  // namespace

EmbeddingModel train_skipgram(const TokenCorpus& corpus, const TrainParams& params) {
  return train_impl(Algorithm::skipgram, corpus, params);
}

EmbeddingModel train_cbow(const TokenCorpus& corpus, const TrainParams& params) {
  return train_impl(Algorithm::cbow, corpus, params);
}

EmbeddingModel train(Algorithm algorithm, const TokenCorpus& corpus, const TrainParams& params) {
  if (algorithm == Algorithm::external) throw InputError("cannot train an external embedding");
  return train_impl(algorithm, corpus, params);
}

VectorFormat parse_vector_format(std::string_view s) {
  if (s == "text" || s == "txt") return VectorFormat::text;
  if (s == "binary" || s == "bin") return VectorFormat::binary;
  throw InputError("unknown vector format '" + std::string(s) + "'");
}

namespace {

std::pair<std::size_t, std::size_t> parse_header(const std::string& line, const std::string& where) {
  std::istringstream hs(line);
  long long v = -1, d = -1;
  std::string extra;
  if (!(hs >> v >> d) || (hs >> extra) || v < 0 || d < 1) {
    throw InputError(where + ": malformed header '" + line + "' (expected 'V d')");
  }
  return {static_cast<std::size_t>(v), static_cast<std::size_t>(d)};
}

EmbeddingModel finish_load(std::vector<std::string> words, std::vector<float> data, std::size_t d, std::string name) {
  // Keep the first occurrence of a repeated word.
  std::vector<std::string> uniq;
  std::vector<float> kept;
  std::unordered_map<std::string, bool> seen;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!seen.emplace(words[i], true).second) continue;
    uniq.push_back(std::move(words[i]));
    kept.insert(kept.end(), data.begin() + static_cast<std::ptrdiff_t>(i * d),
                data.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
  }
  ModelMetadata meta;
  meta.name = std::move(name);
  meta.algorithm = Algorithm::external;
  return EmbeddingModel(Vocabulary(std::move(uniq), {}, 0), d, std::move(kept), std::move(meta));
}

}  // namespace

EmbeddingModel load_embeddings(const std::filesystem::path& path, VectorFormat format, std::string name) {
  std::ifstream in(path, std::ios::binary);
  const std::string where = path.string();
  if (!in) throw InputError("cannot open vector file " + where);
  if (name.empty()) name = path.stem().string();
  std::string line;
  if (!std::getline(in, line)) throw InputError(where + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto [V, d] = parse_header(line, where);

  std::vector<std::string> words;
  std::vector<float> data;
  words.reserve(V);
  data.reserve(V * d);

  if (format == VectorFormat::text) {
    std::size_t lineno = 1;
    while (words.size() < V) {
      if (!std::getline(in, line)) {
        throw InputError(where + ": header declares " + std::to_string(V) + " rows, file has " +
                         std::to_string(words.size()));
      }
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const char* p = line.data();
      const char* end = p + line.size();
      while (p < end && *p == ' ') ++p;
      const char* w0 = p;
      while (p < end && *p != ' ') ++p;
      if (p == w0) throw InputError(where + ": line " + std::to_string(lineno) + ": missing word");
      words.emplace_back(w0, p);
      std::size_t got = 0;
      while (true) {
        while (p < end && *p == ' ') ++p;
        if (p >= end) break;
        float x = 0;
        auto [next, ec] = std::from_chars(p, end, x);
        if (ec != std::errc() || (next < end && *next != ' ')) {
          throw InputError(where + ": line " + std::to_string(lineno) + ": bad number");
        }
        data.push_back(x);
        ++got;
        p = next;
      }
      if (got != d) {
        throw InputError(where + ": line " + std::to_string(lineno) + ": expected " + std::to_string(d) +
                         " values, found " + std::to_string(got));
      }
    }
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \r\t") != std::string::npos) {
        throw InputError(where + ": more rows than the header's " + std::to_string(V));
      }
    }
  } else {
    static_assert(std::endian::native == std::endian::little, "binary vectors assume a little-endian host");
    std::vector<char> buf(d * sizeof(float));
    for (std::size_t r = 0; r < V; ++r) {
      std::string word;
      int c;
      while ((c = in.get()) != EOF && (c == '\n' || c == ' ')) {
      }
      while (c != EOF && c != ' ') {
        word.push_back(static_cast<char>(c));
        c = in.get();
      }
      if (word.empty() || c == EOF) {
        throw InputError(where + ": header declares " + std::to_string(V) + " rows, file has " + std::to_string(r));
      }
      if (!in.read(buf.data(), static_cast<std::streamsize>(buf.size()))) {
        throw InputError(where + ": truncated vector for '" + word + "'");
      }
      words.push_back(std::move(word));
      std::size_t off = data.size();
      data.resize(off + d);
      std::memcpy(data.data() + off, buf.data(), buf.size());
    }
  }
  return finish_load(std::move(words), std::move(data), d, std::move(name));
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingModel& model, VectorFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write vector file " + path.string());
  out << model.size() << ' ' << model.dimension() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < model.size(); ++i) {
    out << model.vocabulary().word(i);
    auto v = model.vector(i);
    if (format == VectorFormat::text) {
      for (float x : v) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
        out << ' ';
        out.write(buf, end - buf);
      }
    } else {
      out << ' ';
      out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
    }
    out << '\n';
  }
}

void save_metadata(const std::filesystem::path& path, const ModelMetadata& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << nlohmann::json(meta).dump(2) << '\n';
}

ModelMetadata load_metadata(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in).get<ModelMetadata>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw InputError("cosine: dimension mismatch");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0 || nv == 0) throw InputError("cosine: zero-norm vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }
double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }

Matcher Matcher::exact() { return Matcher(); }

Matcher Matcher::embedding(std::shared_ptr<const EmbeddingModel> model, double threshold) {
  if (!model) throw InputError("embedding matcher requires a model");
  if (!(threshold >= -1.0 && threshold <= 1.0)) throw InputError("matcher threshold must lie in [-1,1]");
  Matcher m;
  m.model_ = std::move(model);
  m.threshold_ = threshold;
  return m;
}

MatchKind Matcher::match(const std::string& a_norm, std::string_view a_stem, const std::string& b_norm,
                         std::string_view b_stem) const {
  if (a_stem == b_stem) return MatchKind::exact;
  if (!model_) return MatchKind::none;
  auto s = model_->similarity(a_norm, b_norm);
  return s && *s >= threshold_ ? MatchKind::embedding : MatchKind::none;
}

bool fuzzy_match(std::string_view a, std::string_view b, const Matcher& m) {
  return m.match(std::string(a), text::stem(a), std::string(b), text::stem(b)) != MatchKind::none;
}

}  // namespace evscore::embedding
