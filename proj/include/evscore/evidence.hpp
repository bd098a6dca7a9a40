#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evscore/corpus.hpp"
#include "evscore/embedding.hpp"
#include "evscore/text.hpp"

namespace evscore::evidence {

using embedding::Matcher;
using embedding::MatchKind;
using text::Token;

/// A crafted-list word. Exact matching compares stems; embedding lookups
/// use the norm.
struct ListWord {
  std::string norm;
  std::string stem;
  bool operator==(const ListWord&) const = default;
};

/// Distinct-by-stem list words.
using WordSet = std::vector<ListWord>;

/// Normalizes, stems and de-duplicates raw words.
WordSet make_word_set(const std::vector<std::string>& raw);

struct Topic {
  std::string name;
  WordSet words;
};

class TopicList {
 public:
  /// At least one topic, unique names, no empty word sets.
  explicit TopicList(std::vector<Topic> topics);

  /// Lines `topic_name: w1 w2 ...`; blank lines and `#` comments skipped.
  static TopicList parse(std::istream& in);
  static TopicList load(const std::filesystem::path& path);

  const std::vector<Topic>& topics() const { return topics_; }
  std::size_t size() const { return topics_.size(); }
  std::optional<std::size_t> find(std::string_view name) const;

 private:
  std::vector<Topic> topics_;
};

struct Example {
  std::string topic;
  std::string id;
  WordSet words;
};

/// Examples grouped under topics of a companion TopicList. The SPC
/// partition is the topics that own at least one example, in TopicList order.
class ExampleList {
 public:
  ExampleList(std::vector<Example> examples, const TopicList& topics);

  /// Lines `topic_name | example_id: w1 w2 ...`.
  static ExampleList parse(std::istream& in, const TopicList& topics);
  static ExampleList load(const std::filesystem::path& path, const TopicList& topics);

  const std::vector<Example>& examples() const { return examples_; }
  const std::vector<std::string>& partition() const { return partition_; }
  /// Partition slot of example i.
  std::size_t slot(std::size_t i) const { return slot_[i]; }
  std::size_t examples_in(std::size_t slot) const;

 private:
  std::vector<Example> examples_;
  std::vector<std::string> partition_;
  std::vector<std::size_t> slot_;
};

struct WindowConfig {
  std::size_t size = 10;
  std::size_t stride = 1;
  void validate() const;
};

/// [NPE, CON, SPC..., WOC].
struct EvidenceFeatures {
  int npe = 0;
  int con = 0;
  std::vector<int> spc;
  int woc = 0;

  std::vector<double> values() const;
  bool operator==(const EvidenceFeatures&) const = default;
};

/// Column names matching EvidenceFeatures::values(): npe, con, spc:<topic>..., woc.
std::vector<std::string> feature_schema(const ExampleList& examples);

struct TokenRange {
  std::size_t begin = 0;  // token indices, half open
  std::size_t end = 0;
  bool operator==(const TokenRange&) const = default;
};

/// Window start positions advance by stride while a full window fits; a
/// final shorter window covers any tokens left over.
std::vector<TokenRange> window_ranges(std::size_t token_count, const WindowConfig& cfg);
std::vector<std::span<const Token>> windows(std::span<const Token> tokens, const WindowConfig& cfg);

/// Number of distinct list words matched by at least one window token.
int window_hits(std::span<const Token> window, const WordSet& words, const Matcher& matcher);

int extract_npe(std::span<const Token> tokens, const TopicList& topics, const Matcher& matcher,
                const WindowConfig& cfg);
/// 1 when fewer than three sentences mention any topic word.
int extract_con(const std::vector<std::vector<Token>>& sentences, const TopicList& topics, const Matcher& matcher);
/// Number of sentences containing at least one topic word.
int topic_sentence_count(const std::vector<std::vector<Token>>& sentences, const TopicList& topics,
                         const Matcher& matcher);
std::vector<int> extract_spc(std::span<const Token> tokens, const ExampleList& examples, const Matcher& matcher,
                             const WindowConfig& cfg);
int extract_woc(std::span<const Token> tokens);

EvidenceFeatures extract_features(std::string_view text, const TopicList& topics, const ExampleList& examples,
                                  const Matcher& matcher, const WindowConfig& cfg);
EvidenceFeatures extract_features(const corpus::Essay& essay, const TopicList& topics, const ExampleList& examples,
                                  const Matcher& matcher, const WindowConfig& cfg);

struct MatchedWord {
  std::string list_word;  // norm of the list word
  std::string surface;    // essay token that matched it
  MatchKind kind = MatchKind::none;
};

/// The first window that evidences an example, as a byte span of the text.
struct ExampleEvidence {
  std::string topic;
  std::string example_id;
  std::size_t char_begin = 0;
  std::size_t char_end = 0;
  std::vector<MatchedWord> words;
};

struct Explanation {
  EvidenceFeatures features;
  std::vector<ExampleEvidence> examples;
};

Explanation explain(std::string_view text, const TopicList& topics, const ExampleList& examples,
                    const Matcher& matcher, const WindowConfig& cfg);

}  // namespace evscore::evidence
