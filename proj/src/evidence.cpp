#include "evscore/evidence.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "evscore/errors.hpp"

namespace evscore::evidence {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_words(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Match kinds of every token against every word of one set, computed once
// per distinct token norm.
class SetTable {
 public:
  SetTable(std::span<const Token> tokens, const WordSet& words, const Matcher& matcher) : width_(words.size()) {
    std::unordered_map<std::string, std::size_t> rows;
    row_of_.reserve(tokens.size());
    for (const auto& tok : tokens) {
      auto [it, fresh] = rows.emplace(tok.norm, rows.size());
      if (fresh) {
        for (const auto& w : words) kinds_.push_back(matcher.match(tok.norm, tok.stem, w.norm, w.stem));
      }
      row_of_.push_back(it->second);
    }
  }

  MatchKind at(std::size_t token, std::size_t word) const { return kinds_[row_of_[token] * width_ + word]; }
  std::size_t width() const { return width_; }

 private:
  std::size_t width_;
  std::vector<std::size_t> row_of_;
  std::vector<MatchKind> kinds_;
};

// Slides the configured windows across the tokens keeping a per-word count
// of matching tokens inside the window; returns the first window holding at
// least two distinct list words.
std::optional<TokenRange> first_evidence_window(const SetTable& table, std::size_t n, const WindowConfig& cfg) {
  if (table.width() < 2) return std::nullopt;
  std::vector<int> counts(table.width(), 0);
  int distinct = 0;
  auto add = [&](std::size_t t) {
    for (std::size_t w = 0; w < table.width(); ++w)
      if (table.at(t, w) != MatchKind::none && counts[w]++ == 0) ++distinct;
  };
  auto remove = [&](std::size_t t) {
    for (std::size_t w = 0; w < table.width(); ++w)
      if (table.at(t, w) != MatchKind::none && --counts[w] == 0) --distinct;
  };
  TokenRange cur{0, 0};
  for (auto next : window_ranges(n, cfg)) {
    for (std::size_t t = cur.begin; t < std::min(next.begin, cur.end); ++t) remove(t);
    for (std::size_t t = std::max(cur.end, next.begin); t < next.end; ++t) add(t);
    cur = next;
    if (distinct >= 2) return cur;
  }
  return std::nullopt;
}

bool sentence_mentions_topic(const std::vector<Token>& sentence, const TopicList& topics, const Matcher& matcher) {
  for (const auto& tok : sentence)
    for (const auto& topic : topics.topics())
      for (const auto& w : topic.words)
        if (matcher.match(tok.norm, tok.stem, w.norm, w.stem) != MatchKind::none) return true;
  return false;
}

std::vector<std::vector<Token>> tokenize_sentences(std::string_view text) {
  std::vector<std::vector<Token>> out;
  for (auto s : text::sentence_spans(text)) out.push_back(text::tokenize(text.substr(s.begin, s.end - s.begin)));
  return out;
}

}  // namespace

WordSet make_word_set(const std::vector<std::string>& raw) {
  WordSet out;
  std::unordered_set<std::string> stems;
  for (const auto& r : raw) {
    auto norm = text::normalize(r);
    if (norm.empty()) continue;
    auto st = text::stem(norm);
    if (stems.insert(st).second) out.push_back({std::move(norm), std::move(st)});
  }
  return out;
}

TopicList::TopicList(std::vector<Topic> topics) : topics_(std::move(topics)) {
  if (topics_.empty()) throw InputError("topic list is empty");
  std::unordered_set<std::string> names;
  for (const auto& t : topics_) {
    if (t.name.empty()) throw InputError("topic with empty name");
    if (!names.insert(t.name).second) throw InputError("duplicate topic '" + t.name + "'");
    if (t.words.empty()) throw InputError("topic '" + t.name + "' has no words");
  }
}

TopicList TopicList::parse(std::istream& in) {
  std::vector<Topic> topics;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto colon = body.find(':');
    if (colon == std::string::npos) {
      throw InputError("topic list line " + std::to_string(lineno) + ": expected 'topic_name: words'");
    }
    topics.push_back({trim(std::string_view(body).substr(0, colon)),
                      make_word_set(split_words(std::string_view(body).substr(colon + 1)))});
  }
  return TopicList(std::move(topics));
}

TopicList TopicList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open topic list " + path.string());
  try {
    return parse(in);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::optional<std::size_t> TopicList::find(std::string_view name) const {
  for (std::size_t i = 0; i < topics_.size(); ++i)
    if (topics_[i].name == name) return i;
  return std::nullopt;
}

ExampleList::ExampleList(std::vector<Example> examples, const TopicList& topics) : examples_(std::move(examples)) {
  std::vector<bool> used(topics.size(), false);
  std::unordered_set<std::string> keys;
  for (const auto& ex : examples_) {
    auto t = topics.find(ex.topic);
    if (!t) throw InputError("example '" + ex.id + "' names unknown topic '" + ex.topic + "'");
    if (ex.words.size() < 2) {
      throw InputError("example '" + ex.topic + " | " + ex.id + "' needs at least two distinct words");
    }
    if (!keys.insert(ex.topic + '\x1f' + ex.id).second) {
      throw InputError("duplicate example '" + ex.topic + " | " + ex.id + "'");
    }
    used[*t] = true;
  }
  std::vector<std::size_t> slot_of_topic(topics.size(), 0);
  for (std::size_t t = 0; t < topics.size(); ++t) {
    if (!used[t]) continue;
    slot_of_topic[t] = partition_.size();
    partition_.push_back(topics.topics()[t].name);
  }
  for (const auto& ex : examples_) slot_.push_back(slot_of_topic[*topics.find(ex.topic)]);
}

ExampleList ExampleList::parse(std::istream& in, const TopicList& topics) {
  std::vector<Example> examples;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto bar = body.find('|');
    auto colon = body.find(':', bar == std::string::npos ? 0 : bar);
    if (bar == std::string::npos || colon == std::string::npos) {
      throw InputError("example list line " + std::to_string(lineno) + ": expected 'topic | example_id: words'");
    }
    std::string_view v(body);
    Example ex{trim(v.substr(0, bar)), trim(v.substr(bar + 1, colon - bar - 1)),
               make_word_set(split_words(v.substr(colon + 1)))};
    if (ex.id.empty()) throw InputError("example list line " + std::to_string(lineno) + ": empty example id");
    examples.push_back(std::move(ex));
  }
  return ExampleList(std::move(examples), topics);
}

ExampleList ExampleList::load(const std::filesystem::path& path, const TopicList& topics) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open example list " + path.string());
  try {
    return parse(in, topics);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::size_t ExampleList::examples_in(std::size_t s) const {
  return static_cast<std::size_t>(std::count(slot_.begin(), slot_.end(), s));
}

void WindowConfig::validate() const {
  if (size < 2) throw InputError("window size must be >= 2");
  if (stride < 1) throw InputError("window stride must be >= 1");
}

std::vector<double> EvidenceFeatures::values() const {
  std::vector<double> v;
  v.reserve(spc.size() + 3);
  v.push_back(npe);
  v.push_back(con);
  for (int s : spc) v.push_back(s);
  v.push_back(woc);
  return v;
}

std::vector<std::string> feature_schema(const ExampleList& examples) {
  std::vector<std::string> cols{"npe", "con"};
  for (const auto& t : examples.partition()) cols.push_back("spc:" + t);
  cols.push_back("woc");
  return cols;
}

std::vector<TokenRange> window_ranges(std::size_t n, const WindowConfig& cfg) {
  cfg.validate();
  std::vector<TokenRange> out;
  std::size_t start = 0;
  for (; start + cfg.size <= n; start += cfg.stride) out.push_back({start, start + cfg.size});
  std::size_t covered = out.empty() ? 0 : out.back().end;
  if (covered < n && start < n) out.push_back({start, n});
  return out;
}

std::vector<std::span<const Token>> windows(std::span<const Token> tokens, const WindowConfig& cfg) {
  std::vector<std::span<const Token>> out;
  for (auto r : window_ranges(tokens.size(), cfg)) out.push_back(tokens.subspan(r.begin, r.end - r.begin));
  return out;
}

int window_hits(std::span<const Token> window, const WordSet& words, const Matcher& matcher) {
  int hits = 0;
  for (const auto& w : words) {
    for (const auto& tok : window) {
      if (matcher.match(tok.norm, tok.stem, w.norm, w.stem) != MatchKind::none) {
        ++hits;
        break;
      }
    }
  }
  return hits;
}

int extract_npe(std::span<const Token> tokens, const TopicList& topics, const Matcher& matcher,
                const WindowConfig& cfg) {
  int npe = 0;
  for (const auto& topic : topics.topics()) {
    SetTable table(tokens, topic.words, matcher);
    if (first_evidence_window(table, tokens.size(), cfg)) ++npe;
  }
  return npe;
}

int topic_sentence_count(const std::vector<std::vector<Token>>& sentences, const TopicList& topics,
                         const Matcher& matcher) {
  return static_cast<int>(std::count_if(sentences.begin(), sentences.end(), [&](const auto& s) {
    return sentence_mentions_topic(s, topics, matcher);
  }));
}

int extract_con(const std::vector<std::vector<Token>>& sentences, const TopicList& topics, const Matcher& matcher) {
  return topic_sentence_count(sentences, topics, matcher) < 3 ? 1 : 0;
}

std::vector<int> extract_spc(std::span<const Token> tokens, const ExampleList& examples, const Matcher& matcher,
                             const WindowConfig& cfg) {
  std::vector<int> spc(examples.partition().size(), 0);
  const auto& ex = examples.examples();
  for (std::size_t i = 0; i < ex.size(); ++i) {
    SetTable table(tokens, ex[i].words, matcher);
    if (first_evidence_window(table, tokens.size(), cfg)) ++spc[examples.slot(i)];
  }
  return spc;
}

int extract_woc(std::span<const Token> tokens) { return static_cast<int>(tokens.size()); }

EvidenceFeatures extract_features(std::string_view text, const TopicList& topics, const ExampleList& examples,
                                  const Matcher& matcher, const WindowConfig& cfg) {
  auto tokens = text::tokenize(text);
  EvidenceFeatures f;
  f.npe = extract_npe(tokens, topics, matcher, cfg);
  f.con = extract_con(tokenize_sentences(text), topics, matcher);
  f.spc = extract_spc(tokens, examples, matcher, cfg);
  f.woc = extract_woc(tokens);
  return f;
}

EvidenceFeatures extract_features(const corpus::Essay& essay, const TopicList& topics, const ExampleList& examples,
                                  const Matcher& matcher, const WindowConfig& cfg) {
  return extract_features(essay.text, topics, examples, matcher, cfg);
}

Explanation explain(std::string_view text, const TopicList& topics, const ExampleList& examples,
                    const Matcher& matcher, const WindowConfig& cfg) {
  Explanation out;
  out.features = extract_features(text, topics, examples, matcher, cfg);
  auto tokens = text::tokenize(text);
  for (const auto& ex : examples.examples()) {
    SetTable table(tokens, ex.words, matcher);
    auto win = first_evidence_window(table, tokens.size(), cfg);
    if (!win) continue;
    ExampleEvidence ev;
    ev.topic = ex.topic;
    ev.example_id = ex.id;
    ev.char_begin = tokens[win->begin].begin;
    ev.char_end = tokens[win->end - 1].end;
    for (std::size_t w = 0; w < ex.words.size(); ++w) {
      const Token* best = nullptr;
      MatchKind kind = MatchKind::none;
      for (std::size_t t = win->begin; t < win->end; ++t) {
        auto k = table.at(t, w);
        if (k == MatchKind::exact) {
          best = &tokens[t];
          kind = k;
          break;
        }
        if (k == MatchKind::embedding && !best) {
          best = &tokens[t];
          kind = k;
        }
      }
      if (best) ev.words.push_back({ex.words[w].norm, best->surface, kind});
    }
    out.examples.push_back(std::move(ev));
  }
  return out;
}

}  // namespace evscore::evidence
