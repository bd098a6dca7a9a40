#include "evscore/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "evscore/errors.hpp"
#include "evscore/text.hpp"

namespace evscore::corpus {

std::string_view to_string(GradeBand band) { return band == GradeBand::lower ? "lower" : "higher"; }

GradeBand parse_grade_band(std::string_view s) {
  if (s == "lower") return GradeBand::lower;
  if (s == "higher") return GradeBand::higher;
  throw InputError("unknown grade band '" + std::string(s) + "' (expected lower|higher)");
}

int Essay::label() const {
  if (!score_rater1) throw InputError("essay '" + id + "' has no first-rater score");
  return *score_rater1;
}

void validate(const Essay& e) {
  if (e.id.empty()) throw InputError("essay with empty id");
  for (auto score : {e.score_rater1, e.score_rater2}) {
    if (score && (*score < 1 || *score > 4)) {
      throw InputError("essay '" + e.id + "': score " + std::to_string(*score) + " outside 1..4");
    }
  }
  if (std::all_of(e.text.begin(), e.text.end(), [](unsigned char c) { return std::isspace(c); })) {
    throw InputError("essay '" + e.id + "': empty text");
  }
}

EssayCollection::EssayCollection(std::string name, std::vector<Essay> essays)
    : name_(std::move(name)), essays_(std::move(essays)) {
  std::unordered_set<std::string> seen;
  for (const auto& e : essays_) {
    validate(e);
    if (!seen.insert(e.id).second) throw InputError("duplicate essay id '" + e.id + "'");
  }
}

EssayCollection EssayCollection::graded() const {
  std::vector<Essay> out;
  std::copy_if(essays_.begin(), essays_.end(), std::back_inserter(out), [](const Essay& e) { return e.graded(); });
  return {name_, std::move(out)};
}

EssayCollection EssayCollection::ungraded() const {
  std::vector<Essay> out;
  std::copy_if(essays_.begin(), essays_.end(), std::back_inserter(out), [](const Essay& e) { return !e.graded(); });
  return {name_ + "/ungraded", std::move(out)};
}

std::array<std::size_t, 4> EssayCollection::class_counts() const {
  std::array<std::size_t, 4> counts{};
  for (const auto& e : essays_)
    if (e.score_rater1) ++counts[static_cast<std::size_t>(*e.score_rater1 - 1)];
  return counts;
}

Format parse_format(std::string_view s) {
  if (s == "delimited" || s == "csv") return Format::delimited;
  if (s == "record-per-line" || s == "jsonl") return Format::record_per_line;
  throw InputError("unknown corpus format '" + std::string(s) + "'");
}

std::string_view to_string(Format f) { return f == Format::delimited ? "delimited" : "record-per-line"; }

namespace {

std::optional<int> parse_score(const std::string& field, std::size_t line) {
  if (field.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    int v = std::stoi(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw InputError("line " + std::to_string(line) + ": score '" + field + "' is not an integer");
  }
}

// Reads one RFC 4180 record. Returns false at end of input. `line` is
// advanced past every physical line consumed.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  int c = in.peek();
  if (c == std::char_traits<char>::eof()) return false;
  ++line;
  std::size_t start_line = line;
  std::string field;
  bool quoted = false;
  bool after_quote = false;
  while (true) {
    c = in.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw InputError("line " + std::to_string(start_line) + ": unterminated quoted field");
      fields.push_back(std::move(field));
      return true;
    }
    char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      after_quote = false;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && in.peek() == '\n') in.get();
      fields.push_back(std::move(field));
      return true;
    } else if (ch == '"') {
      if (!field.empty() || after_quote) {
        throw InputError("line " + std::to_string(line) + ": stray quote inside unquoted field");
      }
      quoted = true;
    } else {
      if (after_quote) throw InputError("line " + std::to_string(line) + ": text after closing quote");
      field.push_back(ch);
    }
  }
}

Essay essay_from_fields(std::vector<std::string>& f, std::size_t line) {
  Essay e;
  e.id = std::move(f[0]);
  try {
    e.grade_band = parse_grade_band(f[1]);
  } catch (const InputError& err) {
    throw InputError("line " + std::to_string(line) + ": " + err.what());
  }
  e.score_rater1 = parse_score(f[2], line);
  e.score_rater2 = parse_score(f[3], line);
  e.text = std::move(f[4]);
  return e;
}

EssayCollection read_delimited(std::istream& in, std::string name) {
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!read_csv_record(in, fields, line)) throw InputError("empty corpus: no header row");
  const std::vector<std::string> header = {"id", "grade_band", "score1", "score2", "text"};
  if (fields != header) throw InputError("line 1: expected header id,grade_band,score1,score2,text");
  std::vector<Essay> essays;
  while (true) {
    std::size_t record_line = line + 1;
    if (!read_csv_record(in, fields, line)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != 5) {
      throw InputError("line " + std::to_string(record_line) + ": expected 5 fields, found " +
                       std::to_string(fields.size()));
    }
    essays.push_back(essay_from_fields(fields, record_line));
  }
  return {std::move(name), std::move(essays)};
}

std::optional<int> json_score(const nlohmann::json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (j[key].is_string()) return parse_score(j[key].get<std::string>(), line);
  if (!j[key].is_number_integer()) {
    throw InputError("line " + std::to_string(line) + ": field '" + key + "' must be an integer");
  }
  return j[key].get<int>();
}

EssayCollection read_jsonl(std::istream& in, std::string name) {
  std::vector<Essay> essays;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& err) {
      throw InputError("line " + std::to_string(line) + ": malformed record (" + err.what() + ")");
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("grade_band") || !j.contains("text") ||
        !j["id"].is_string() || !j["grade_band"].is_string() || !j["text"].is_string()) {
      throw InputError("line " + std::to_string(line) + ": record needs string fields id, grade_band, text");
    }
    Essay e;
    e.id = j["id"].get<std::string>();
    try {
      e.grade_band = parse_grade_band(j["grade_band"].get<std::string>());
    } catch (const InputError& err) {
      throw InputError("line " + std::to_string(line) + ": " + err.what());
    }
    e.score_rater1 = json_score(j, "score1", line);
    e.score_rater2 = json_score(j, "score2", line);
    e.text = j["text"].get<std::string>();
    essays.push_back(std::move(e));
  }
  return {std::move(name), std::move(essays)};
}

void write_csv_field(std::ostream& out, const std::string& s, bool force_quote) {
  if (!force_quote && s.find_first_of(",\"\r\n") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::string score_field(const std::optional<int>& s) { return s ? std::to_string(*s) : std::string(); }

}  // namespace

EssayCollection read_corpus(std::istream& in, Format format, std::string name) {
  auto c = format == Format::delimited ? read_delimited(in, std::move(name)) : read_jsonl(in, std::move(name));
  if (c.empty()) throw InputError("empty corpus: no essay records");
  return c;
}

EssayCollection load_corpus(const std::filesystem::path& path, Format format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open corpus file " + path.string());
  try {
    return read_corpus(in, format, path.stem().string());
  } catch (const InputError& err) {
    throw InputError(path.string() + ": " + err.what());
  }
}

void write_corpus(std::ostream& out, const EssayCollection& c, Format format) {
  if (format == Format::delimited) {
    out << "id,grade_band,score1,score2,text\n";
    for (const auto& e : c) {
      write_csv_field(out, e.id, false);
      out << ',' << to_string(e.grade_band) << ',' << score_field(e.score_rater1) << ','
          << score_field(e.score_rater2) << ',';
      write_csv_field(out, e.text, true);
      out << '\n';
    }
    return;
  }
  for (const auto& e : c) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["grade_band"] = to_string(e.grade_band);
    j["score1"] = e.score_rater1 ? nlohmann::ordered_json(*e.score_rater1) : nlohmann::ordered_json(nullptr);
    j["score2"] = e.score_rater2 ? nlohmann::ordered_json(*e.score_rater2) : nlohmann::ordered_json(nullptr);
    j["text"] = e.text;
    out << j.dump() << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, const EssayCollection& c, Format format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write corpus file " + path.string());
  write_corpus(out, c, format);
}

void validate(const SplitSpec& spec) {
  double sum = 0;
  for (double r : spec.ratios) {
    if (!(r >= 0.0 && r <= 1.0)) throw InputError("split ratios must lie in [0,1]");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("split ratios must sum to 1");
}

std::array<std::size_t, 3> allocate(std::size_t count, const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> parts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    double quota = ratios[p] * static_cast<double>(count);
    double fl = std::floor(quota);
    parts[p] = static_cast<std::size_t>(fl);
    remainder[p] = quota - fl;
    assigned += parts[p];
  }
  // Rounding in the quotas can leave assigned a hair above count.
  while (assigned > count) {
    auto p = static_cast<std::size_t>(std::max_element(parts.begin(), parts.end()) - parts.begin());
    --parts[p];
    --assigned;
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < count; i = (i + 1) % 3) {
    if (ratios[order[i]] == 0.0) continue;
    ++parts[order[i]];
    ++assigned;
  }
  return parts;
}

Split stratified_split(const EssayCollection& c, const SplitSpec& spec) {
  validate(spec);
  std::array<std::vector<std::size_t>, 4> by_class;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto& e = c[i];
    if (!e.graded()) throw InputError("stratified_split: essay '" + e.id + "' is ungraded");
    by_class[static_cast<std::size_t>(*e.score_rater1 - 1)].push_back(i);
  }
  std::size_t active_parts = static_cast<std::size_t>(
      std::count_if(spec.ratios.begin(), spec.ratios.end(), [](double r) { return r > 0.0; }));

  std::mt19937_64 rng(spec.seed);
  std::array<std::vector<std::size_t>, 3> members;
  for (std::size_t k = 0; k < 4; ++k) {
    auto& idx = by_class[k];
    if (idx.empty()) continue;
    if (idx.size() < active_parts) {
      throw InputError("stratified_split: score class " + std::to_string(k + 1) + " has " +
                       std::to_string(idx.size()) + " essays, fewer than the " + std::to_string(active_parts) +
                       " parts it must populate");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    auto alloc = allocate(idx.size(), spec.ratios);
    std::size_t pos = 0;
    for (std::size_t p = 0; p < 3; ++p) {
      for (std::size_t n = 0; n < alloc[p]; ++n) members[p].push_back(idx[pos++]);
    }
  }

  auto build = [&](std::size_t p, const char* suffix) {
    std::sort(members[p].begin(), members[p].end());
    std::vector<Essay> essays;
    essays.reserve(members[p].size());
    for (auto i : members[p]) essays.push_back(c[i]);
    return EssayCollection(c.name() + "/" + suffix, std::move(essays));
  };
  return {build(0, "embed_train"), build(1, "dev"), build(2, "test")};
}

std::vector<std::vector<std::string>> embedding_corpus(const EssayCollection& embed_train,
                                                       const EssayCollection& ungraded) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(embed_train.size() + ungraded.size());
  for (const auto* coll : {&embed_train, &ungraded}) {
    for (const auto& e : *coll) {
      std::vector<std::string> norms;
      for (auto& t : text::tokenize(e.text)) norms.push_back(std::move(t.norm));
      docs.push_back(std::move(norms));
    }
  }
  return docs;
}

}  // namespace evscore::corpus
