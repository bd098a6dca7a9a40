#include <doctest.h>

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "evscore/text.hpp"

using namespace evscore::text;

namespace {

std::vector<std::string> norms(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& t : tokenize(s)) out.push_back(t.norm);
  return out;
}

}  // namespace

TEST_CASE("tokenize keeps order and strips edge punctuation") {
  CHECK(norms("Bed nets are used") == std::vector<std::string>{"bed", "nets", "are", "used"});
  CHECK(norms("").empty());
  CHECK(norms("   \n\t ").empty());
  CHECK(norms("2004 and 2008.") == std::vector<std::string>{"2004", "and", "2008"});
  CHECK(norms("\"Well-being,\" isn't (it)?") == std::vector<std::string>{"well-being", "isn't", "it"});
  CHECK(norms("... -- !!") .empty());
}

TEST_CASE("typographic punctuation") {
  CHECK(normalize("\xE2\x80\x9CPoverty\xE2\x80\x9D") == "poverty");
  CHECK(normalize("don\xE2\x80\x99t") == "don't");
  CHECK(normalize("end\xE2\x80\xA6") == "end");
  CHECK(normalize("\xE2\x80\x94sauri") == "sauri");
}

TEST_CASE("token offsets point back into the text") {
  std::string text = "  The hospital,  has WATER.";
  auto toks = tokenize(text);
  REQUIRE(toks.size() == 4);
  for (const auto& t : toks) CHECK(text.substr(t.begin, t.end - t.begin) == t.surface);
  CHECK(toks[1].surface == "hospital,");
  CHECK(toks[3].norm == "water");
  CHECK(toks[3].stem == "water");
}

TEST_CASE("tokenize is idempotent on norms") {
  std::mt19937_64 rng(11);
  const std::string alphabet = "abcXYZ.,'-!?\"() 0123 ";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 60);
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    for (std::size_t n = len(rng); n > 0; --n) s.push_back(alphabet[pick(rng)]);
    auto first = norms(s);
    std::string joined;
    for (const auto& w : first) joined += w + " ";
    CHECK(norms(joined) == first);
    for (const auto& t : tokenize(s)) {
      CHECK(!t.norm.empty());
      CHECK(!t.stem.empty());
    }
  }
}

TEST_CASE("sentence splitting") {
  CHECK(split_sentences("A b. C d!") == std::vector<std::string>{"A b.", "C d!"});
  CHECK(split_sentences("no terminator here") == std::vector<std::string>{"no terminator here"});
  CHECK(split_sentences("").empty());
  CHECK(split_sentences("  \n ").empty());
  // A period inside a token is not a boundary.
  CHECK(split_sentences("It cost 2.50 dollars. Fine?") == std::vector<std::string>{"It cost 2.50 dollars.", "Fine?"});
}

TEST_CASE("sentences preserve every non-terminator character") {
  std::mt19937_64 rng(5);
  const std::string alphabet = "ab .!?\n";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 40);
  auto strip = [](std::string_view s) {
    std::string out;
    for (char c : s) {
      if (c != '.' && c != '!' && c != '?' && c != ' ' && c != '\n') out.push_back(c);
    }
    return out;
  };
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    for (std::size_t n = len(rng); n > 0; --n) s.push_back(alphabet[pick(rng)]);
    std::string cat;
    for (const auto& sent : split_sentences(s)) {
      CHECK(!sent.empty());
      cat += sent;
    }
    CHECK(strip(cat) == strip(s));
  }
}

TEST_CASE("porter single pass on published vocabulary") {
  // Word/stem pairs from the reference Porter vocabulary.
  const std::vector<std::pair<std::string, std::string>> pairs = {
      {"caresses", "caress"},   {"ponies", "poni"},         {"ties", "ti"},
      {"caress", "caress"},     {"cats", "cat"},            {"feed", "feed"},
      {"agreed", "agre"},       {"plastered", "plaster"},   {"bled", "bled"},
      {"motoring", "motor"},    {"sing", "sing"},           {"conflated", "conflat"},
      {"troubled", "troubl"},   {"sized", "size"},          {"hopping", "hop"},
      {"tanned", "tan"},        {"falling", "fall"},        {"hissing", "hiss"},
      {"fizzed", "fizz"},       {"failing", "fail"},        {"filing", "file"},
      {"happy", "happi"},       {"sky", "sky"},             {"relational", "relat"},
      {"conditional", "condit"}, {"rational", "ration"},    {"valenci", "valenc"},
      {"hesitanci", "hesit"},   {"digitizer", "digit"},     {"conformabli", "conform"},
      {"radicalli", "radic"},   {"differentli", "differ"},  {"vileli", "vile"},
      {"analogousli", "analog"}, {"vietnamization", "vietnam"}, {"predication", "predic"},
      {"operator", "oper"},     {"feudalism", "feudal"},    {"decisiveness", "decis"},
      {"hopefulness", "hope"},  {"callousness", "callous"}, {"formaliti", "formal"},
      {"sensitiviti", "sensit"}, {"sensibiliti", "sensibl"}, {"triplicate", "triplic"},
      {"formative", "form"},    {"formalize", "formal"},    {"electriciti", "electr"},
      {"electrical", "electr"}, {"hopeful", "hope"},        {"goodness", "good"},
      {"revival", "reviv"},     {"allowance", "allow"},     {"inference", "infer"},
      {"airliner", "airlin"},   {"gyroscopic", "gyroscop"}, {"adjustable", "adjust"},
      {"defensible", "defens"}, {"irritant", "irrit"},      {"replacement", "replac"},
      {"adjustment", "adjust"}, {"dependent", "depend"},    {"adoption", "adopt"},
      {"communism", "commun"},  {"activate", "activ"},      {"angulariti", "angular"},
      {"homologous", "homolog"}, {"effective", "effect"},   {"bowdlerize", "bowdler"},
      {"probate", "probat"},    {"rate", "rate"},           {"cease", "ceas"},
      {"generalizations", "gener"}, {"oscillators", "oscil"}, {"running", "run"},
      {"connected", "connect"}, {"hospitals", "hospit"},    {"poverty", "poverti"},
  };
  for (const auto& [w, s] : pairs) {
    CAPTURE(w);
    CHECK(porter_stem_once(w) == s);
  }
}

TEST_CASE("stem examples") {
  CHECK(stem("running") == "run");
  CHECK(stem("went") == "went");  // irregular forms stay apart
  CHECK(stem("go") == "go");
  CHECK(stem("2008") == "2008");
  CHECK(stem("well-being") == "well-being");
  CHECK(stem("agreed") == stem(stem("agreed")));
  CHECK(stem("a") == "a");
}

TEST_CASE("stem is idempotent over a fuzz set") {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> suffixes = {"",     "s",    "es",   "ed",   "ing",   "ational", "ization", "ness",
                                             "ful",  "ly",   "ement", "ize", "ate",   "ive",     "ous",     "al",
                                             "ance", "ence", "er",   "ic",   "able",  "ion",     "iti",     "y"};
  std::uniform_int_distribution<int> letter('a', 'z');
  std::uniform_int_distribution<std::size_t> len(1, 9), suf(0, suffixes.size() - 1);
  for (int i = 0; i < 10000; ++i) {
    std::string w;
    for (std::size_t n = len(rng); n > 0; --n) w.push_back(static_cast<char>(letter(rng)));
    w += suffixes[suf(rng)];
    auto s = stem(w);
    CAPTURE(w);
    CHECK(!s.empty());
    CHECK(stem(s) == s);
  }
}
