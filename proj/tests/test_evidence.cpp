#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "evscore/errors.hpp"
#include "evscore/evidence.hpp"
#include "evscore/synthetic.hpp"
#include "oracles.hpp"

using namespace evscore;
using namespace evscore::evidence;

namespace {

TopicList topics_from(const std::string& s) {
  std::istringstream in(s);
  return TopicList::parse(in);
}

ExampleList examples_from(const std::string& s, const TopicList& t) {
  std::istringstream in(s);
  return ExampleList::parse(in, t);
}

std::vector<Token> toks(std::string_view s) { return text::tokenize(s); }

const char* kSampleEssay =
    "In my opinion I think that they will achieve it in lifetime. During the years threw 2004 and 2008 they made "
    "progress. People didn't have the money to buy the stuff in 2004. The hospital was packed with patients and they "
    "didn't have alot of treatment in 2004. In 2008 it changed the hospital had medicine, free of charge, and for all "
    "the common dieases. Water was connected to the hospital and has a generator for electricity. Everybody has net "
    "in their site. The hunger crisis has been addressed with fertilizer and seeds, as well as the tools needed to "
    "maintain the food. The school has no fees and they serve lunch. To me that's sounds like it is going achieve it "
    "in the lifetime.";

}  // namespace

TEST_CASE("window enumeration") {
  CHECK(window_ranges(10, {5, 1}).size() == 6);
  CHECK(window_ranges(10, {5, 1}).back() == TokenRange{5, 10});
  CHECK(window_ranges(3, {5, 1}) == std::vector<TokenRange>{{0, 3}});
  CHECK(window_ranges(0, {5, 1}).empty());
  CHECK(window_ranges(12, {10, 3}) == std::vector<TokenRange>{{0, 10}, {3, 12}});
  CHECK(window_ranges(10, {10, 4}) == std::vector<TokenRange>{{0, 10}});
  for (std::size_t n = 0; n < 40; ++n) {
    for (std::size_t size = 2; size < 12; ++size) {
      for (std::size_t stride = 1; stride < 6; ++stride) {
        auto got = window_ranges(n, {size, stride});
        auto want = oracle::windows(n, size, stride);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          CHECK(got[i].begin == want[i].first);
          CHECK(got[i].end == want[i].second);
        }
      }
    }
  }
  CHECK_THROWS_AS((WindowConfig{1, 1}.validate()), InputError);
  CHECK_THROWS_AS((WindowConfig{5, 0}.validate()), InputError);
}

TEST_CASE("window hits count distinct list words") {
  auto words = make_word_set({"water", "connected", "hospital"});
  auto m = Matcher::exact();
  CHECK(window_hits(toks("water was connected to the hospital"), words, m) == 3);
  CHECK(window_hits(toks("they serve lunch"), words, m) == 0);
  CHECK(window_hits(toks("water water water"), words, m) == 1);
  CHECK(window_hits(toks("Hospitals connecting"), words, m) == 2);  // stems
}

TEST_CASE("list parsing") {
  auto t = topics_from("# comment\nhospital: hospital water Water\n\nschool: school fees\n");
  REQUIRE(t.size() == 2);
  CHECK(t.topics()[0].words.size() == 2);  // duplicate stem dropped
  auto e = examples_from("school | fees: school fees\nhospital | water: water hospital\n", t);
  CHECK(e.partition() == std::vector<std::string>{"hospital", "school"});
  CHECK(e.slot(0) == 1);
  CHECK(e.slot(1) == 0);
  CHECK(feature_schema(e) == std::vector<std::string>{"npe", "con", "spc:hospital", "spc:school", "woc"});

  CHECK_THROWS_AS(topics_from(""), InputError);
  CHECK_THROWS_AS(topics_from("a: x\na: y\n"), InputError);
  CHECK_THROWS_AS(topics_from("a:\n"), InputError);
  CHECK_THROWS_AS(topics_from("no colon here\n"), InputError);
  CHECK_THROWS_AS(examples_from("school | one: fees\n", t), InputError);
  CHECK_THROWS_AS(examples_from("school | one: fees fee\n", t), InputError);  // one distinct stem
  CHECK_THROWS_AS(examples_from("farming | x: seeds crops\n", t), InputError);
  CHECK_THROWS_AS(examples_from("school | x: a b\nschool | x: c d\n", t), InputError);
}

TEST_CASE("NPE, CON, SPC and WOC on small cases") {
  auto t = topics_from("hospital: hospital water medicine\nschool: school fees lunch\nfarm: seeds hunger\n");
  auto e = examples_from("hospital | water: water hospital\nhospital | med: medicine hospital\nschool | fees: school fees\n", t);
  auto m = Matcher::exact();
  WindowConfig cfg;

  auto empty = extract_features("", t, e, m, cfg);
  CHECK(empty.npe == 0);
  CHECK(empty.con == 1);
  CHECK(empty.spc == std::vector<int>{0, 0});
  CHECK(empty.woc == 0);

  // Topic A evidenced in many windows still counts once.
  auto one = extract_features("Water was connected to the hospital. The hospital has water. Water, hospital.", t, e, m, cfg);
  CHECK(one.npe == 1);
  CHECK(one.spc == std::vector<int>{1, 0});

  CHECK(extract_woc(toks("Bed nets are used")) == 4);
  auto a = toks("The school has no fees.");
  auto b = toks("They serve lunch now");
  auto ab = toks("The school has no fees. They serve lunch now");
  CHECK(extract_woc(ab) == extract_woc(a) + extract_woc(b));

  auto sentences = [](std::string_view s) {
    std::vector<std::vector<Token>> out;
    for (const auto& x : text::split_sentences(s)) out.push_back(text::tokenize(x));
    return out;
  };
  CHECK(extract_con(sentences("Nothing here. Or here."), t, m) == 1);
  CHECK(extract_con(sentences("The school. The lunch. Nothing."), t, m) == 1);
  CHECK(extract_con(sentences("The school. The lunch. The hunger. Nothing."), t, m) == 0);
  CHECK(topic_sentence_count(sentences("The school. The lunch. The hunger. Nothing."), t, m) == 3);
}

TEST_CASE("window size bounds evidence") {
  auto t = topics_from("hospital: water hospital\n");
  auto e = examples_from("hospital | water: water hospital\n", t);
  auto m = Matcher::exact();
  std::string gap = "water a b c d e f g h hospital";  // 10 tokens apart by 9
  CHECK(extract_features(gap, t, e, m, {10, 1}).npe == 1);
  CHECK(extract_features(gap, t, e, m, {9, 1}).npe == 0);
  CHECK(extract_features(gap, t, e, m, {9, 1}).spc == std::vector<int>{0});
}

TEST_CASE("features agree with the brute-force oracle") {
  std::mt19937_64 rng(314);
  for (int i = 0; i < 300; ++i) {
    auto lists = oracle::random_lists(rng);
    auto model = oracle::random_model(rng);
    std::uniform_real_distribution<double> thr(0.2, 0.95);
    std::uniform_int_distribution<std::size_t> size(2, 12), stride(1, 4);
    WindowConfig cfg{size(rng), stride(rng)};
    auto essay = oracle::random_essay(rng);
    for (const auto& m : {Matcher::exact(), Matcher::embedding(model, thr(rng))}) {
      auto got = extract_features(essay, *lists.topics, *lists.examples, m, cfg);
      auto want = oracle::features(essay, *lists.topics, *lists.examples, m, cfg.size, cfg.stride);
      CAPTURE(essay);
      CHECK(got.npe == want.npe);
      CHECK(got.con == want.con);
      CHECK(got.spc == want.spc);
      CHECK(got.woc == want.woc);
    }
  }
}

TEST_CASE("embedding matching never loses evidence") {
  std::mt19937_64 rng(2718);
  for (int i = 0; i < 300; ++i) {
    auto lists = oracle::random_lists(rng);
    auto model = oracle::random_model(rng);
    auto essay = oracle::random_essay(rng);
    std::uniform_real_distribution<double> thr(0.0, 1.0);
    WindowConfig cfg;
    auto ex = extract_features(essay, *lists.topics, *lists.examples, Matcher::exact(), cfg);
    auto em = extract_features(essay, *lists.topics, *lists.examples, Matcher::embedding(model, thr(rng)), cfg);
    CHECK(em.npe >= ex.npe);
    CHECK(em.con <= ex.con);
    REQUIRE(em.spc.size() == ex.spc.size());
    for (std::size_t k = 0; k < em.spc.size(); ++k) CHECK(em.spc[k] >= ex.spc[k]);
    CHECK(em.npe <= static_cast<int>(lists.topics->size()));
    for (std::size_t k = 0; k < em.spc.size(); ++k) {
      CHECK(em.spc[k] <= static_cast<int>(lists.examples->examples_in(k)));
    }
  }
}

TEST_CASE("permuting topics permutes SPC") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    auto lists = oracle::random_lists(rng);
    auto shuffled_topics = lists.topics->topics();
    std::shuffle(shuffled_topics.begin(), shuffled_topics.end(), rng);
    TopicList t2(shuffled_topics);
    ExampleList e2(lists.examples->examples(), t2);
    auto essay = oracle::random_essay(rng);
    auto m = Matcher::exact();
    auto a = extract_features(essay, *lists.topics, *lists.examples, m, {});
    auto b = extract_features(essay, t2, e2, m, {});
    CHECK(a.npe == b.npe);
    CHECK(a.con == b.con);
    CHECK(a.woc == b.woc);
    const auto& pa = lists.examples->partition();
    const auto& pb = e2.partition();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t k = 0; k < pa.size(); ++k) {
      auto j = std::find(pb.begin(), pb.end(), pa[k]) - pb.begin();
      CHECK(a.spc[k] == b.spc[j]);
    }
  }
}

TEST_CASE("sample essay under the demonstration lists") {
  auto t = TopicList::load(EVSCORE_DATA_DIR "/demo/topics.txt");
  auto e = ExampleList::load(EVSCORE_DATA_DIR "/demo/examples.txt", t);
  auto x = explain(kSampleEssay, t, e, Matcher::exact(), {});
  std::string text = kSampleEssay;

  auto slot = [&](const std::string& topic) {
    const auto& p = e.partition();
    return std::find(p.begin(), p.end(), topic) - p.begin();
  };
  CHECK(x.features.spc[slot("hospital")] >= 1);
  CHECK(x.features.spc[slot("farming")] >= 1);
  CHECK(x.features.spc[slot("school")] >= 1);

  bool water = false, diseases = false;
  for (const auto& ev : x.examples) {
    CHECK(ev.char_begin < ev.char_end);
    CHECK(ev.char_end <= text.size());
    if (ev.example_id == "water") {
      water = true;
      CHECK(ev.topic == "hospital");
      auto span = text.substr(ev.char_begin, ev.char_end - ev.char_begin);
      CHECK(span.find("Water was connected") != std::string::npos);  // earliest window with two hits
      for (const auto& w : ev.words) CHECK(w.kind == MatchKind::exact);
    }
    diseases = diseases || ev.example_id == "common-diseases";
  }
  CHECK(water);
  CHECK_FALSE(diseases);  // "dieases" is out of reach of exact matching

  auto empty = explain("", t, e, Matcher::exact(), {});
  CHECK(empty.examples.empty());
  CHECK(empty.features.woc == 0);
}

TEST_CASE("generated essays carry exactly their planted evidence") {
  const auto& world = synthetic::village_world();
  synthetic::GeneratorParams gp;
  gp.graded = 300;
  gp.ungraded = 0;
  gp.misspell_rate = 0.0;
  gp.seed = 99;
  auto g = synthetic::generate(world, gp);
  auto t = topics_from(synthetic::topic_list_text(world));
  auto e = examples_from(synthetic::example_list_text(world), t);
  for (std::size_t i = 0; i < g.essays.size(); ++i) {
    auto f = extract_features(g.essays[i].text, t, e, Matcher::exact(), {});
    int total = 0;
    for (int s : f.spc) total += s;
    CAPTURE(g.essays[i].text);
    CHECK(total == static_cast<int>(g.planted[i]));
  }
}
