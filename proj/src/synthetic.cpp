#include "evscore/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "evscore/hash.hpp"

namespace evscore::synthetic {

const World& village_world() {
  static const World world = [] {
    World w;
    w.topics = {
        {"hospital", {"hospital", "medicine", "charge", "water", "connected", "generator", "electricity", "bed", "nets"}},
        {"farming", {"hunger", "crisis", "fertilizer", "seeds", "harvest", "crops"}},
        {"school", {"school", "fees", "lunch", "serve"}},
        {"poverty", {"poverty", "fight", "achievable", "lifetime"}},
    };
    w.examples = {
        {"hospital", "medicine", {"medicine", "charge"},
         {"the hospital has medicine free of charge", "medicine was given out free of charge",
          "they got medicine and paid no charge for it"}},
        {"hospital", "water", {"water", "connected"},
         {"water was connected to the hospital", "the hospital got clean water connected to it",
          "they connected water pipes to the hospital"}},
        {"hospital", "electricity", {"generator", "electricity"},
         {"the hospital has a generator for electricity", "a generator gives the hospital electricity",
          "there is electricity from a new generator"}},
        {"hospital", "nets", {"bed", "nets"},
         {"bed nets are used in every sleeping site", "every family sleeps under bed nets now",
          "bed nets keep people safe at night"}},
        {"farming", "fertilizer", {"fertilizer", "seeds"},
         {"farmers got fertilizer and seeds", "fertilizer and seeds helped the farms grow",
          "they gave out seeds and fertilizer"}},
        {"farming", "hunger", {"hunger", "crisis"},
         {"the hunger crisis has been addressed", "there is no more hunger crisis in sauri",
          "they fixed the hunger crisis"}},
        {"farming", "harvest", {"harvest", "crops"},
         {"the crops gave a big harvest", "the harvest of crops was much better",
          "farmers had a good harvest of crops"}},
        {"school", "fees", {"school", "fees"},
         {"the school has no fees anymore", "kids do not pay school fees now", "school fees were removed"}},
        {"school", "lunch", {"lunch", "serve"},
         {"they serve lunch to the kids", "the school started to serve lunch", "now they serve a hot lunch every day"}},
        {"poverty", "fight", {"fight", "poverty"},
         {"winning the fight against poverty is possible", "the fight against poverty is working",
          "people can win the fight against poverty"}},
        {"poverty", "lifetime", {"achievable", "lifetime"},
         {"ending poverty is achievable in our lifetime", "this goal is achievable in our lifetime",
          "it is achievable within a lifetime"}},
    };
    w.theses = {"the author convinced me that poverty can end",
                "i agree that poverty can be beaten in sauri",
                "poverty is a problem that people can solve",
                "the article shows that poverty is going away",
                "getting rid of poverty is possible for the people of sauri"};
    w.openers = {"i think", "in my opinion", "the author says", "it is clear that", "i believe", "to me it seems"};
    w.clauses = {"the village is doing better",
                 "life can get better for people",
                 "people worked very hard",
                 "the united nations helped a lot",
                 "things changed between 2004 and 2008",
                 "the article was convincing",
                 "they will reach the goal",
                 "families had a hard life before",
                 "the people are happy now",
                 "it was a big change for everyone"};
    return w;
  }();
  return world;
}

std::string topic_list_text(const World& world) {
  std::ostringstream os;
  for (const auto& [name, words] : world.topics) {
    os << name << ':';
    for (const auto& w : words) os << ' ' << w;
    os << '\n';
  }
  return os.str();
}

std::string example_list_text(const World& world) {
  std::ostringstream os;
  for (const auto& ex : world.examples) {
    os << ex.topic << " | " << ex.id << ':';
    for (const auto& w : ex.key_words) os << ' ' << w;
    os << '\n';
  }
  return os.str();
}

int planted_score(std::size_t k) { return static_cast<int>(std::min<std::size_t>(1 + k / 3, 4)); }

namespace {

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string misspell(const std::string& sentence, const GeneratorParams& p, std::mt19937_64& rng) {
  std::bernoulli_distribution flip(p.misspell_rate);
  std::istringstream in(sentence);
  std::ostringstream out;
  bool first = true;
  for (std::string w; in >> w;) {
    if (w == p.target && flip(rng)) w = p.misspelling;
    out << (first ? "" : " ") << w;
    first = false;
  }
  return out.str();
}

}  // namespace

GeneratedCorpus generate(const World& world, const GeneratorParams& p, const std::string& name) {
  std::mt19937_64 rng(p.seed);
  // Score mix roughly like the Space corpus: 26/38/25/11 percent.
  std::discrete_distribution<int> band({26, 38, 25, 11});
  std::bernoulli_distribution noisy(p.label_noise);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::size_t> filler_count(p.min_filler, p.max_filler);
  std::uniform_int_distribution<std::size_t> opener(0, world.openers.size() - 1);
  std::uniform_int_distribution<std::size_t> clause(0, world.clauses.size() - 1);
  std::uniform_int_distribution<std::size_t> thesis(0, world.theses.empty() ? 0 : world.theses.size() - 1);
  const std::size_t n_examples = world.examples.size();

  GeneratedCorpus out;
  std::vector<corpus::Essay> essays;
  std::vector<std::size_t> order(n_examples);
  for (std::size_t i = 0; i < p.graded + p.ungraded; ++i) {
    int s = band(rng);  // 0..3
    std::uniform_int_distribution<std::size_t> within(0, 2);
    std::size_t k = std::min(n_examples, static_cast<std::size_t>(3 * s) + within(rng));

    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::string> sentences;
    for (std::size_t j = 0; j < k; ++j) {
      const auto& ex = world.examples[order[j]];
      std::uniform_int_distribution<std::size_t> pick(0, ex.sentences.size() - 1);
      sentences.push_back(misspell(ex.sentences[pick(rng)], p, rng));
    }
    for (std::size_t f = filler_count(rng); f > 0; --f) {
      sentences.push_back(world.openers[opener(rng)] + " " + world.clauses[clause(rng)]);
    }
    std::shuffle(sentences.begin(), sentences.end(), rng);
    if (!world.theses.empty()) sentences.insert(sentences.begin(), misspell(world.theses[thesis(rng)], p, rng));
    std::string text;
    for (const auto& s : sentences) text += (text.empty() ? "" : " ") + capitalize(s) + ".";

    corpus::Essay e;
    std::ostringstream id;
    id << name << '-' << i;
    e.id = id.str();
    e.text = std::move(text);
    e.grade_band = coin(rng) ? corpus::GradeBand::lower : corpus::GradeBand::higher;
    if (i < p.graded) {
      int score = planted_score(k);
      if (noisy(rng)) score += coin(rng) ? 1 : -1;
      score = std::clamp(score, 1, 4);
      e.score_rater1 = score;
    }
    essays.push_back(std::move(e));
    out.planted.push_back(k);
  }
  out.essays = corpus::EssayCollection(name, std::move(essays));
  return out;
}

}  // namespace evscore::synthetic
