// Writes a ready-to-run workspace: a generated essay corpus with planted
// evidence, its topic and example lists, and a config for the evscore CLI.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "evscore/corpus.hpp"
#include "evscore/errors.hpp"
#include "evscore/synthetic.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic evscore workspace"};
  fs::path dir;
  evscore::synthetic::GeneratorParams gp;
  app.add_option("dir", dir, "output directory")->required();
  app.add_option("--graded", gp.graded, "graded essays")->capture_default_str();
  app.add_option("--ungraded", gp.ungraded, "ungraded essays")->capture_default_str();
  app.add_option("--misspell-rate", gp.misspell_rate, "share of misspelled target words")->capture_default_str();
  app.add_option("--label-noise", gp.label_noise, "share of labels moved one step")->capture_default_str();
  app.add_option("--seed", gp.seed, "generator and run seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(dir);
    const auto& world = evscore::synthetic::village_world();
    auto g = evscore::synthetic::generate(world, gp);
    evscore::corpus::save_corpus(dir / "corpus.csv", g.essays, evscore::corpus::Format::delimited);
    std::ofstream(dir / "topics.txt") << evscore::synthetic::topic_list_text(world);
    std::ofstream(dir / "examples.txt") << evscore::synthetic::example_list_text(world);
    nlohmann::json config = {{"seed", gp.seed},
                             {"output_dir", "run"},
                             {"corpus", "corpus.csv"},
                             {"topics", "topics.txt"},
                             {"examples", "examples.txt"}};
    std::ofstream(dir / "config.json") << config.dump(2) << '\n';
    std::cout << "wrote " << g.essays.size() << " essays to " << (dir / "corpus.csv").string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
