#include "evscore/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "evscore/errors.hpp"
#include "evscore/hash.hpp"
#include "evscore/selection.hpp"

namespace evscore::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

corpus::Format format_for(const RunConfig& cfg, const fs::path& p) {
  if (cfg.format) return *cfg.format;
  return p.extension() == ".jsonl" ? corpus::Format::record_per_line : corpus::Format::delimited;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

std::string model_name(embedding::Algorithm a, std::size_t dimension, std::size_t window) {
  std::ostringstream os;
  os << embedding::to_string(a) << "-d" << dimension << "-w" << window;
  return os.str();
}

RunConfig load_config(const fs::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("malformed config " + path.string() + ": " + e.what());
  }

  RunConfig c;
  c.config_dir = fs::absolute(path).parent_path();
  try {
    if (overrides.seed) {
      c.seed = *overrides.seed;
    } else if (j.contains("seed") && j["seed"].is_number_unsigned()) {
      c.seed = j["seed"].get<std::uint64_t>();
    } else {
      throw InputError("config needs a non-negative integer \"seed\"");
    }

    fs::path out = overrides.output_dir ? *overrides.output_dir : fs::path(get_or<std::string>(j, "output_dir", "run"));
    if (out.is_relative()) {
      const char* home = std::getenv("EVSCORE_HOME");
      out = (home && *home) ? fs::path(home) / out : c.config_dir / out;
    }
    c.output_dir = out.lexically_normal();

    if (j.contains("format")) c.format = corpus::parse_format(j["format"].get<std::string>());
    auto path_of = [&](const char* key) -> std::optional<fs::path> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return resolve(c.config_dir, j[key].get<std::string>());
    };
    c.corpus = path_of("corpus");
    c.topics = path_of("topics");
    c.examples = path_of("examples");
    fs::path split_dir = c.output_dir / "split";
    c.embed_train = path_of("embed_train").value_or(split_dir / "embed_train.csv");
    c.dev = path_of("dev").value_or(split_dir / "dev.csv");
    c.test = path_of("test").value_or(split_dir / "test.csv");
    c.ungraded = path_of("ungraded").value_or(split_dir / "ungraded.csv");

    if (j.contains("split")) {
      auto r = j["split"].value("ratios", std::vector<double>{0.40, 0.20, 0.40});
      if (r.size() != 3) throw InputError("split.ratios needs three values");
      c.ratios = {r[0], r[1], r[2]};
    }
    if (j.contains("window")) {
      c.window.size = j["window"].value("size", c.window.size);
      c.window.stride = j["window"].value("stride", c.window.stride);
    }
    c.window.validate();

    if (j.contains("embedding")) {
      const auto& e = j["embedding"];
      c.train = e.get<embedding::TrainParams>();
      if (e.contains("algorithms")) {
        c.algorithms.clear();
        for (const auto& a : e["algorithms"]) {
          auto alg = embedding::parse_algorithm(a.get<std::string>());
          if (alg == embedding::Algorithm::external) throw InputError("external vectors are loaded, not trained");
          c.algorithms.push_back(alg);
        }
      }
      c.dimensions = e.value("dimensions", c.dimensions);
      c.context_windows = e.value("windows", c.context_windows);
    }
    if (j.contains("external_vectors") && !j["external_vectors"].is_null()) {
      const auto& x = j["external_vectors"];
      c.external_vectors = resolve(c.config_dir, x.at("path").get<std::string>());
      c.external_format = embedding::parse_vector_format(x.value("format", std::string("text")));
    }

    c.thresholds = j.value("thresholds", selection::default_thresholds());
    for (double t : c.thresholds) {
      if (!(t >= -1.0 && t <= 1.0)) throw InputError("thresholds must lie in [-1, 1]");
    }
    if (j.contains("tune")) c.tune_folds = j["tune"].value("folds", c.tune_folds);
    if (j.contains("smote")) c.learner.smote.k_neighbors = j["smote"].value("k_neighbors", c.learner.smote.k_neighbors);
    if (j.contains("forest")) c.learner.forest = j["forest"].get<learner::ForestParams>();
    c.learner.forest.validate();
    if (c.learner.smote.k_neighbors == 0) throw InputError("smote.k_neighbors must be positive");

    c.cv.seed = c.seed;
    if (j.contains("evaluate")) {
      c.cv.runs = j["evaluate"].value("runs", c.cv.runs);
      c.cv.folds = j["evaluate"].value("folds", c.cv.folds);
    }
    c.cross.seed = c.seed;
    if (j.contains("cross_corpus")) {
      const auto& x = j["cross_corpus"];
      c.cross.parts = x.value("parts", c.cross.parts);
      c.cross.repeats = x.value("repeats", c.cross.repeats);
      if (x.contains("train")) c.cross_train = resolve(c.config_dir, x["train"].get<std::string>());
      if (x.contains("test")) c.cross_test = resolve(c.config_dir, x["test"].get<std::string>());
    }
    if (c.cv.runs == 0 || c.cv.folds < 2 || c.tune_folds < 2) throw InputError("need at least one run and two folds");
    if (c.cross.parts == 0 || c.cross.repeats == 0) throw InputError("cross_corpus parts and repeats must be positive");
  } catch (const json::exception& e) {
    throw InputError("bad config value: " + std::string(e.what()));
  }
  return c;
}

json RunConfig::resolved() const {
  auto opt = [](const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); };
  json algs = json::array();
  for (auto a : algorithms) algs.push_back(std::string(embedding::to_string(a)));
  json j;
  j["seed"] = seed;
  j["output_dir"] = output_dir.string();
  j["format"] = format ? json(std::string(corpus::to_string(*format))) : json(nullptr);
  j["corpus"] = opt(corpus);
  j["split"] = {{"ratios", ratios}};
  j["topics"] = opt(topics);
  j["examples"] = opt(examples);
  j["embed_train"] = embed_train.string();
  j["dev"] = dev.string();
  j["test"] = test.string();
  j["ungraded"] = ungraded.string();
  j["window"] = {{"size", window.size}, {"stride", window.stride}};
  json e = train;
  e["algorithms"] = algs;
  e["dimensions"] = dimensions;
  e["windows"] = context_windows;
  j["embedding"] = e;
  j["external_vectors"] = external_vectors
                              ? json{{"path", external_vectors->string()},
                                     {"format", external_format == embedding::VectorFormat::text ? "text" : "binary"}}
                              : json(nullptr);
  j["thresholds"] = thresholds;
  j["tune"] = {{"folds", tune_folds}};
  j["smote"] = {{"k_neighbors", learner.smote.k_neighbors}};
  j["forest"] = learner.forest;
  j["evaluate"] = {{"runs", cv.runs}, {"folds", cv.folds}};
  j["cross_corpus"] = {{"parts", cross.parts}, {"repeats", cross.repeats}, {"train", opt(cross_train)},
                       {"test", opt(cross_test)}};
  return j;
}

std::string RunConfig::fingerprint() const { return evscore::fingerprint(resolved().dump()); }

namespace {

// ---------------------------------------------------------------- helpers

void require_file(const std::optional<fs::path>& p, const char* what) {
  if (!p) throw InputError(std::string("config does not name ") + what);
  if (!fs::is_regular_file(*p)) throw InputError(std::string(what) + " not found: " + p->string());
}

void require_file(const fs::path& p, const char* what) { require_file(std::optional<fs::path>(p), what); }

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  out << content;
  if (!out) throw InputError("write failed: " + p.string());
}

fs::path command_dir(const RunConfig& cfg, const std::string& name) {
  fs::path d = cfg.output_dir / name;
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw InputError("cannot create " + d.string() + ": " + ec.message());
  return d;
}

void write_fingerprint(const fs::path& dir, const std::string& command, const RunConfig& cfg) {
  json j;
  j["command"] = command;
  j["fingerprint"] = cfg.fingerprint();
  j["config"] = cfg.resolved();
  write_file(dir / "run.json", j.dump(2) + "\n");
}

corpus::EssayCollection load(const RunConfig& cfg, const fs::path& p, const char* what) {
  require_file(p, what);
  return corpus::load_corpus(p, format_for(cfg, p));
}

struct Lists {
  std::shared_ptr<const evidence::TopicList> topics;
  std::shared_ptr<const evidence::ExampleList> examples;
};

Lists load_lists(const RunConfig& cfg) {
  require_file(cfg.topics, "topic list");
  require_file(cfg.examples, "example list");
  auto topics = std::make_shared<const evidence::TopicList>(evidence::TopicList::load(*cfg.topics));
  auto examples = std::make_shared<const evidence::ExampleList>(evidence::ExampleList::load(*cfg.examples, *topics));
  return {topics, examples};
}

struct GridPoint {
  std::string name;
  embedding::Algorithm algorithm;
  embedding::TrainParams params;
};

std::vector<GridPoint> grid(const RunConfig& cfg) {
  std::vector<GridPoint> g;
  for (auto a : cfg.algorithms) {
    for (auto d : cfg.dimensions) {
      for (auto w : cfg.context_windows) {
        GridPoint p{model_name(a, d, w), a, cfg.train};
        p.params.dimension = d;
        p.params.window = w;
        p.params.seed = mix_seed(cfg.seed, Fnv1a().update(p.name).value());
        g.push_back(p);
      }
    }
  }
  return g;
}

// Tuned matcher as persisted by `tune`.
struct Choice {
  std::string name;
  embedding::Algorithm algorithm = embedding::Algorithm::external;
  fs::path vectors;
  embedding::VectorFormat format = embedding::VectorFormat::text;
  double threshold = 0;
  double dev_qwk = 0;
};

json to_json(const Choice& c) {
  return {{"name", c.name},
          {"algorithm", std::string(embedding::to_string(c.algorithm))},
          {"vectors", c.vectors.string()},
          {"format", c.format == embedding::VectorFormat::text ? "text" : "binary"},
          {"threshold", c.threshold},
          {"dev_qwk", c.dev_qwk}};
}

Choice choice_from_json(const json& j) {
  Choice c;
  c.name = j.at("name").get<std::string>();
  c.algorithm = embedding::parse_algorithm(j.at("algorithm").get<std::string>());
  c.vectors = j.at("vectors").get<std::string>();
  c.format = embedding::parse_vector_format(j.at("format").get<std::string>());
  c.threshold = j.at("threshold").get<double>();
  c.dev_qwk = j.value("dev_qwk", 0.0);
  return c;
}

struct TuneRecord {
  Choice selected;
  std::vector<Choice> per_algorithm;  // best of each algorithm, sg/cbow/external order
};

TuneRecord load_tune(const RunConfig& cfg) {
  fs::path p = cfg.output_dir / "tune" / "selection.json";
  require_file(p, "tune selection (run `tune` first)");
  std::ifstream in(p);
  try {
    auto j = json::parse(in);
    TuneRecord r;
    r.selected = choice_from_json(j.at("selected"));
    for (const auto& c : j.at("best_per_algorithm")) r.per_algorithm.push_back(choice_from_json(c));
    return r;
  } catch (const json::exception& e) {
    throw InputError("malformed " + p.string() + ": " + e.what());
  }
}

std::shared_ptr<const embedding::EmbeddingModel> load_vectors(const Choice& c) {
  require_file(c.vectors, "vector file");
  return std::make_shared<const embedding::EmbeddingModel>(embedding::load_embeddings(c.vectors, c.format, c.name));
}

// ---------------------------------------------------------------- commands

int cmd_split(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.corpus, "corpus");
  auto all = corpus::load_corpus(*cfg.corpus, format_for(cfg, *cfg.corpus));
  corpus::SplitSpec spec{cfg.ratios, cfg.seed};
  auto split = corpus::stratified_split(all.graded(), spec);
  auto ungraded = all.ungraded();

  fs::path dir = command_dir(cfg, "split");
  corpus::save_corpus(dir / "embed_train.csv", split.embed_train, corpus::Format::delimited);
  corpus::save_corpus(dir / "dev.csv", split.dev, corpus::Format::delimited);
  corpus::save_corpus(dir / "test.csv", split.test, corpus::Format::delimited);
  std::error_code ec;
  fs::remove(dir / "ungraded.csv", ec);
  if (!ungraded.empty()) corpus::save_corpus(dir / "ungraded.csv", ungraded, corpus::Format::delimited);
  write_fingerprint(dir, "split", cfg);

  out << "embed_train " << split.embed_train.size() << "\ndev " << split.dev.size() << "\ntest "
      << split.test.size() << "\nungraded " << ungraded.size() << '\n';
  return 0;
}

int cmd_train_embed(const RunConfig& cfg, std::ostream& out) {
  auto g = grid(cfg);
  if (g.empty()) throw InputError("empty embedding grid");
  auto train = load(cfg, cfg.embed_train, "embedding training corpus");
  corpus::EssayCollection ungraded("ungraded", {});
  if (fs::is_regular_file(cfg.ungraded)) ungraded = corpus::load_corpus(cfg.ungraded, format_for(cfg, cfg.ungraded));
  auto docs = corpus::embedding_corpus(train, ungraded);

  fs::path dir = command_dir(cfg, "embeddings");
  for (const auto& p : g) {
    auto model = embedding::train(p.algorithm, docs, p.params);
    auto meta = model.metadata();
    meta.name = p.name;
    embedding::save_embeddings(dir / (p.name + ".vec"), model, embedding::VectorFormat::text);
    embedding::save_metadata(dir / (p.name + ".json"), meta);
    out << p.name << " vocab " << model.size() << " final_loss "
        << (meta.epoch_loss.empty() ? std::string("-") : fixed(meta.epoch_loss.back(), 6)) << '\n';
  }
  write_fingerprint(dir, "train-embed", cfg);
  return 0;
}

int cmd_tune(const RunConfig& cfg, std::ostream& out) {
  auto lists = load_lists(cfg);
  auto dev = load(cfg, cfg.dev, "dev corpus");

  std::vector<Choice> files;
  fs::path emb_dir = cfg.output_dir / "embeddings";
  for (const auto& p : grid(cfg)) {
    fs::path vec = emb_dir / (p.name + ".vec");
    require_file(vec, "candidate vectors (run `train-embed` first)");
    files.push_back({p.name, p.algorithm, fs::absolute(vec), embedding::VectorFormat::text, 0, 0});
  }
  if (cfg.external_vectors) {
    require_file(cfg.external_vectors, "external vectors");
    files.push_back({"external", embedding::Algorithm::external, fs::absolute(*cfg.external_vectors),
                     cfg.external_format, 0, 0});
  }
  if (files.empty()) throw InputError("no candidate embedding models");

  std::vector<selection::Candidate> candidates;
  for (const auto& f : files) candidates.push_back({f.name, load_vectors(f)});

  selection::SelectionParams params{cfg.window, cfg.learner, cfg.tune_folds, cfg.seed};
  auto sel = selection::select_config(dev.graded(), candidates, cfg.thresholds, lists.topics, lists.examples, params);

  auto pick = [&](std::size_t c, double t, double q) {
    Choice ch = files[c];
    ch.threshold = t;
    ch.dev_qwk = q;
    return ch;
  };
  // Same tie rule as the overall selection, restricted to one algorithm.
  std::vector<Choice> per_algorithm;
  for (auto alg : {embedding::Algorithm::skipgram, embedding::Algorithm::cbow, embedding::Algorithm::external}) {
    const selection::Score* best = nullptr;
    for (const auto& s : sel.table) {
      if (files[s.candidate].algorithm != alg) continue;
      if (!best || s.qwk > best->qwk || (s.qwk == best->qwk && s.threshold < best->threshold)) best = &s;
    }
    if (best) per_algorithm.push_back(pick(best->candidate, best->threshold, best->qwk));
  }

  fs::path dir = command_dir(cfg, "tune");
  json j;
  j["selected"] = to_json(pick(sel.candidate, sel.threshold, sel.qwk));
  j["best_per_algorithm"] = json::array();
  for (const auto& c : per_algorithm) j["best_per_algorithm"].push_back(to_json(c));
  std::ostringstream tsv;
  tsv << "model\talgorithm\tthreshold\tdev_qwk\n";
  j["table"] = json::array();
  for (const auto& s : sel.table) {
    j["table"].push_back({{"model", files[s.candidate].name}, {"threshold", s.threshold}, {"dev_qwk", s.qwk}});
    tsv << files[s.candidate].name << '\t' << embedding::to_string(files[s.candidate].algorithm) << '\t'
        << fixed(s.threshold, 2) << '\t' << fixed(s.qwk, 6) << '\n';
  }
  write_file(dir / "selection.json", j.dump(2) + "\n");
  write_file(dir / "selection.tsv", tsv.str());
  write_fingerprint(dir, "tune", cfg);

  out << "selected " << files[sel.candidate].name << " threshold " << fixed(sel.threshold, 2) << " dev_qwk "
      << fixed(sel.qwk, 6) << '\n';
  return 0;
}

struct Column {
  std::string label;  // rubric, sg, cbow, external
  std::string model;
  std::optional<double> threshold;
  EvidencePipeline pipeline;
};

std::vector<Column> columns(const RunConfig& cfg, const Lists& lists, const TuneRecord& tune) {
  std::vector<Column> cols;
  cols.push_back({"rubric", "-", std::nullopt,
                  EvidencePipeline(lists.topics, lists.examples, evidence::Matcher::exact(), cfg.window, cfg.learner)});
  for (const auto& c : tune.per_algorithm) {
    auto m = evidence::Matcher::embedding(load_vectors(c), c.threshold);
    cols.push_back({std::string(embedding::to_string(c.algorithm)), c.name, c.threshold,
                    EvidencePipeline(lists.topics, lists.examples, m, cfg.window, cfg.learner)});
  }
  return cols;
}

std::string render(const std::string& title, const std::string& protocol, const RunConfig& cfg,
                   const std::vector<Column>& cols, const std::vector<eval::EvalReport>& reports,
                   const TuneRecord& tune) {
  std::ostringstream os;
  os << title << '\n' << "protocol: " << protocol << '\n' << "seed: " << cfg.seed << '\n';
  os << "selected: " << tune.selected.name << " threshold " << fixed(tune.selected.threshold, 2) << "\n\n";
  os << std::left << std::setw(10) << "column" << std::setw(18) << "model" << std::setw(11) << "threshold"
     << std::setw(10) << "mean_qwk" << std::setw(10) << "kappa" << std::setw(13) << "t_vs_rubric"
     << "p_vs_rubric\n";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    os << std::setw(10) << cols[i].label << std::setw(18) << cols[i].model << std::setw(11)
       << (cols[i].threshold ? fixed(*cols[i].threshold, 2) : std::string("-")) << std::setw(10)
       << fixed(reports[i].mean_qwk, 4) << std::setw(10) << fixed(reports[i].kappa, 4);
    if (i == 0) {
      os << std::setw(13) << "-" << "-";
    } else {
      auto t = eval::paired_t_test(reports[i].unit_qwk, reports[0].unit_qwk);
      os << std::setw(13) << fixed(t.t, 3) << fixed(t.p, 4);
    }
    os << '\n';
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    os << "\n[" << cols[i].label << "] " << cols[i].pipeline.describe() << '\n' << reports[i].to_text();
  }
  return os.str();
}

std::string render_table(const std::vector<Column>& cols, const std::vector<eval::EvalReport>& reports) {
  std::ostringstream os;
  os << "column\tmodel\tthreshold\tunit\tqwk\n";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    for (std::size_t u = 0; u < reports[i].unit_qwk.size(); ++u) {
      os << cols[i].label << '\t' << cols[i].model << '\t'
         << (cols[i].threshold ? fixed(*cols[i].threshold, 2) : std::string("-")) << '\t' << u << '\t'
         << fixed(reports[i].unit_qwk[u], 9) << '\n';
    }
  }
  return os.str();
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  auto lists = load_lists(cfg);
  auto test = load(cfg, cfg.test, "test corpus").graded();
  auto tune = load_tune(cfg);
  auto cols = columns(cfg, lists, tune);

  std::vector<eval::EvalReport> reports;
  for (const auto& c : cols) reports.push_back(eval::cross_validate(test, c.pipeline, cfg.cv));

  std::ostringstream protocol;
  protocol << cfg.cv.runs << " runs x " << cfg.cv.folds << "-fold cross validation on " << test.size() << " essays";
  fs::path dir = command_dir(cfg, "evaluate");
  write_file(dir / "report.txt", render("evaluate", protocol.str(), cfg, cols, reports, tune));
  write_file(dir / "report.tsv", render_table(cols, reports));

  // Scoring model: the selected matcher, fitted on every test essay.
  EvidencePipeline chosen(lists.topics, lists.examples,
                          evidence::Matcher::embedding(load_vectors(tune.selected), tune.selected.threshold),
                          cfg.window, cfg.learner);
  auto forest = chosen.fit_forest(chosen.featurize(test), mix_seed(cfg.seed, 0x5c0e));
  json m;
  m["matcher"] = to_json(tune.selected);
  m["window"] = {{"size", cfg.window.size}, {"stride", cfg.window.stride}};
  m["forest"] = forest.to_json();
  write_file(dir / "model.json", m.dump() + "\n");
  write_fingerprint(dir, "evaluate", cfg);

  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << cols[i].label << ' ' << cols[i].model << " mean_qwk " << fixed(reports[i].mean_qwk, 4) << '\n';
  }
  return 0;
}

int cmd_cross_corpus(const RunConfig& cfg, std::ostream& out) {
  require_file(cfg.cross_train, "cross_corpus.train corpus");
  require_file(cfg.cross_test, "cross_corpus.test corpus");
  auto lists = load_lists(cfg);
  auto train = load(cfg, *cfg.cross_train, "cross_corpus.train corpus").graded();
  auto test = load(cfg, *cfg.cross_test, "cross_corpus.test corpus").graded();
  auto tune = load_tune(cfg);
  auto cols = columns(cfg, lists, tune);

  std::vector<eval::EvalReport> reports;
  for (const auto& c : cols) reports.push_back(eval::cross_corpus(train, test, c.pipeline, cfg.cross));

  std::ostringstream protocol;
  protocol << "train on " << train.name() << " (" << train.size() << "), " << cfg.cross.repeats << " repeats x "
           << cfg.cross.parts << " parts of " << test.name() << " (" << test.size() << ")";
  fs::path dir = command_dir(cfg, "cross-corpus");
  write_file(dir / "report.txt", render("cross-corpus", protocol.str(), cfg, cols, reports, tune));
  write_file(dir / "report.tsv", render_table(cols, reports));
  write_fingerprint(dir, "cross-corpus", cfg);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << cols[i].label << ' ' << cols[i].model << " mean_qwk " << fixed(reports[i].mean_qwk, 4) << '\n';
  }
  return 0;
}

std::string_view kind_name(embedding::MatchKind k) {
  switch (k) {
    case embedding::MatchKind::exact:
      return "exact";
    case embedding::MatchKind::embedding:
      return "embedding";
    default:
      return "none";
  }
}

int cmd_score(const RunConfig& cfg, const std::string& essay_path, const std::optional<fs::path>& model_path,
              bool as_json, std::ostream& out) {
  std::string text;
  if (essay_path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else {
    require_file(fs::path(essay_path), "essay");
    std::ifstream in(essay_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  fs::path mp = model_path.value_or(cfg.output_dir / "evaluate" / "model.json");
  require_file(mp, "scoring model (run `evaluate` first)");
  auto lists = load_lists(cfg);

  json m;
  try {
    std::ifstream in(mp);
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("malformed model " + mp.string() + ": " + e.what());
  }
  learner::ForestModel forest = learner::ForestModel::from_json(m.at("forest"));
  if (forest.schema() != evidence::feature_schema(*lists.examples)) {
    throw InputError("model schema does not match the configured example list");
  }
  evidence::WindowConfig window{m.at("window").at("size").get<std::size_t>(),
                                m.at("window").at("stride").get<std::size_t>()};
  window.validate();
  auto choice = choice_from_json(m.at("matcher"));
  auto matcher = evidence::Matcher::embedding(load_vectors(choice), choice.threshold);

  auto ex = evidence::explain(text, *lists.topics, *lists.examples, matcher, window);
  auto values = ex.features.values();
  int score = forest.predict(values);
  auto schema = forest.schema();

  if (as_json) {
    json j;
    j["score"] = score;
    json f;
    for (std::size_t i = 0; i < schema.size(); ++i) f[schema[i]] = static_cast<long long>(values[i]);
    j["features"] = f;
    j["evidence"] = json::array();
    for (const auto& e : ex.examples) {
      json r;
      r["topic"] = e.topic;
      r["example"] = e.example_id;
      r["begin"] = e.char_begin;
      r["end"] = e.char_end;
      r["text"] = text.substr(e.char_begin, e.char_end - e.char_begin);
      r["words"] = json::array();
      for (const auto& w : e.words) {
        r["words"].push_back({{"list_word", w.list_word}, {"token", w.surface}, {"match", kind_name(w.kind)}});
      }
      j["evidence"].push_back(r);
    }
    out << j.dump(2) << '\n';
    return 0;
  }

  out << "score: " << score << '\n' << "features:";
  for (std::size_t i = 0; i < schema.size(); ++i) out << ' ' << schema[i] << '=' << values[i];
  out << '\n' << "evidence: " << ex.examples.size() << '\n';
  for (const auto& e : ex.examples) {
    out << "  " << e.topic << '/' << e.example_id << " [" << e.char_begin << ',' << e.char_end << ") \""
        << text.substr(e.char_begin, e.char_end - e.char_begin) << "\"\n";
    for (const auto& w : e.words) out << "    " << w.list_word << " <- " << w.surface << " (" << kind_name(w.kind) << ")\n";
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evidence-rubric essay scoring"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::string essay;
  std::optional<std::string> model;
  bool as_json = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("-o,--output-dir", output_dir, "override the output directory");
  };
  auto* split = app.add_subcommand("split", "stratified embed-train/dev/test split");
  auto* train_embed = app.add_subcommand("train-embed", "train the embedding grid");
  auto* tune = app.add_subcommand("tune", "pick the embedding model and threshold on the dev set");
  auto* evaluate = app.add_subcommand("evaluate", "repeated cross validation on the test set");
  auto* cross = app.add_subcommand("cross-corpus", "train on one corpus, test on another");
  auto* score = app.add_subcommand("score", "score one essay and show its evidence");
  for (auto* s : {split, train_embed, tune, evaluate, cross, score}) add_common(s);
  score->add_option("-e,--essay", essay, "essay text file, or - for stdin")->required();
  score->add_option("-m,--model", model, "scoring model (default: <output>/evaluate/model.json)");
  score->add_flag("--json", as_json, "machine-readable output");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  if (!argv.empty()) argv.pop_back();  // program name
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    Overrides ov;
    ov.seed = seed;
    if (output_dir) ov.output_dir = fs::path(*output_dir);
    auto cfg = load_config(config_path, ov);
    if (*split) return cmd_split(cfg, out);
    if (*train_embed) return cmd_train_embed(cfg, out);
    if (*tune) return cmd_tune(cfg, out);
    if (*evaluate) return cmd_evaluate(cfg, out);
    if (*cross) return cmd_cross_corpus(cfg, out);
    if (*score) return cmd_score(cfg, essay, model ? std::optional<fs::path>(*model) : std::nullopt, as_json, out);
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace evscore::cli
