#include "procex/cli.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "procex/corpus.hpp"
#include "procex/crf.hpp"
#include "procex/error.hpp"
#include "procex/evaluation.hpp"
#include "procex/pipeline.hpp"
#include "procex/relex.hpp"
#include "procex/resolution.hpp"
#include "procex/stats.hpp"

namespace procex::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

fs::path default_output_root() {
  const char* root = std::getenv(kOutputRootVariable);
  return root && *root ? fs::path(root) : fs::path("procex-out");
}

namespace {

// Rows of JSON cells; strings are written verbatim to CSV, null as empty.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<json>> rows;

  std::string csv() const {
    std::ostringstream out;
    auto field = [](const std::string& s) {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    };
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << field(header[i]);
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        if (row[i].is_string()) {
          out << field(row[i].get<std::string>());
        } else if (!row[i].is_null()) {
          out << row[i].dump();
        }
      }
      out << '\n';
    }
    return out.str();
  }

  json to_json() const {
    json out = json::array();
    for (const auto& row : rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < header.size(); ++i) obj[header[i]] = row[i];
      out.push_back(std::move(obj));
    }
    return out;
  }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

Table mention_table(const Corpus& corpus) {
  Table t{{"tag", "absolute count", "relative count", "per document", "per sentence", "average length",
           "standard dev."},
          {}};
  for (const auto& r : stats::mention_statistics(corpus)) {
    t.rows.push_back({to_string(r.tag), r.absolute_count, r.relative_count, r.per_document, r.per_sentence,
                      r.average_length, r.length_stddev});
  }
  return t;
}

Table relation_table(const Corpus& corpus) {
  Table t{{"type", "absolute count", "relative count", "per document", "per sentence"}, {}};
  for (const auto& r : stats::relation_statistics(corpus)) {
    t.rows.push_back({to_string(r.type), r.absolute_count, r.relative_count, r.per_document, r.per_sentence});
  }
  return t;
}

Table entity_table(const Corpus& corpus) {
  Table t{{"tag", "absolute count", "relative count", "per document", "per sentence", "multi-mention",
           "median distance", "average distance", "trimmed average distance", "standard dev."},
          {}};
  for (const auto& r : stats::entity_statistics(corpus)) {
    std::vector<json> row{to_string(r.tag), r.absolute_count, r.relative_count, r.per_document, r.per_sentence,
                          r.multi_mention_count};
    if (r.distance) {
      row.insert(row.end(), {r.distance->median, r.distance->mean, r.distance->trimmed_mean, r.distance->stddev});
    } else {
      row.insert(row.end(), 4, json(nullptr));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table correlation_table(const Corpus& corpus) {
  Table t;
  t.header.push_back("type");
  for (const char* pos : {"head", "tail"}) {
    for (Tag tag : kAllTags) t.header.push_back(std::string(pos) + ": " + std::string(to_string(tag)));
  }
  const auto m = stats::relation_argument_correlation(corpus);
  for (RelationType type : kAllRelationTypes) {
    std::vector<json> row{to_string(type)};
    for (int pos = 0; pos < 2; ++pos) {
      for (Tag tag : kAllTags) row.push_back(m.at(type, pos, tag));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table ttr_table(const Corpus& corpus) {
  Table t{{"group", "name", "type-token ratio"}, {}};
  const auto by_tag = stats::type_token_ratio_by_tag(corpus);
  for (Tag tag : kAllTags) t.rows.push_back({"mention tag", to_string(tag), optional_number(by_tag[index_of(tag)])});
  const auto by_rel = stats::type_token_ratio_by_relation(corpus);
  for (RelationType type : kAllRelationTypes) {
    t.rows.push_back({"relation arguments", to_string(type), optional_number(by_rel[index_of(type)])});
  }
  return t;
}

struct Options {
  std::string corpus;
  std::string coref;
  std::string out;
  std::string model;
  std::string input;
  std::string predictions;
  std::string module = "mentions";
  std::string strategy = "naive";
  std::string level = "mention";
  std::string format = "csv";
  std::string kind;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::vector<int> scenarios{1, 2, 3, 4, 5, 6};
  int scenario = 0;
  int threads = 1;
  CrfConfig crf;
  RelexTrainConfig relex;
  ResolutionConfig resolution;
  std::vector<int> rates{1, 5, 10, 20, 40, 80};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  int bins = 5;
  double quantile = 0.95;
  CLI::Option* iterations_option = nullptr;
};

void add_crf_options(CLI::App* app, Options& o) {
  app->add_option("--epochs", o.crf.epochs, "CRF training epochs")->capture_default_str();
  app->add_option("--l2", o.crf.l2, "CRF L2 strength")->capture_default_str();
  app->add_option("--crf-learning-rate", o.crf.learning_rate, "CRF initial step size")->capture_default_str();
  app->add_option("--batch-size", o.crf.batch_size, "CRF sequences per step")->capture_default_str();
}

void add_relex_options(CLI::App* app, Options& o) {
  app->add_option("--negative-rate", o.relex.negative_rate, "negatives per positive pair")->capture_default_str();
  app->add_option("--context", o.relex.context_size, "neighbouring mention tags per side")->capture_default_str();
  o.iterations_option =
      app->add_option("--iterations", o.relex.iterations, "boosting iterations")->capture_default_str();
  app->add_option("--gbdt-learning-rate", o.relex.learning_rate, "boosting shrinkage")->capture_default_str();
  app->add_option("--max-depth", o.relex.max_depth, "tree depth")->capture_default_str();
}

void add_resolution_options(CLI::App* app, Options& o) {
  app->add_option("--strategy", o.strategy, "entity resolution strategy")
      ->check(CLI::IsMember({"naive", "align"}))
      ->capture_default_str();
  app->add_option("--alpha-m", o.resolution.alpha_m, "mention overlap threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--alpha-c", o.resolution.alpha_c, "surviving cluster fraction threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--coref", o.coref, "coreference predictions (JSON lines)")->check(CLI::ExistingFile);
}

CLI::Option* add_corpus_option(CLI::App* app, Options& o) {
  return app->add_option("--corpus", o.corpus, "corpus file (JSON lines)")->check(CLI::ExistingFile)->required();
}

fs::path output_dir(const Options& o, const char* command) {
  return o.out.empty() ? default_output_root() / command : fs::path(o.out);
}

ResolutionStrategy strategy_of(const Options& o) { return *parse_resolution_strategy(o.strategy); }

std::string annotations_jsonl(const std::vector<DocumentAnnotations>& items) {
  std::ostringstream out;
  write_annotations(out, items);
  return out.str();
}

void emit(const Options& o, const std::string& content, std::ostream& out) {
  if (o.out.empty()) {
    out << content;
  } else {
    write_file(o.out, content);
  }
}

// Annotations to start from: the given prediction file, or gold.
std::vector<DocumentAnnotations> base_annotations(const Options& o, const Corpus& corpus) {
  if (!o.input.empty()) return load_annotations(o.input, corpus);
  std::vector<DocumentAnnotations> items;
  for (const auto& d : corpus.documents) items.push_back({d.name, d.gold});
  return items;
}

int cmd_stats(const Options& o, std::ostream& out) {
  const Corpus corpus = load_corpus(o.corpus);
  const fs::path dir = output_dir(o, "stats");
  const std::vector<std::pair<std::string, Table>> tables = {{"mentions", mention_table(corpus)},
                                                             {"relations", relation_table(corpus)},
                                                             {"entities", entity_table(corpus)},
                                                             {"correlation", correlation_table(corpus)},
                                                             {"type_token_ratio", ttr_table(corpus)}};
  if (o.format == "csv" || o.format == "both") {
    for (const auto& [name, table] : tables) {
      write_file(dir / (name + ".csv"), table.csv());
      out << (dir / (name + ".csv")).string() << '\n';
    }
  }
  if (o.format == "json" || o.format == "both") {
    for (const auto& [name, table] : tables) {
      write_file(dir / (name + ".json"), table.to_json().dump(2) + "\n");
      out << (dir / (name + ".json")).string() << '\n';
    }
  }
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const Corpus corpus = load_corpus(o.corpus);
  const fs::path path = o.model;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (o.module == "mentions") {
    CrfConfig c = o.crf;
    c.seed = o.seed;
    const auto model = train_crf(std::span<const Document>(corpus.documents), c);
    save_crf(path, model);
    out << "trained mention model on " << corpus.size() << " documents, final loss "
        << json(model.loss_history.back()).dump() << '\n';
  } else {
    RelexTrainConfig c = o.relex;
    c.seed = o.seed;
    const auto model = train_relation_model(std::span<const Document>(corpus.documents), c);
    save_relex(path, model);
    out << "trained relation model on " << corpus.size() << " documents, final loss "
        << json(model.loss_history.back()).dump() << '\n';
  }
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const Corpus corpus = load_corpus(o.corpus);
  std::vector<DocumentAnnotations> items;
  if (o.module == "mentions") {
    const CrfModel model = load_crf(o.model);
    for (const auto& d : corpus.documents) {
      Annotations a;
      a.mentions = predict_mentions(model, d);
      a.entities = singleton_entities(a.mentions.size());
      items.push_back({d.name, std::move(a)});
    }
  } else {
    const RelexModel model = load_relex(o.model);
    items = base_annotations(o, corpus);
    for (auto& item : items) {
      auto& a = item.annotations;
      a.relations = extract_relations(model, *corpus.find(item.name), a.mentions, a.entities);
    }
  }
  emit(o, annotations_jsonl(items), out);
  return kExitOk;
}

int cmd_resolve(const Options& o, std::ostream& out) {
  const Corpus corpus = load_corpus(o.corpus);
  CorefIndex coref;
  PipelineConfig config;
  config.strategy = strategy_of(o);
  config.resolution = o.resolution;
  if (!o.coref.empty()) {
    coref = load_coref_predictions(o.coref, corpus);
    config.coref = &coref;
  }
  if (config.strategy == ResolutionStrategy::Align && !config.coref) {
    throw InputError("--strategy align requires --coref");
  }
  auto items = base_annotations(o, corpus);
  for (auto& item : items) {
    auto& a = item.annotations;
    a.entities = resolve_entities(*corpus.find(item.name), a.mentions, config);
    a.relations.clear();
  }
  emit(o, annotations_jsonl(items), out);
  return kExitOk;
}

Level parse_level(const std::string& name) {
  if (name == "mention") return Level::Mention;
  if (name == "entity") return Level::Entity;
  return Level::Relation;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const Corpus corpus = load_corpus(o.corpus);
  const auto items = load_annotations(o.predictions, corpus);
  const Level level = parse_level(o.level);
  MatchCounts counts(level);
  for (const auto& item : items) counts += match_level(level, item.annotations, corpus.find(item.name)->gold);
  int scenario = o.scenario;
  if (scenario == 0) scenario = level == Level::Mention ? 1 : level == Level::Entity ? 2 : 4;
  const auto report = make_report(scenario, -1, level, counts);
  out << report_to_json(report).dump(2) << '\n';
  if (!o.out.empty()) {
    write_file(fs::path(o.out) / "report.json", report_to_json(report).dump(2) + "\n");
    write_file(fs::path(o.out) / "report.csv", report_to_csv(report));
  }
  return kExitOk;
}

json run_config_json(const Options& o) {
  return {{"corpus", o.corpus},
          {"coref", o.coref.empty() ? json(nullptr) : json(o.coref)},
          {"seed", o.seed},
          {"folds", o.folds},
          {"scenarios", o.scenarios},
          {"strategy", o.strategy},
          {"resolution", {{"alpha_m", o.resolution.alpha_m}, {"alpha_c", o.resolution.alpha_c}}},
          {"crf",
           {{"epochs", o.crf.epochs},
            {"l2", o.crf.l2},
            {"learning_rate", o.crf.learning_rate},
            {"batch_size", o.crf.batch_size}}},
          {"relex",
           {{"negative_rate", o.relex.negative_rate},
            {"context_size", o.relex.context_size},
            {"iterations", o.relex.iterations},
            {"learning_rate", o.relex.learning_rate},
            {"max_depth", o.relex.max_depth}}}};
}

int cmd_run(const Options& o, std::ostream& out) {
  const Corpus corpus = load_corpus(o.corpus);
  CorefIndex coref;
  ExperimentConfig config;
  config.crf = o.crf;
  config.relex = o.relex;
  config.threads = o.threads;
  config.pipeline.strategy = strategy_of(o);
  config.pipeline.resolution = o.resolution;
  if (!o.coref.empty()) {
    coref = load_coref_predictions(o.coref, corpus);
    config.pipeline.coref = &coref;
  }
  const auto result = cross_validate(corpus, o.folds, o.scenarios, o.seed, config);

  const fs::path dir = output_dir(o, "run");
  std::map<std::string, std::string> files;  // relative path -> content
  auto add = [&](const std::string& rel, std::string content) { files[rel] = std::move(content); };

  json folds = json::array();
  for (std::size_t f = 0; f < result.folds.size(); ++f) {
    const auto& fold = result.folds[f];
    json names = json::array();
    for (std::size_t i : fold.split.test) names.push_back(corpus.documents[i].name);
    folds.push_back({{"fold", f}, {"test", std::move(names)}});
    const std::string tag = "fold" + std::to_string(f);
    if (fold.tagger) add("models/" + tag + "_mentions.json", crf_to_json(*fold.tagger).dump() + "\n");
    if (fold.relex) add("models/" + tag + "_relations.json", relex_to_json(*fold.relex).dump() + "\n");
    for (std::size_t s = 0; s < result.scenarios.size(); ++s) {
      const auto& sr = fold.scenarios[s];
      const std::string stem = "scenario" + std::to_string(result.scenarios[s]) + "_" + tag;
      add("reports/" + stem + ".json", report_to_json(sr.report).dump(2) + "\n");
      add("reports/" + stem + ".csv", report_to_csv(sr.report));
      add("predictions/" + stem + ".jsonl", annotations_jsonl(sr.predictions));
    }
  }
  add("folds.json", folds.dump(2) + "\n");

  json aggregate = json::array();
  std::string aggregate_csv;
  for (std::size_t s = 0; s < result.scenarios.size(); ++s) {
    const auto& avg = result.averages[s];
    const std::string stem = "scenario" + std::to_string(result.scenarios[s]) + "_average";
    add("reports/" + stem + ".json", report_to_json(avg).dump(2) + "\n");
    const std::string csv = report_to_csv(avg);
    add("reports/" + stem + ".csv", csv);
    aggregate.push_back(report_to_json(avg));
    aggregate_csv += s == 0 ? csv : csv.substr(csv.find('\n') + 1);
  }
  add("reports/aggregate.json", aggregate.dump(2) + "\n");
  add("reports/aggregate.csv", aggregate_csv);

  json hashes = json::object();
  for (const auto& [rel, content] : files) {
    write_file(dir / rel, content);
    hashes[rel] = sha256_hex(content);
  }
  json manifest = {{"config", run_config_json(o)},
                   {"seed", o.seed},
                   {"inputs", {{"corpus", sha256_hex(read_file(o.corpus))}}},
                   {"files", std::move(hashes)}};
  if (!o.coref.empty()) manifest["inputs"]["coref"] = sha256_hex(read_file(o.coref));
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  for (const auto& avg : result.averages) {
    out << "scenario " << avg.scenario << " (" << to_string(avg.level) << "): P=" << json(avg.micro.precision).dump()
        << " R=" << json(avg.micro.recall).dump() << " F1=" << json(avg.micro.f1).dump() << '\n';
  }
  out << "wrote " << files.size() + 1 << " files to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_analyze(Options o, std::ostream& out) {
  const Corpus corpus = load_corpus(o.corpus);
  const fs::path dir = output_dir(o, "analyze");
  Table table;
  std::string name;
  if (o.kind == "sweep") {
    if (o.iterations_option && o.iterations_option->count() == 0) o.relex.iterations = 100;
    table.header = {"negative rate", "precision", "recall", "f1"};
    for (const auto& row : sampling_rate_sweep(corpus, o.rates, o.seeds, o.relex)) {
      table.rows.push_back({row.negative_rate, row.precision, row.recall, row.f1});
    }
    name = "sweep.csv";
  } else if (o.kind == "distance") {
    if (o.predictions.empty()) throw InputError("distance analysis needs --predictions with relations");
    const auto items = load_annotations(o.predictions, corpus);
    std::vector<PredictionPair> pairs;
    for (const auto& item : items) pairs.push_back({&item.annotations, &corpus.find(item.name)->gold});
    table.header = {"bin", "min distance", "max distance", "relations", "correct", "precision"};
    const auto bins = precision_by_distance(pairs, o.bins, o.quantile);
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const auto& bin = bins[b];
      table.rows.push_back({b, bin.min_distance, bin.max_distance, bin.relations, bin.correct, bin.precision});
    }
    name = "distance.csv";
  } else if (o.kind == "correlation") {
    table = correlation_table(corpus);
    name = "correlation.csv";
  } else {
    table = ttr_table(corpus);
    name = "type_token_ratio.csv";
  }
  write_file(dir / name, table.csv());
  out << (dir / name).string() << '\n';
  return kExitOk;
}

int cmd_grid_search(const Options& o, std::ostream& out) {
  const Corpus corpus = load_corpus(o.corpus);
  const CorefIndex coref = load_coref_predictions(o.coref, corpus);
  std::vector<const Document*> dev;
  for (const auto& d : corpus.documents) dev.push_back(&d);
  const auto result = grid_search_alignment(dev, coref, o.resolution);
  Table table{{"alpha_m", "alpha_c", "f1"}, {}};
  for (const auto& p : result.surface) table.rows.push_back({p.alpha_m, p.alpha_c, p.f1});
  const fs::path dir = output_dir(o, "grid-search");
  write_file(dir / "grid.csv", table.csv());
  const json best = {{"alpha_m", result.alpha_m}, {"alpha_c", result.alpha_c}, {"f1", result.f1}};
  write_file(dir / "best.json", best.dump(2) + "\n");
  out << best.dump() << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Process information extraction toolkit"};
  app.name("procex");
  app.set_config("--config", "", "TOML configuration file; command-line flags take precedence");
  app.require_subcommand(1);
  Options o;

  auto* stats_cmd = app.add_subcommand("stats", "dataset statistics tables");
  add_corpus_option(stats_cmd, o);
  stats_cmd->add_option("--out", o.out, "output directory");
  stats_cmd->add_option("--format", o.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "train a mention or relation model on a corpus");
  add_corpus_option(train_cmd, o);
  train_cmd->add_option("--module", o.module, "mentions or relations")
      ->check(CLI::IsMember({"mentions", "relations"}))
      ->required();
  train_cmd->add_option("--model", o.model, "output model file")->required();
  train_cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
  add_crf_options(train_cmd, o);
  add_relex_options(train_cmd, o);

  auto* predict_cmd = app.add_subcommand("predict", "apply a trained model");
  add_corpus_option(predict_cmd, o);
  predict_cmd->add_option("--module", o.module, "mentions or relations")
      ->check(CLI::IsMember({"mentions", "relations"}))
      ->required();
  predict_cmd->add_option("--model", o.model, "model file")->check(CLI::ExistingFile)->required();
  predict_cmd->add_option("--input", o.input, "mentions and entities to classify (default: gold)")
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", o.out, "output file (default: stdout)");

  auto* resolve_cmd = app.add_subcommand("resolve", "group mentions into entities");
  add_corpus_option(resolve_cmd, o);
  add_resolution_options(resolve_cmd, o);
  resolve_cmd->add_option("--input", o.input, "mentions to resolve (default: gold)")->check(CLI::ExistingFile);
  resolve_cmd->add_option("--out", o.out, "output file (default: stdout)");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score predictions against the gold annotations");
  add_corpus_option(evaluate_cmd, o);
  evaluate_cmd->add_option("--predictions", o.predictions, "prediction file")
      ->check(CLI::ExistingFile)
      ->required();
  evaluate_cmd->add_option("--level", o.level, "mention, entity or relation")
      ->check(CLI::IsMember({"mention", "entity", "relation"}))
      ->capture_default_str();
  evaluate_cmd->add_option("--scenario", o.scenario, "scenario id recorded in the report")->check(CLI::Range(1, 6));
  evaluate_cmd->add_option("--out", o.out, "directory for report.json and report.csv");

  auto* run_cmd = app.add_subcommand("run", "cross-validated evaluation of the scenarios");
  add_corpus_option(run_cmd, o);
  run_cmd->add_option("--seed", o.seed, "random seed")->required();
  run_cmd->add_option("--folds", o.folds, "number of folds")->check(CLI::PositiveNumber)->capture_default_str();
  run_cmd->add_option("--scenarios", o.scenarios, "scenario ids")
      ->delimiter(',')
      ->check(CLI::Range(1, 6))
      ->capture_default_str();
  run_cmd->add_option("--threads", o.threads, "folds run in parallel")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", o.out, "output directory");
  add_resolution_options(run_cmd, o);
  add_crf_options(run_cmd, o);
  add_relex_options(run_cmd, o);

  auto* analyze_cmd = app.add_subcommand("analyze", "plot-ready analysis series");
  add_corpus_option(analyze_cmd, o);
  analyze_cmd->add_option("--kind", o.kind, "sweep, distance, correlation or ttr")
      ->check(CLI::IsMember({"sweep", "distance", "correlation", "ttr"}))
      ->required();
  analyze_cmd->add_option("--rates", o.rates, "negative sampling rates")->delimiter(',')->capture_default_str();
  analyze_cmd->add_option("--seeds", o.seeds, "seeds averaged per rate")->delimiter(',')->capture_default_str();
  analyze_cmd->add_option("--predictions", o.predictions, "relation predictions for the distance analysis")
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--bins", o.bins, "distance bins")->check(CLI::PositiveNumber)->capture_default_str();
  analyze_cmd->add_option("--quantile", o.quantile, "fraction of relations kept")->capture_default_str();
  analyze_cmd->add_option("--out", o.out, "output directory");
  add_relex_options(analyze_cmd, o);

  auto* grid_cmd = app.add_subcommand("grid-search", "choose alignment thresholds on a development corpus");
  add_corpus_option(grid_cmd, o);
  grid_cmd->add_option("--coref", o.coref, "coreference predictions")->check(CLI::ExistingFile)->required();
  grid_cmd->add_option("--out", o.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (stats_cmd->parsed()) return cmd_stats(o, out);
    if (train_cmd->parsed()) return cmd_train(o, out);
    if (predict_cmd->parsed()) return cmd_predict(o, out);
    if (resolve_cmd->parsed()) return cmd_resolve(o, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(o, out);
    if (run_cmd->parsed()) return cmd_run(o, out);
    if (analyze_cmd->parsed()) return cmd_analyze(o, out);
    if (grid_cmd->parsed()) return cmd_grid_search(o, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInput;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"procex"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace procex::cli
