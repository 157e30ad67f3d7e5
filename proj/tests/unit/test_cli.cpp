#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "procex/cli.hpp"
#include "procex/corpus.hpp"

namespace fs = std::filesystem;
using namespace procex;
using procex::testing::data_path;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("procex_cli_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& rel) const { return (path_ / rel).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::size_t count_files(const std::string& dir, const std::string& prefix, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && e.path().extension() == ext) ++n;
  }
  return n;
}

const std::vector<std::string> kCheap{"--epochs", "2", "--iterations", "3"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({"stats", "--corpus", "/nonexistent/corpus.jsonl"}).code == cli::kExitInput);
  CHECK(run({}).code == cli::kExitInput);
  CHECK(run({"frobnicate"}).code == cli::kExitInput);
  CHECK(run({"--help"}).code == cli::kExitOk);
  CHECK(run({"run", "--corpus", data_path("fixture5.jsonl")}).code == cli::kExitInput);  // no seed

  TempDir dir("bad");
  {
    std::ofstream out(dir / "bad.jsonl");
    out << "{\"name\": \"x\", \"tokens\": [\"a\"], \"sentence_ids\": [0], \"mentions\": "
           "[{\"start\": 0, \"end\": 3, \"tag\": \"Actor\"}]}\n";
  }
  const auto r = run({"stats", "--corpus", dir / "bad.jsonl", "--out", dir / "o"});
  CHECK(r.code == cli::kExitInput);
  CHECK(r.err.find("mention bounds") != std::string::npos);
}

TEST_CASE("stats tables") {
  TempDir dir("stats");
  CHECK(run({"stats", "--corpus", data_path("fixture5.jsonl"), "--out", dir / "csv"}).code == 0);
  const auto mentions = lines(dir / "csv/mentions.csv");
  REQUIRE(mentions.size() == 8);
  CHECK(mentions[0] ==
        "tag,absolute count,relative count,per document,per sentence,average length,standard dev.");
  CHECK(lines(dir / "csv/relations.csv").size() == 7);
  CHECK(lines(dir / "csv/entities.csv").size() == 8);

  CHECK(run({"stats", "--corpus", data_path("fixture5.jsonl"), "--out", dir / "json", "--format", "json"}).code == 0);
  CHECK(!fs::exists(dir / "json/mentions.csv"));
  const auto j = nlohmann::json::parse(slurp(dir / "json/mentions.json"));
  CHECK(j.size() == 7);

  CHECK(run({"stats", "--corpus", data_path("fixture5.jsonl"), "--format", "xml"}).code == cli::kExitInput);
}

TEST_CASE("output root comes from the environment") {
  TempDir dir("root");
  ::setenv(cli::kOutputRootVariable, (dir / "root").c_str(), 1);
  CHECK(cli::default_output_root() == fs::path(dir / "root"));
  CHECK(run({"stats", "--corpus", data_path("fixture5.jsonl")}).code == 0);
  CHECK(fs::exists(dir / "root/stats/mentions.csv"));
  ::unsetenv(cli::kOutputRootVariable);
  CHECK(cli::default_output_root() == fs::path("procex-out"));
}

TEST_CASE("sha256") {
  CHECK(cli::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("cross-validated run writes a reproducible artifact tree") {
  TempDir dir("run");
  const auto base = with({"run", "--corpus", data_path("fixture5.jsonl"), "--seed", "3"}, kCheap);
  const auto a = run(with(base, {"--out", dir / "a"}));
  REQUIRE(a.code == 0);
  CHECK(count_files(dir / "a/reports", "scenario", ".json") == 36);
  std::size_t per_fold = 0;
  for (int s = 1; s <= 6; ++s) {
    for (int f = 0; f < 5; ++f) {
      per_fold += fs::exists(dir / ("a/reports/scenario" + std::to_string(s) + "_fold" + std::to_string(f) + ".json"));
    }
  }
  CHECK(per_fold == 30);
  CHECK(fs::exists(dir / "a/reports/aggregate.json"));
  CHECK(fs::exists(dir / "a/reports/aggregate.csv"));
  CHECK(count_files(dir / "a/models", "fold", ".json") == 10);
  CHECK(count_files(dir / "a/predictions", "scenario", ".jsonl") == 30);

  const auto manifest = nlohmann::json::parse(slurp(dir / "a/manifest.json"));
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["inputs"]["corpus"] == cli::sha256_hex(slurp(data_path("fixture5.jsonl"))));
  for (const auto& [rel, hash] : manifest["files"].items()) CHECK(hash == cli::sha256_hex(slurp(dir / ("a/" + rel))));

  REQUIRE(run(with(base, {"--out", dir / "b", "--threads", "2"})).code == 0);
  for (const auto& [rel, hash] : manifest["files"].items()) CHECK(slurp(dir / ("a/" + rel)) == slurp(dir / ("b/" + rel)));
  CHECK(slurp(dir / "a/manifest.json") == slurp(dir / "b/manifest.json"));
}

TEST_CASE("alignment without coreference predictions is a configuration error") {
  const auto r = run(with({"run", "--corpus", data_path("fixture5.jsonl"), "--seed", "1", "--scenarios", "2,3",
                           "--strategy", "align", "--out", (fs::temp_directory_path() / "procex_cli_never").string()},
                          kCheap));
  CHECK(r.code == cli::kExitInput);
  CHECK(run({"resolve", "--corpus", data_path("fixture5.jsonl"), "--strategy", "align"}).code == cli::kExitInput);
}

TEST_CASE("train, predict, resolve and evaluate") {
  TempDir dir("flow");
  const std::string corpus = data_path("fixture5.jsonl");
  REQUIRE(run({"train", "--corpus", corpus, "--module", "mentions", "--model", dir / "m.json", "--epochs", "5"}).code == 0);
  REQUIRE(run({"predict", "--corpus", corpus, "--module", "mentions", "--model", dir / "m.json", "--out", dir / "mentions.jsonl"}).code == 0);
  CHECK(load_annotations(dir / "mentions.jsonl", load_corpus(corpus)).size() == 5);

  REQUIRE(run({"resolve", "--corpus", corpus, "--input", dir / "mentions.jsonl", "--out", dir / "entities.jsonl"}).code == 0);
  REQUIRE(run({"train", "--corpus", corpus, "--module", "relations", "--model", dir / "r.json", "--iterations", "5"}).code == 0);
  REQUIRE(run({"predict", "--corpus", corpus, "--module", "relations", "--model", dir / "r.json", "--input",
               dir / "entities.jsonl", "--out", dir / "relations.jsonl"}).code == 0);

  const auto e = run({"evaluate", "--corpus", corpus, "--predictions", dir / "relations.jsonl", "--level", "relation",
                      "--out", dir / "eval"});
  REQUIRE(e.code == 0);
  const auto report = nlohmann::json::parse(e.out);
  CHECK(report["level"] == "relation");
  CHECK(report["scenario"] == 4);
  CHECK(fs::exists(dir / "eval/report.csv"));

  const auto gold = run({"predict", "--corpus", corpus, "--module", "relations", "--model", dir / "r.json"});
  CHECK(gold.code == 0);
  CHECK(std::count(gold.out.begin(), gold.out.end(), '\n') == 5);
}

TEST_CASE("analyses") {
  TempDir dir("analyze");
  const std::string corpus = data_path("fixture5.jsonl");

  REQUIRE(run({"analyze", "--corpus", corpus, "--kind", "sweep", "--seeds", "0", "--iterations", "2", "--out",
               dir / "sweep"}).code == 0);
  const auto sweep = lines(dir / "sweep/sweep.csv");
  CHECK(sweep.size() == 7);

  const Corpus c = load_corpus(corpus);
  {
    std::vector<DocumentAnnotations> items;
    for (const auto& d : c.documents) items.push_back({d.name, d.gold});
    std::ofstream out(dir / "gold.jsonl");
    write_annotations(out, items);
  }
  REQUIRE(run({"analyze", "--corpus", corpus, "--kind", "distance", "--predictions", dir / "gold.jsonl", "--out",
               dir / "distance"}).code == 0);
  const auto distance = lines(dir / "distance/distance.csv");
  CHECK(distance.size() == 6);

  REQUIRE(run({"analyze", "--corpus", corpus, "--kind", "correlation", "--out", dir / "corr"}).code == 0);
  const auto corr = lines(dir / "corr/correlation.csv");
  REQUIRE(corr.size() == 7);
  CHECK(std::count(corr[0].begin(), corr[0].end(), ',') == 14);

  REQUIRE(run({"analyze", "--corpus", corpus, "--kind", "ttr", "--out", dir / "ttr"}).code == 0);
  CHECK(lines(dir / "ttr/type_token_ratio.csv").size() == 1 + 7 + 6);

  CHECK(run({"analyze", "--corpus", corpus, "--kind", "distance", "--out", dir / "x"}).code == cli::kExitInput);
}

TEST_CASE("configuration file with command-line override") {
  TempDir dir("config");
  {
    std::ofstream out(dir / "config.toml");
    out << "[stats]\nformat = \"json\"\nout = \"" << (dir / "from_config") << "\"\n";
  }
  const std::string corpus = data_path("fixture5.jsonl");
  REQUIRE(run({"--config", dir / "config.toml", "stats", "--corpus", corpus}).code == 0);
  CHECK(fs::exists(dir / "from_config/mentions.json"));
  CHECK(!fs::exists(dir / "from_config/mentions.csv"));

  REQUIRE(run({"--config", dir / "config.toml", "stats", "--corpus", corpus, "--format", "csv"}).code == 0);
  CHECK(fs::exists(dir / "from_config/mentions.csv"));
}
