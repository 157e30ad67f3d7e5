#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>

#include "helpers.hpp"
#include "procex/crf.hpp"
#include "procex/error.hpp"
#include "procex/evaluation.hpp"
#include "synthetic.hpp"

using namespace procex;

namespace {

CrfModel random_model(Rng& rng, int attributes, int labels, double scale = 1.0) {
  std::vector<std::string> names;
  for (int a = 0; a < attributes; ++a) names.push_back("a" + std::to_string(a));
  CrfModel m(names, labels);
  for (auto& w : m.weights) w = scale * (2 * rng.uniform() - 1);
  return m;
}

CrfSequence random_sequence(Rng& rng, int length, int attributes, int labels) {
  CrfSequence s;
  for (int t = 0; t < length; ++t) {
    std::vector<int> attrs;
    for (int a = 0; a < attributes; ++a) {
      if (rng.bernoulli(0.5)) attrs.push_back(a);
    }
    s.attributes.push_back(attrs);
    s.labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(labels))));
  }
  return s;
}

// Calls f on every label sequence of the given length.
void each_path(int length, int labels, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> path(static_cast<std::size_t>(length), 0);
  while (true) {
    f(path);
    int k = length - 1;
    while (k >= 0 && ++path[static_cast<std::size_t>(k)] == labels) path[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) return;
  }
}

double brute_log_partition(const CrfModel& m, const CrfSequence& s) {
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<double> scores;
  each_path(static_cast<int>(s.size()), m.num_labels, [&](const std::vector<int>& p) {
    scores.push_back(path_score(m, s, p));
    hi = std::max(hi, scores.back());
  });
  double sum = 0;
  for (double v : scores) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

CrfConfig quick_config(int epochs = 15) {
  CrfConfig c;
  c.epochs = epochs;
  c.seed = 4;
  return c;
}

}  // namespace

TEST_CASE("uniform model on one token") {
  CrfModel m({"x"}, kNumBioLabels);
  CrfSequence s{{{0}}, {3}};
  const auto obj = log_likelihood_and_gradient(m, std::span<const CrfSequence>(&s, 1), 0.0);
  CHECK(obj.value == doctest::Approx(-std::log(15.0)).epsilon(1e-12));
  CHECK(m.num_weights() == 15 + 15 * 15);
}

TEST_CASE("gradient agrees with central finite differences") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    CrfModel m = random_model(rng, 4, 3);
    std::vector<CrfSequence> seqs{random_sequence(rng, 3, 4, 3), random_sequence(rng, 2, 4, 3)};
    const double l2 = 0.1;
    const auto obj = log_likelihood_and_gradient(m, seqs, l2);
    const double h = 1e-5;
    double worst = 0;
    for (std::size_t k = 0; k < m.weights.size(); ++k) {
      CrfModel plus = m, minus = m;
      plus.weights[k] += h;
      minus.weights[k] -= h;
      const double numeric = (log_likelihood_and_gradient(plus, seqs, l2).value -
                              log_likelihood_and_gradient(minus, seqs, l2).value) / (2 * h);
      const double denom = std::max(1.0, std::abs(numeric));
      worst = std::max(worst, std::abs(numeric - obj.gradient[k]) / denom);
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("forward pass equals exhaustive partition function") {
  Rng rng(22);
  for (int length = 1; length <= 4; ++length) {
    for (int trial = 0; trial < 5; ++trial) {
      const CrfModel m = random_model(rng, 3, 4);
      const CrfSequence s = random_sequence(rng, length, 3, 4);
      CHECK(forward_backward(m, s).log_partition == doctest::Approx(brute_log_partition(m, s)).epsilon(1e-10));
    }
  }
}

TEST_CASE("forward and backward agree at every position") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const CrfModel m = random_model(rng, 5, kNumBioLabels, 2.0);
    const CrfSequence s = random_sequence(rng, 1 + static_cast<int>(rng.below(12)), 5, kNumBioLabels);
    const auto lat = forward_backward(m, s);
    for (int t = 0; t < lat.length; ++t) {
      double hi = -std::numeric_limits<double>::infinity();
      for (int y = 0; y < lat.labels; ++y) hi = std::max(hi, lat.alpha[t * lat.labels + y] + lat.beta[t * lat.labels + y]);
      double sum = 0;
      for (int y = 0; y < lat.labels; ++y) sum += std::exp(lat.alpha[t * lat.labels + y] + lat.beta[t * lat.labels + y] - hi);
      CHECK(std::abs(hi + std::log(sum) - lat.log_partition) < 1e-8);
    }
  }
}

TEST_CASE("viterbi equals exhaustive argmax") {
  Rng rng(24);
  for (int length = 1; length <= 4; ++length) {
    for (int trial = 0; trial < 5; ++trial) {
      const CrfModel m = random_model(rng, 3, 4);
      const CrfSequence s = random_sequence(rng, length, 3, 4);
      double best = -std::numeric_limits<double>::infinity();
      each_path(length, 4, [&](const std::vector<int>& p) { best = std::max(best, path_score(m, s, p)); });
      const auto v = viterbi(m, s);
      CHECK(v.labels.size() == static_cast<std::size_t>(length));
      CHECK(v.score == doctest::Approx(best).epsilon(1e-12));
      CHECK(path_score(m, s, v.labels) == doctest::Approx(v.score).epsilon(1e-12));
    }
  }
}

TEST_CASE("viterbi beats random label sequences") {
  Rng rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    const CrfModel m = random_model(rng, 6, kNumBioLabels);
    const CrfSequence s = random_sequence(rng, 10, 6, kNumBioLabels);
    const auto v = viterbi(m, s);
    for (int k = 0; k < 100; ++k) {
      const auto other = random_sequence(rng, 10, 0, kNumBioLabels).labels;
      CHECK(v.score >= path_score(m, s, other) - 1e-12);
    }
  }
}

TEST_CASE("training fits a pattern corpus") {
  const Corpus c = procex::testing::make_synthetic_corpus(20, 1);
  const CrfModel m = train_crf(c.documents, quick_config(50));
  MatchCounts counts(Level::Mention);
  for (const auto& d : c.documents) counts += match_mentions(predict_mentions(m, d), d.gold.mentions);
  CHECK(micro_prf(counts).f1 >= 0.95);
  REQUIRE(m.loss_history.size() == 51);
  CHECK(m.loss_history.back() < m.loss_history.front());
  for (double w : m.weights) CHECK(std::isfinite(w));
}

TEST_CASE("training is deterministic") {
  const Corpus c = procex::testing::make_synthetic_corpus(6, 2);
  const CrfModel a = train_crf(c.documents, quick_config(5));
  const CrfModel b = train_crf(c.documents, quick_config(5));
  CHECK(a.weights == b.weights);
  CHECK(a.attributes == b.attributes);
}

TEST_CASE("zero epochs leaves a uniform model") {
  const Corpus c = procex::testing::make_synthetic_corpus(3, 3);
  const CrfModel m = train_crf(c.documents, quick_config(0));
  for (double w : m.weights) CHECK(w == 0.0);
  const auto labels = predict_labels(m, c.documents[0]);
  CHECK(labels == std::vector<int>(labels.size(), 0));
}

TEST_CASE("unknown features still produce a full labeling") {
  const Corpus c = procex::testing::make_synthetic_corpus(4, 4);
  const CrfModel m = train_crf(c.documents, quick_config(3));
  const Document d = procex::testing::make_document("odd", "zzz qqq 1234 ?? ! .");
  CHECK(predict_labels(m, d).size() == static_cast<std::size_t>(d.size()));
}

TEST_CASE("invalid training input") {
  std::vector<Document> none;
  CHECK_THROWS_AS(train_crf(none, quick_config()), InputError);
  const Corpus c = procex::testing::make_synthetic_corpus(2, 5);
  CrfConfig bad = quick_config();
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_crf(c.documents, bad), InputError);
}

TEST_CASE("diverging weights raise a numeric error") {
  CrfModel m({"x"}, 3);
  m.weights[0] = std::numeric_limits<double>::infinity();
  CrfSequence s{{{0}}, {1}};
  CHECK_THROWS_AS(log_likelihood_and_gradient(m, std::span<const CrfSequence>(&s, 1), 0.1), NumericError);
}

TEST_CASE("model persistence round trip") {
  const Corpus c = procex::testing::make_synthetic_corpus(3, 6);
  const CrfModel m = train_crf(c.documents, quick_config(2));
  const auto path = std::filesystem::temp_directory_path() / "procex_test_crf.json";
  save_crf(path, m);
  const CrfModel back = load_crf(path);
  std::filesystem::remove(path);
  CHECK(back.weights == m.weights);
  CHECK(back.attributes == m.attributes);
  for (const auto& d : c.documents) CHECK(predict_labels(back, d) == predict_labels(m, d));
  CHECK_THROWS_AS(crf_from_json(nlohmann::json{{"format", "other"}}), InputError);
}
