#include "procex/crf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "procex/error.hpp"
#include "procex/features.hpp"
#include "procex/rng.hpp"

namespace procex {

namespace {

double log_sum_exp(const double* values, int n) {
  double hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) hi = std::max(hi, values[i]);
  if (!std::isfinite(hi)) return hi;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::exp(values[i] - hi);
  return hi + std::log(sum);
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string("non-finite ") + what);
}

double mean_loss(const CrfModel& model, std::span<const CrfSequence> seqs) {
  const auto obj = log_likelihood_and_gradient(model, seqs, model.config.l2, 1.0);
  return -obj.value / static_cast<double>(std::max<std::size_t>(seqs.size(), 1));
}

std::vector<double> emission_scores(const CrfModel& model, const CrfSequence& seq) {
  const int L = model.num_labels;
  std::vector<double> emission(seq.size() * static_cast<std::size_t>(L), 0.0);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    double* row = &emission[t * static_cast<std::size_t>(L)];
    for (int a : seq.attributes[t]) {
      const double* w = &model.weights[static_cast<std::size_t>(a * L)];
      for (int y = 0; y < L; ++y) row[y] += w[y];
    }
  }
  return emission;
}

// Sentence ranges [first, last] of a document.
std::vector<std::pair<int, int>> sentence_ranges(const Document& doc) {
  std::vector<std::pair<int, int>> ranges;
  int first = 0;
  for (int i = 1; i <= doc.size(); ++i) {
    if (i == doc.size() || doc.sentence_ids[static_cast<std::size_t>(i)] !=
                               doc.sentence_ids[static_cast<std::size_t>(i - 1)]) {
      ranges.emplace_back(first, i - 1);
      first = i;
    }
  }
  return ranges;
}

}  // namespace

CrfModel::CrfModel(std::vector<std::string> attribute_names, int labels)
    : num_labels(labels), attributes(std::move(attribute_names)) {
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    vocabulary.emplace(attributes[i], static_cast<int>(i));
  }
  weights.assign(num_weights(), 0.0);
}

CrfLattice forward_backward(const CrfModel& model, const CrfSequence& seq) {
  const int L = model.num_labels;
  const int T = static_cast<int>(seq.size());
  CrfLattice lat;
  lat.length = T;
  lat.labels = L;
  lat.emission = emission_scores(model, seq);
  if (T == 0) return lat;

  lat.alpha.assign(static_cast<std::size_t>(T * L), 0.0);
  lat.beta.assign(static_cast<std::size_t>(T * L), 0.0);
  std::vector<double> buf(static_cast<std::size_t>(L));
  for (int y = 0; y < L; ++y) lat.alpha[static_cast<std::size_t>(y)] = lat.emission[static_cast<std::size_t>(y)];
  for (int t = 1; t < T; ++t) {
    for (int y = 0; y < L; ++y) {
      for (int p = 0; p < L; ++p) {
        buf[static_cast<std::size_t>(p)] = lat.alpha[static_cast<std::size_t>((t - 1) * L + p)] + model.transition(p, y);
      }
      lat.alpha[static_cast<std::size_t>(t * L + y)] =
          lat.emission[static_cast<std::size_t>(t * L + y)] + log_sum_exp(buf.data(), L);
    }
  }
  for (int t = T - 2; t >= 0; --t) {
    for (int y = 0; y < L; ++y) {
      for (int n = 0; n < L; ++n) {
        buf[static_cast<std::size_t>(n)] = model.transition(y, n) +
                                           lat.emission[static_cast<std::size_t>((t + 1) * L + n)] +
                                           lat.beta[static_cast<std::size_t>((t + 1) * L + n)];
      }
      lat.beta[static_cast<std::size_t>(t * L + y)] = log_sum_exp(buf.data(), L);
    }
  }
  lat.log_partition = log_sum_exp(&lat.alpha[static_cast<std::size_t>((T - 1) * L)], L);
  return lat;
}

double path_score(const CrfModel& model, const CrfSequence& seq, std::span<const int> labels) {
  double score = 0.0;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    for (int a : seq.attributes[t]) score += model.state_weight(a, labels[t]);
    if (t > 0) score += model.transition(labels[t - 1], labels[t]);
  }
  return score;
}

ViterbiResult viterbi(const CrfModel& model, const CrfSequence& seq) {
  const int L = model.num_labels;
  const int T = static_cast<int>(seq.size());
  ViterbiResult result;
  if (T == 0) return result;

  const std::vector<double> emission = emission_scores(model, seq);
  std::vector<double> delta(emission.begin(), emission.begin() + L);
  std::vector<int> back(static_cast<std::size_t>(T * L), 0);
  std::vector<double> next(static_cast<std::size_t>(L));
  for (int t = 1; t < T; ++t) {
    for (int y = 0; y < L; ++y) {
      int best = 0;
      double best_score = delta[0] + model.transition(0, y);
      for (int p = 1; p < L; ++p) {
        const double s = delta[static_cast<std::size_t>(p)] + model.transition(p, y);
        if (s > best_score) {
          best_score = s;
          best = p;
        }
      }
      next[static_cast<std::size_t>(y)] = best_score + emission[static_cast<std::size_t>(t * L + y)];
      back[static_cast<std::size_t>(t * L + y)] = best;
    }
    delta.swap(next);
  }
  int last = static_cast<int>(std::max_element(delta.begin(), delta.end()) - delta.begin());
  result.score = delta[static_cast<std::size_t>(last)];
  result.labels.assign(static_cast<std::size_t>(T), 0);
  for (int t = T - 1; t >= 0; --t) {
    result.labels[static_cast<std::size_t>(t)] = last;
    if (t > 0) last = back[static_cast<std::size_t>(t * L + last)];
  }
  return result;
}

Objective log_likelihood_and_gradient(const CrfModel& model, std::span<const CrfSequence> sequences,
                                      double l2, double l2_scale) {
  const int L = model.num_labels;
  const std::size_t S = model.num_state_features();
  Objective obj;
  obj.gradient.assign(model.num_weights(), 0.0);
  auto& g = obj.gradient;

  for (const auto& seq : sequences) {
    const int T = static_cast<int>(seq.size());
    if (T == 0) continue;
    if (seq.labels.size() != seq.size()) throw InputError("CRF sequence is missing labels");
    const CrfLattice lat = forward_backward(model, seq);
    check_finite(lat.log_partition, "log partition");
    obj.value += path_score(model, seq, seq.labels) - lat.log_partition;

    for (int t = 0; t < T; ++t) {
      const auto& attrs = seq.attributes[static_cast<std::size_t>(t)];
      const int gold = seq.labels[static_cast<std::size_t>(t)];
      for (int y = 0; y < L; ++y) {
        const double marginal = std::exp(lat.alpha[static_cast<std::size_t>(t * L + y)] +
                                         lat.beta[static_cast<std::size_t>(t * L + y)] -
                                         lat.log_partition);
        const double delta = (y == gold ? 1.0 : 0.0) - marginal;
        if (delta == 0.0) continue;
        for (int a : attrs) g[static_cast<std::size_t>(a * L + y)] += delta;
      }
      if (t == 0) continue;
      const int prev_gold = seq.labels[static_cast<std::size_t>(t - 1)];
      g[S + static_cast<std::size_t>(prev_gold * L + gold)] += 1.0;
      for (int p = 0; p < L; ++p) {
        const double ap = lat.alpha[static_cast<std::size_t>((t - 1) * L + p)];
        for (int y = 0; y < L; ++y) {
          const double pair = std::exp(ap + model.transition(p, y) +
                                       lat.emission[static_cast<std::size_t>(t * L + y)] +
                                       lat.beta[static_cast<std::size_t>(t * L + y)] -
                                       lat.log_partition);
          g[S + static_cast<std::size_t>(p * L + y)] -= pair;
        }
      }
    }
  }

  const double reg = l2 * l2_scale;
  double norm = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    norm += model.weights[i] * model.weights[i];
    g[i] -= reg * model.weights[i];
  }
  obj.value -= 0.5 * reg * norm;
  check_finite(obj.value, "log-likelihood");
  return obj;
}

std::vector<CrfSequence> encode_document(const CrfModel& model, const Document& doc,
                                         bool with_labels) {
  std::vector<int> labels;
  if (with_labels) labels = encode_bio(doc.size(), doc.gold.mentions);
  std::vector<CrfSequence> out;
  for (auto [first, last] : sentence_ranges(doc)) {
    CrfSequence seq;
    for (int i = first; i <= last; ++i) {
      std::vector<int> ids;
      for (const auto& f : extract_token_features(doc, i)) {
        if (auto it = model.vocabulary.find(f); it != model.vocabulary.end()) ids.push_back(it->second);
      }
      seq.attributes.push_back(std::move(ids));
      if (with_labels) seq.labels.push_back(labels[static_cast<std::size_t>(i)]);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

CrfModel train_crf(std::span<const Document* const> documents, const CrfConfig& config) {
  if (documents.empty()) throw InputError("cannot train a CRF on an empty training set");
  if (config.epochs < 0 || config.batch_size <= 0 || !(config.learning_rate > 0)) {
    throw InputError("invalid CRF training configuration");
  }

  std::vector<std::string> names;
  std::unordered_map<std::string, int> seen;
  for (const Document* doc : documents) {
    for (int i = 0; i < doc->size(); ++i) {
      for (auto& f : extract_token_features(*doc, i)) {
        if (seen.emplace(f, static_cast<int>(names.size())).second) names.push_back(std::move(f));
      }
    }
  }
  CrfModel model(std::move(names), kNumBioLabels);
  model.config = config;

  std::vector<CrfSequence> data;
  for (const Document* doc : documents) {
    for (auto& seq : encode_document(model, *doc, true)) data.push_back(std::move(seq));
  }
  const double n = static_cast<double>(data.size());

  model.loss_history.push_back(mean_loss(model, data));
  std::vector<std::size_t> order(data.size());
  std::vector<CrfSequence> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(order);
    const double step = config.learning_rate / std::sqrt(static_cast<double>(epoch));
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(data[order[i]]);
      const auto obj = log_likelihood_and_gradient(model, batch, config.l2,
                                                   static_cast<double>(batch.size()) / n);
      for (std::size_t w = 0; w < model.weights.size(); ++w) model.weights[w] += step * obj.gradient[w];
    }
    const double loss = mean_loss(model, data);
    if (!std::isfinite(loss)) throw NumericError("CRF training diverged at epoch " + std::to_string(epoch));
    model.loss_history.push_back(loss);
  }
  return model;
}

CrfModel train_crf(std::span<const Document> documents, const CrfConfig& config) {
  std::vector<const Document*> ptrs;
  for (const auto& d : documents) ptrs.push_back(&d);
  return train_crf(std::span<const Document* const>(ptrs), config);
}

std::vector<int> predict_labels(const CrfModel& model, const Document& doc) {
  std::vector<int> labels;
  labels.reserve(doc.tokens.size());
  for (const auto& seq : encode_document(model, doc, false)) {
    const auto best = viterbi(model, seq);
    labels.insert(labels.end(), best.labels.begin(), best.labels.end());
  }
  return labels;
}

std::vector<Mention> predict_mentions(const CrfModel& model, const Document& doc) {
  return decode_bio(predict_labels(model, doc));
}

nlohmann::json crf_to_json(const CrfModel& model) {
  nlohmann::json labels = nlohmann::json::array();
  for (int i = 0; i < model.num_labels; ++i) {
    labels.push_back(model.num_labels == kNumBioLabels ? BioLabel::from_index(i).name()
                                                       : std::to_string(i));
  }
  return {
      {"format", "procex-crf"},
      {"version", 1},
      {"labels", std::move(labels)},
      {"attributes", model.attributes},
      {"weights", model.weights},
      {"loss_history", model.loss_history},
      {"config",
       {{"l2", model.config.l2},
        {"epochs", model.config.epochs},
        {"learning_rate", model.config.learning_rate},
        {"batch_size", model.config.batch_size},
        {"seed", model.config.seed}}},
  };
}

CrfModel crf_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "procex-crf") throw InputError("not a CRF model file");
    CrfModel model(j.at("attributes").get<std::vector<std::string>>(),
                   static_cast<int>(j.at("labels").size()));
    auto weights = j.at("weights").get<std::vector<double>>();
    if (weights.size() != model.num_weights()) throw InputError("CRF weight vector has wrong length");
    model.weights = std::move(weights);
    model.loss_history = j.value("loss_history", std::vector<double>{});
    const auto& c = j.at("config");
    model.config.l2 = c.at("l2").get<double>();
    model.config.epochs = c.at("epochs").get<int>();
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.batch_size = c.at("batch_size").get<int>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed CRF model: ") + e.what());
  }
}

void save_crf(const std::filesystem::path& path, const CrfModel& model) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << crf_to_json(model).dump() << '\n';
}

CrfModel load_crf(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path.string());
  try {
    return crf_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace procex
