#include "procex/relex.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <string>

#include "procex/error.hpp"

namespace procex {

namespace {

constexpr int kPadCode = static_cast<int>(kNumTags);

// Mention order by (start, end) plus each mention's rank in it, so context
// lookups are O(c) per pair.
class MentionIndex {
 public:
  explicit MentionIndex(const std::vector<Mention>& mentions) : mentions_(mentions), order_(mentions.size()) {
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(mentions[a].start, mentions[a].end) < std::tie(mentions[b].start, mentions[b].end);
    });
    rank_.resize(mentions.size());
    for (std::size_t r = 0; r < order_.size(); ++r) rank_[order_[r]] = r;
  }

  std::vector<std::optional<Tag>> context(std::size_t m, int c) const {
    std::vector<std::optional<Tag>> slots;
    const auto r = static_cast<long>(rank_[m]);
    for (long k = 1; k <= c; ++k) {
      const long p = r - k;
      slots.push_back(p >= 0 ? std::optional<Tag>(mentions_[order_[static_cast<std::size_t>(p)]].tag) : std::nullopt);
    }
    for (long k = 1; k <= c; ++k) {
      const long p = r + k;
      slots.push_back(p < static_cast<long>(order_.size())
                          ? std::optional<Tag>(mentions_[order_[static_cast<std::size_t>(p)]].tag)
                          : std::nullopt);
    }
    return slots;
  }

 private:
  const std::vector<Mention>& mentions_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> rank_;
};

int signed_gap(const Mention& head, const Mention& tail) {
  int d = 0;
  if (tail.start > head.end) {
    d = tail.start - head.end - 1;
  } else if (tail.end < head.start) {
    d = -(head.start - tail.end - 1);
  }
  return std::clamp(d, -kMaxTokenDistance, kMaxTokenDistance);
}

PairFeatures make_features(const Document& doc, const std::vector<Mention>& mentions, const MentionIndex& index,
                           std::size_t head, std::size_t tail, int c) {
  const auto& h = mentions[head];
  const auto& t = mentions[tail];
  PairFeatures f;
  f.head_tag = h.tag;
  f.tail_tag = t.tag;
  f.token_distance = signed_gap(h, t);
  f.sentence_distance = doc.sentence_ids[static_cast<std::size_t>(t.start)] -
                        doc.sentence_ids[static_cast<std::size_t>(h.start)];
  f.head_context = index.context(head, c);
  f.tail_context = index.context(tail, c);
  return f;
}

std::vector<std::size_t> mention_owner(const Annotations& a) {
  std::vector<std::size_t> owner(a.mentions.size(), SIZE_MAX);
  for (std::size_t e = 0; e < a.entities.size(); ++e) {
    for (std::size_t m : a.entities[e].mention_ids) owner[m] = e;
  }
  return owner;
}

void check_config(const RelexTrainConfig& c) {
  if (c.negative_rate < 0 || c.context_size < 0 || c.iterations < 1 || !(c.learning_rate > 0) ||
      c.max_depth < 1 || c.l2_leaf < 0) {
    throw InputError("invalid relation-extraction configuration");
  }
}

}  // namespace

PairFeatures build_pair_features(const Document& doc, const std::vector<Mention>& mentions, std::size_t head,
                                 std::size_t tail, int context_size) {
  if (head == tail) throw InputError("relation arguments must be distinct mentions");
  if (head >= mentions.size() || tail >= mentions.size()) throw InputError("mention index out of range");
  if (context_size < 0) throw InputError("negative context size");
  return make_features(doc, mentions, MentionIndex(mentions), head, tail, context_size);
}

std::vector<gbdt::FeatureSpec> pair_feature_specs(int context_size) {
  std::vector<std::string> categories;
  for (Tag t : kAllTags) categories.emplace_back(to_string(t));
  categories.emplace_back("PAD");
  std::vector<gbdt::FeatureSpec> specs;
  auto categorical = [&](std::string name) {
    specs.push_back({std::move(name), gbdt::FeatureKind::Categorical, categories});
  };
  categorical("head_tag");
  categorical("tail_tag");
  for (const char* arg : {"head", "tail"}) {
    for (const char* side : {"prev", "next"}) {
      for (int k = 1; k <= context_size; ++k) categorical(std::string(arg) + "_" + side + "_" + std::to_string(k));
    }
  }
  specs.push_back({"token_distance", gbdt::FeatureKind::Numeric, {}});
  specs.push_back({"sentence_distance", gbdt::FeatureKind::Numeric, {}});
  return specs;
}

std::vector<double> encode_pair_features(const PairFeatures& f) {
  std::vector<double> row;
  row.reserve(4 + f.head_context.size() * 2);
  auto code = [](const std::optional<Tag>& t) { return static_cast<double>(t ? static_cast<int>(index_of(*t)) : kPadCode); };
  row.push_back(static_cast<double>(index_of(f.head_tag)));
  row.push_back(static_cast<double>(index_of(f.tail_tag)));
  for (const auto& t : f.head_context) row.push_back(code(t));
  for (const auto& t : f.tail_context) row.push_back(code(t));
  row.push_back(f.token_distance);
  row.push_back(f.sentence_distance);
  return row;
}

std::vector<LabeledPair> positive_pairs(const Annotations& gold) {
  std::vector<LabeledPair> out;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& r : gold.relations) {
    for (std::size_t h : gold.entities.at(r.head).mention_ids) {
      for (std::size_t t : gold.entities.at(r.tail).mention_ids) {
        if (h == t || !seen.emplace(h, t).second) continue;
        out.push_back({h, t, static_cast<int>(index_of(r.type))});
      }
    }
  }
  return out;
}

std::vector<LabeledPair> negative_pool(const Annotations& gold) {
  const auto owner = mention_owner(gold);
  std::set<std::pair<std::size_t, std::size_t>> related;
  for (const auto& r : gold.relations) related.emplace(r.head, r.tail);
  std::vector<LabeledPair> out;
  for (std::size_t h = 0; h < gold.mentions.size(); ++h) {
    for (std::size_t t = 0; t < gold.mentions.size(); ++t) {
      if (h == t || owner[h] == owner[t] || related.count({owner[h], owner[t]})) continue;
      out.push_back({h, t, kNothingClass});
    }
  }
  return out;
}

std::vector<LabeledPair> sample_training_pairs(const Document& doc, const Annotations& gold, int negative_rate,
                                               Rng& rng) {
  (void)doc;
  auto rows = positive_pairs(gold);
  auto pool = negative_pool(gold);
  const std::size_t want = std::min(pool.size(), static_cast<std::size_t>(std::max(negative_rate, 0)) * rows.size());
  // Partial Fisher-Yates: the first `want` slots become a uniform sample.
  for (std::size_t i = 0; i < want; ++i) {
    std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  }
  rows.insert(rows.end(), pool.begin(), pool.begin() + static_cast<long>(want));
  return rows;
}

RelexModel train_relation_model(std::span<const Document* const> documents, const RelexTrainConfig& config) {
  check_config(config);
  if (documents.empty()) throw InputError("relation extraction needs at least one training document");

  gbdt::FeatureMatrix data;
  data.features = pair_feature_specs(config.context_size);
  std::vector<int> labels;
  std::vector<std::size_t> positives;
  // Per document: number of positives and the row range of its negative pool.
  struct DocRows {
    std::size_t positives;
    std::size_t pool_begin;
    std::size_t pool_size;
  };
  std::vector<DocRows> per_doc;

  for (const Document* doc : documents) {
    const MentionIndex index(doc->gold.mentions);
    auto add = [&](const LabeledPair& p) {
      data.add_row(encode_pair_features(make_features(*doc, doc->gold.mentions, index, p.head, p.tail,
                                                      config.context_size)));
      labels.push_back(p.label);
    };
    const auto pos = positive_pairs(doc->gold);
    for (const auto& p : pos) {
      positives.push_back(labels.size());
      add(p);
    }
    const auto pool = negative_pool(doc->gold);
    const std::size_t begin = labels.size();
    // A document without positives never contributes negatives.
    if (!pos.empty()) {
      for (const auto& p : pool) add(p);
    }
    per_doc.push_back({pos.size(), begin, pos.empty() ? 0 : pool.size()});
  }

  const auto rate = static_cast<std::size_t>(config.negative_rate);
  gbdt::RowSampler sampler = [&](int iteration) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(iteration)));
    std::vector<std::size_t> rows = positives;
    std::vector<std::size_t> pool;
    for (const auto& d : per_doc) {
      const std::size_t want = std::min(d.pool_size, rate * d.positives);
      pool.resize(d.pool_size);
      std::iota(pool.begin(), pool.end(), d.pool_begin);
      for (std::size_t i = 0; i < want; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
      rows.insert(rows.end(), pool.begin(), pool.begin() + static_cast<long>(want));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
  };

  gbdt::GbdtConfig gc;
  gc.iterations = config.iterations;
  gc.learning_rate = config.learning_rate;
  gc.max_depth = config.max_depth;
  gc.l2_leaf = config.l2_leaf;
  auto trained = gbdt::train_gbdt(data, labels, kNumRelexClasses, gc, sampler);

  RelexModel model;
  model.config = config;
  model.booster = std::move(trained.model);
  model.loss_history = std::move(trained.loss_history);
  return model;
}

RelexModel train_relation_model(std::span<const Document> documents, const RelexTrainConfig& config) {
  std::vector<const Document*> ptrs;
  for (const auto& d : documents) ptrs.push_back(&d);
  return train_relation_model(std::span<const Document* const>(ptrs), config);
}

PairPrediction predict_mention_pair(const RelexModel& model, const PairFeatures& features) {
  if (features.head_context.size() != features.tail_context.size() ||
      features.context_size() != model.config.context_size ||
      features.head_context.size() != static_cast<std::size_t>(2 * model.config.context_size)) {
    throw InputError("pair features have context size " + std::to_string(features.context_size()) +
                     ", model expects " + std::to_string(model.config.context_size));
  }
  PairPrediction p;
  p.scores = model.booster.raw_scores(encode_pair_features(features));
  p.probabilities = gbdt::softmax(p.scores);
  p.label = static_cast<int>(std::max_element(p.scores.begin(), p.scores.end()) - p.scores.begin());
  return p;
}

std::vector<Relation> extract_relations(const RelexModel& model, const Document& doc,
                                        const std::vector<Mention>& mentions, const std::vector<Entity>& entities) {
  const MentionIndex index(mentions);
  const int c = model.config.context_size;
  std::vector<Relation> out;
  for (std::size_t a = 0; a < entities.size(); ++a) {
    for (std::size_t b = 0; b < entities.size(); ++b) {
      if (a == b) continue;
      std::vector<int> votes(kNumRelationTypes, 0);
      std::vector<double> mass(kNumRelationTypes, 0.0);
      for (std::size_t h : entities[a].mention_ids) {
        for (std::size_t t : entities[b].mention_ids) {
          if (h == t) continue;
          const auto p = predict_mention_pair(model, make_features(doc, mentions, index, h, t, c));
          if (p.label == kNothingClass) continue;
          ++votes[static_cast<std::size_t>(p.label)];
          mass[static_cast<std::size_t>(p.label)] += p.probabilities[static_cast<std::size_t>(p.label)];
        }
      }
      int best = -1;
      for (std::size_t k = 0; k < kNumRelationTypes; ++k) {
        if (votes[k] == 0) continue;
        const auto bk = static_cast<std::size_t>(best);
        if (best < 0 || votes[k] > votes[bk] || (votes[k] == votes[bk] && mass[k] > mass[bk])) {
          best = static_cast<int>(k);
        }
      }
      if (best >= 0) out.push_back({a, b, kAllRelationTypes[static_cast<std::size_t>(best)]});
    }
  }
  return out;
}

nlohmann::json relex_to_json(const RelexModel& model) {
  const auto& c = model.config;
  return {{"format", "procex-relex"},
          {"version", 1},
          {"config",
           {{"negative_rate", c.negative_rate},
            {"context_size", c.context_size},
            {"iterations", c.iterations},
            {"learning_rate", c.learning_rate},
            {"max_depth", c.max_depth},
            {"l2_leaf", c.l2_leaf},
            {"seed", c.seed}}},
          {"loss_history", model.loss_history},
          {"booster", gbdt::to_json(model.booster)}};
}

RelexModel relex_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "procex-relex") throw InputError("not a relation model file");
    RelexModel model;
    const auto& c = j.at("config");
    model.config.negative_rate = c.at("negative_rate").get<int>();
    model.config.context_size = c.at("context_size").get<int>();
    model.config.iterations = c.at("iterations").get<int>();
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.max_depth = c.at("max_depth").get<int>();
    model.config.l2_leaf = c.at("l2_leaf").get<double>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.loss_history = j.value("loss_history", std::vector<double>{});
    model.booster = gbdt::gbdt_from_json(j.at("booster"));
    if (model.booster.num_classes != kNumRelexClasses ||
        model.booster.features.size() != pair_feature_specs(model.config.context_size).size()) {
      throw InputError("relation model does not match its configuration");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed relation model: ") + e.what());
  }
}

void save_relex(const std::filesystem::path& path, const RelexModel& model) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << relex_to_json(model).dump() << '\n';
}

RelexModel load_relex(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file " + path.string());
  try {
    return relex_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace procex
