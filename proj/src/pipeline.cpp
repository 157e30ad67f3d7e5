#include "procex/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "procex/error.hpp"

namespace procex {

ScenarioSpec scenario_spec(int id) {
  using S = Source;
  switch (id) {
    case 1: return {1, S::Predicted, S::Skipped, S::Skipped, Level::Mention};
    case 2: return {2, S::Predicted, S::Predicted, S::Skipped, Level::Entity};
    case 3: return {3, S::Gold, S::Predicted, S::Skipped, Level::Entity};
    case 4: return {4, S::Predicted, S::Predicted, S::Predicted, Level::Relation};
    case 5: return {5, S::Gold, S::Predicted, S::Predicted, Level::Relation};
    case 6: return {6, S::Gold, S::Gold, S::Predicted, Level::Relation};
    default: throw InputError("unknown scenario " + std::to_string(id) + " (expected 1-6)");
  }
}

std::string_view to_string(ResolutionStrategy strategy) {
  return strategy == ResolutionStrategy::Naive ? "naive" : "align";
}

std::optional<ResolutionStrategy> parse_resolution_strategy(std::string_view name) {
  if (name == "naive") return ResolutionStrategy::Naive;
  if (name == "align") return ResolutionStrategy::Align;
  return std::nullopt;
}

std::vector<Entity> resolve_entities(const Document& doc, const std::vector<Mention>& mentions,
                                     const PipelineConfig& config) {
  if (config.strategy == ResolutionStrategy::Naive) return naive_resolve(doc, mentions, config.resolution);
  if (!config.coref) throw InputError("alignment resolution needs coreference predictions");
  static const CorefPrediction empty;
  auto it = config.coref->find(doc.name);
  return align_resolve(doc, mentions, it == config.coref->end() ? empty : it->second, config.resolution);
}

Annotations run_pipeline(const ScenarioSpec& spec, const Document& doc, const PipelineModels& models,
                         const PipelineConfig& config) {
  Annotations out;
  if (spec.mentions == Source::Gold) {
    out.mentions = doc.gold.mentions;
  } else {
    if (!models.tagger) throw InputError("scenario " + std::to_string(spec.id) + " needs a mention model");
    out.mentions = predict_mentions(*models.tagger, doc);
    if (config.mention_transform) out.mentions = config.mention_transform(doc, std::move(out.mentions));
  }
  if (spec.entities == Source::Skipped) return out;

  if (spec.entities == Source::Gold) {
    out.entities = doc.gold.entities;
  } else {
    out.entities = resolve_entities(doc, out.mentions, config);
  }
  if (spec.relations == Source::Skipped) return out;

  if (!models.relex) throw InputError("scenario " + std::to_string(spec.id) + " needs a relation model");
  out.relations = extract_relations(*models.relex, doc, out.mentions, out.entities);
  return out;
}

ScenarioResult run_scenario(int scenario, int fold, std::span<const Document* const> test,
                            const PipelineModels& models, const PipelineConfig& config) {
  const ScenarioSpec spec = scenario_spec(scenario);
  MatchCounts counts(spec.level);
  ScenarioResult result;
  for (const Document* doc : test) {
    Annotations predicted = run_pipeline(spec, *doc, models, config);
    counts += match_level(spec.level, predicted, doc->gold);
    result.predictions.push_back({doc->name, std::move(predicted)});
  }
  result.report = make_report(scenario, fold, spec.level, counts);
  return result;
}

namespace {

FoldResult run_fold(const Corpus& corpus, const Fold& split, std::size_t fold, const std::vector<int>& scenarios,
                    std::uint64_t seed, const ExperimentConfig& config) {
  FoldResult result;
  result.split = split;
  std::vector<const Document*> train, test;
  for (std::size_t i : split.train) train.push_back(&corpus.documents[i]);
  for (std::size_t i : split.test) test.push_back(&corpus.documents[i]);

  bool need_tagger = false, need_relex = false;
  for (int s : scenarios) {
    const auto spec = scenario_spec(s);
    need_tagger |= spec.mentions == Source::Predicted;
    need_relex |= spec.relations == Source::Predicted;
  }
  if (need_tagger) {
    CrfConfig c = config.crf;
    c.seed = derive_seed(seed, 2 * fold);
    result.tagger = train_crf(std::span<const Document* const>(train), c);
  }
  if (need_relex) {
    RelexTrainConfig c = config.relex;
    c.seed = derive_seed(seed, 2 * fold + 1);
    result.relex = train_relation_model(std::span<const Document* const>(train), c);
  }
  const PipelineModels models{result.tagger ? &*result.tagger : nullptr, result.relex ? &*result.relex : nullptr};
  for (int s : scenarios) {
    result.scenarios.push_back(
        run_scenario(s, static_cast<int>(fold), std::span<const Document* const>(test), models, config.pipeline));
  }
  return result;
}

}  // namespace

CrossValidationResult cross_validate(const Corpus& corpus, std::size_t k, const std::vector<int>& scenarios,
                                     std::uint64_t seed, const ExperimentConfig& config) {
  if (scenarios.empty()) throw InputError("no scenarios requested");
  for (int s : scenarios) {
    const auto spec = scenario_spec(s);
    if (spec.entities == Source::Predicted && config.pipeline.strategy == ResolutionStrategy::Align &&
        !config.pipeline.coref) {
      throw InputError("scenario " + std::to_string(s) + " with the align strategy needs coreference predictions");
    }
  }
  const auto splits = split_folds(corpus, k, seed);
  CrossValidationResult result;
  result.scenarios = scenarios;
  result.folds.resize(splits.size());

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(config.threads, 1)), 1,
                                                      splits.size());
  std::vector<std::exception_ptr> errors(splits.size());
  auto work = [&](std::size_t w) {
    for (std::size_t f = w; f < splits.size(); f += workers) {
      try {
        result.folds[f] = run_fold(corpus, splits[f], f, scenarios, seed, config);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    std::vector<MetricsReport> reports;
    for (const auto& fold : result.folds) reports.push_back(fold.scenarios[s].report);
    result.averages.push_back(average_reports(reports));
  }
  return result;
}

int argument_distance(const Annotations& a, const Relation& r) {
  int best = std::numeric_limits<int>::max();
  for (std::size_t h : a.entities.at(r.head).mention_ids) {
    for (std::size_t t : a.entities.at(r.tail).mention_ids) {
      best = std::min(best, token_gap(a.mentions.at(h), a.mentions.at(t)));
    }
  }
  return best;
}

std::vector<DistanceBin> precision_by_distance(std::span<const PredictionPair> documents, int bins,
                                               double quantile) {
  if (bins < 1) throw InputError("bin count must be positive");
  if (!(quantile > 0 && quantile <= 1)) throw InputError("quantile must be in (0, 1]");
  std::vector<std::pair<int, bool>> items;
  for (const auto& d : documents) {
    const auto hits = relation_hits(*d.predicted, *d.gold);
    for (std::size_t i = 0; i < d.predicted->relations.size(); ++i) {
      items.emplace_back(argument_distance(*d.predicted, d.predicted->relations[i]), hits[i]);
    }
  }
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const auto keep = static_cast<std::size_t>(std::floor(quantile * static_cast<double>(items.size()) + 1e-9));
  items.resize(keep);
  const auto n = static_cast<std::size_t>(bins);
  if (items.size() < n) {
    throw InputError(std::to_string(items.size()) + " relations left after trimming, need at least " +
                     std::to_string(n));
  }
  std::vector<DistanceBin> out;
  std::size_t pos = 0;
  for (std::size_t b = 0; b < n; ++b) {
    const std::size_t size = items.size() / n + (b < items.size() % n ? 1 : 0);
    DistanceBin bin;
    bin.min_distance = items[pos].first;
    bin.max_distance = items[pos + size - 1].first;
    bin.relations = static_cast<long>(size);
    for (std::size_t i = pos; i < pos + size; ++i) bin.correct += items[i].second ? 1 : 0;
    bin.precision = static_cast<double>(bin.correct) / static_cast<double>(size);
    out.push_back(bin);
    pos += size;
  }
  return out;
}

std::vector<SweepRow> sampling_rate_sweep(const Corpus& corpus, std::vector<int> rates,
                                          const std::vector<std::uint64_t>& seeds, RelexTrainConfig base) {
  if (rates.empty()) throw InputError("no sampling rates given");
  if (seeds.empty()) throw InputError("no seeds given");
  if (corpus.size() < 2) throw InputError("the sweep needs at least two documents");
  std::sort(rates.begin(), rates.end());
  const std::size_t k = std::min<std::size_t>(5, corpus.size());
  std::vector<SweepRow> rows;
  for (int rate : rates) {
    SweepRow row;
    row.negative_rate = rate;
    for (std::uint64_t seed : seeds) {
      const Fold fold = split_folds(corpus, k, seed).front();
      std::vector<const Document*> train, test;
      for (std::size_t i : fold.train) train.push_back(&corpus.documents[i]);
      for (std::size_t i : fold.test) test.push_back(&corpus.documents[i]);
      RelexTrainConfig c = base;
      c.negative_rate = rate;
      c.seed = seed;
      const RelexModel model = train_relation_model(std::span<const Document* const>(train), c);
      const auto result = run_scenario(6, 0, std::span<const Document* const>(test), {nullptr, &model}, {});
      row.precision += result.report.micro.precision;
      row.recall += result.report.micro.recall;
      row.f1 += result.report.micro.f1;
    }
    const double n = static_cast<double>(seeds.size());
    row.precision /= n;
    row.recall /= n;
    row.f1 /= n;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace procex
