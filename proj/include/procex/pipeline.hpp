#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "procex/corpus.hpp"
#include "procex/crf.hpp"
#include "procex/evaluation.hpp"
#include "procex/relex.hpp"
#include "procex/resolution.hpp"

namespace procex {

enum class Source { Predicted, Gold, Skipped };

/// Which stage inputs are predicted and which are injected from gold.
///   1 mentions
///   2 entities from predicted mentions
///   3 entities from gold mentions
///   4 relations on pipeline entities
///   5 relations on entities resolved from gold mentions
///   6 relations on gold entities
struct ScenarioSpec {
  int id = 0;
  Source mentions = Source::Predicted;
  Source entities = Source::Skipped;
  Source relations = Source::Skipped;
  Level level = Level::Mention;
};

/// Throws InputError for ids outside 1..6.
ScenarioSpec scenario_spec(int id);
inline constexpr int kNumScenarios = 6;

enum class ResolutionStrategy { Naive, Align };
std::string_view to_string(ResolutionStrategy strategy);
std::optional<ResolutionStrategy> parse_resolution_strategy(std::string_view name);

/// Applied to tagger output before resolution; used to inject tagger noise.
using MentionTransform = std::function<std::vector<Mention>(const Document&, std::vector<Mention>)>;

struct PipelineConfig {
  ResolutionStrategy strategy = ResolutionStrategy::Naive;
  ResolutionConfig resolution;
  const CorefIndex* coref = nullptr;
  MentionTransform mention_transform;
};

struct PipelineModels {
  const CrfModel* tagger = nullptr;
  const RelexModel* relex = nullptr;
};

/// Runs the stages of a scenario on one document. Stages after the scenario's
/// output level are left empty. Throws InputError when a needed model or the
/// coreference predictions for the align strategy are missing.
Annotations run_pipeline(const ScenarioSpec& spec, const Document& doc, const PipelineModels& models,
                         const PipelineConfig& config);

std::vector<Entity> resolve_entities(const Document& doc, const std::vector<Mention>& mentions,
                                     const PipelineConfig& config);

struct ScenarioResult {
  MetricsReport report;
  std::vector<DocumentAnnotations> predictions;
};

/// Runs a scenario on the test documents and scores the pooled counts.
ScenarioResult run_scenario(int scenario, int fold, std::span<const Document* const> test,
                            const PipelineModels& models, const PipelineConfig& config);

struct ExperimentConfig {
  CrfConfig crf;
  RelexTrainConfig relex;
  PipelineConfig pipeline;
  int threads = 1;
};

struct FoldResult {
  Fold split;
  std::optional<CrfModel> tagger;
  std::optional<RelexModel> relex;
  std::vector<ScenarioResult> scenarios;  // in the order requested
};

struct CrossValidationResult {
  std::vector<int> scenarios;
  std::vector<FoldResult> folds;
  std::vector<MetricsReport> averages;  // one per scenario
};

/// k-fold cross-validation: trains the needed models on each fold's training
/// documents, runs every scenario on its test documents, and averages the
/// per-fold reports. Fold model seeds derive from `seed`.
CrossValidationResult cross_validate(const Corpus& corpus, std::size_t k, const std::vector<int>& scenarios,
                                     std::uint64_t seed, const ExperimentConfig& config);

/// Smallest token gap between any head-entity and any tail-entity mention.
int argument_distance(const Annotations& annotations, const Relation& relation);

struct DistanceBin {
  int min_distance = 0;
  int max_distance = 0;
  long relations = 0;
  long correct = 0;
  double precision = 0;
};

struct PredictionPair {
  const Annotations* predicted;
  const Annotations* gold;
};

/// Keeps the floor(quantile * n) predicted relations with the smallest
/// argument distance, splits them into equal-count bins (earlier bins take the
/// remainder) and reports precision per bin. Throws InputError when fewer
/// relations than bins remain.
std::vector<DistanceBin> precision_by_distance(std::span<const PredictionPair> documents, int bins = 5,
                                               double quantile = 0.95);

struct SweepRow {
  int negative_rate = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

/// For every rate and seed, trains a relation model on the first fold of a
/// 5-fold split and scores scenario 6 on its test documents; scores are
/// averaged over seeds. Rows come out sorted by rate.
std::vector<SweepRow> sampling_rate_sweep(const Corpus& corpus, std::vector<int> rates,
                                          const std::vector<std::uint64_t>& seeds, RelexTrainConfig base);

}  // namespace procex
