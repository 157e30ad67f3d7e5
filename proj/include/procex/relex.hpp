#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "procex/gbdt.hpp"
#include "procex/rng.hpp"
#include "procex/types.hpp"

namespace procex {

// Relation types occupy classes 0..5; the last class means "no relation".
inline constexpr int kNumRelexClasses = static_cast<int>(kNumRelationTypes) + 1;
inline constexpr int kNothingClass = static_cast<int>(kNumRelationTypes);

inline constexpr int kMaxTokenDistance = 200;

struct RelexTrainConfig {
  int negative_rate = 40;
  int context_size = 2;
  int iterations = 1000;
  double learning_rate = 0.1;
  int max_depth = 4;
  double l2_leaf = 1.0;
  std::uint64_t seed = 0;
};

/// Features of an ordered mention pair. Each context holds the tags of the c
/// mentions before the argument (nearest first) followed by the c mentions
/// after it (nearest first); empty slots are padding.
struct PairFeatures {
  Tag head_tag = Tag::Activity;
  Tag tail_tag = Tag::Activity;
  int token_distance = 0;     // signed token gap, negative when the tail precedes the head
  int sentence_distance = 0;  // sentence(tail) - sentence(head)
  std::vector<std::optional<Tag>> head_context;
  std::vector<std::optional<Tag>> tail_context;

  int context_size() const { return static_cast<int>(head_context.size() / 2); }
  friend bool operator==(const PairFeatures&, const PairFeatures&) = default;
};

/// Throws InputError when head == tail or an index is out of range.
PairFeatures build_pair_features(const Document& doc, const std::vector<Mention>& mentions,
                                 std::size_t head, std::size_t tail, int context_size);

/// Column layout used by the booster: categorical head tag, tail tag and
/// context slots first, then token and sentence distance.
std::vector<gbdt::FeatureSpec> pair_feature_specs(int context_size);
std::vector<double> encode_pair_features(const PairFeatures& features);

struct LabeledPair {
  std::size_t head = 0;  // mention index
  std::size_t tail = 0;
  int label = kNothingClass;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

/// Ordered mention pairs whose entities hold a relation, labelled with its
/// type. Each pair appears once; the first relation listed wins.
std::vector<LabeledPair> positive_pairs(const Annotations& gold);

/// Ordered pairs of mentions from different entities with no relation from
/// the head's entity to the tail's entity.
std::vector<LabeledPair> negative_pool(const Annotations& gold);

/// All positives plus min(rate * |positives|, |pool|) negatives drawn without
/// replacement.
std::vector<LabeledPair> sample_training_pairs(const Document& doc, const Annotations& gold,
                                               int negative_rate, Rng& rng);

struct RelexModel {
  RelexTrainConfig config;
  gbdt::GbdtModel booster;
  std::vector<double> loss_history;
};

/// Fits the booster on every document's gold pairs; negatives are redrawn at
/// every boosting iteration. Throws InputError when the data holds a single class.
RelexModel train_relation_model(std::span<const Document* const> documents, const RelexTrainConfig& config);
RelexModel train_relation_model(std::span<const Document> documents, const RelexTrainConfig& config);

struct PairPrediction {
  int label = kNothingClass;
  std::vector<double> scores;         // raw booster scores
  std::vector<double> probabilities;  // softmax of scores
};

/// Throws InputError when the context size differs from the model's.
PairPrediction predict_mention_pair(const RelexModel& model, const PairFeatures& features);

/// Classifies every mention pair of every ordered pair of distinct entities
/// and emits the majority non-nothing type, if any. Ties go to the larger
/// summed probability, then to the lower type index.
std::vector<Relation> extract_relations(const RelexModel& model, const Document& doc,
                                        const std::vector<Mention>& mentions,
                                        const std::vector<Entity>& entities);

nlohmann::json relex_to_json(const RelexModel& model);
RelexModel relex_from_json(const nlohmann::json& j);
void save_relex(const std::filesystem::path& path, const RelexModel& model);
RelexModel load_relex(const std::filesystem::path& path);

}  // namespace procex
