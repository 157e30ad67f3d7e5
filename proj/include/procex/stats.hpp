#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "procex/types.hpp"

namespace procex::stats {

// Mention-level statistics per tag.
struct TagStatsRow {
  Tag tag;
  long absolute_count = 0;
  double relative_count = 0;  // fraction of all mentions
  double per_document = 0;
  double per_sentence = 0;
  double average_length = 0;  // tokens
  double length_stddev = 0;   // population standard deviation
};

struct RelationStatsRow {
  RelationType type;
  long absolute_count = 0;
  double relative_count = 0;
  double per_document = 0;
  double per_sentence = 0;
};

struct DistanceSummary {
  double median = 0;
  double mean = 0;
  double trimmed_mean = 0;  // 10% trimmed at each end
  double stddev = 0;
};

struct EntityStatsRow {
  Tag tag;
  long absolute_count = 0;
  double relative_count = 0;
  double per_document = 0;
  double per_sentence = 0;
  long multi_mention_count = 0;
  std::optional<DistanceSummary> distance;  // only for tags with multi-mention entities
};

/// Example counts of each relation type by argument position and argument tag.
struct CorrelationMatrix {
  // counts[relation][0 = head, 1 = tail][tag]
  std::array<std::array<std::array<long, kNumTags>, 2>, kNumRelationTypes> counts{};

  long at(RelationType type, int position, Tag tag) const {
    return counts[index_of(type)][position][index_of(tag)];
  }
};

std::vector<TagStatsRow> mention_statistics(const Corpus& corpus);
std::vector<RelationStatsRow> relation_statistics(const Corpus& corpus);
std::vector<EntityStatsRow> entity_statistics(const Corpus& corpus);
CorrelationMatrix relation_argument_correlation(const Corpus& corpus);

/// Largest, over the entity's mentions, of each mention's smallest token gap
/// to another mention of the same entity. Throws std::invalid_argument for
/// entities with fewer than two mentions.
int intra_entity_distance(const Entity& entity, const std::vector<Mention>& mentions);

/// Unique over total tokens across all sequences, compared case-insensitively.
/// Throws std::invalid_argument when there are no tokens.
double type_token_ratio(const std::vector<std::vector<std::string>>& token_lists);

/// Type-token ratio of mention surface forms per tag; empty for tags without mentions.
std::array<std::optional<double>, kNumTags> type_token_ratio_by_tag(const Corpus& corpus);

/// Type-token ratio over the tokens of every mention of both argument
/// entities, grouped by relation type.
std::array<std::optional<double>, kNumRelationTypes> type_token_ratio_by_relation(
    const Corpus& corpus);

// Descriptive statistics helpers (exposed for tests).
double mean(const std::vector<double>& values);
double population_stddev(const std::vector<double>& values);
double median(std::vector<double> values);
/// Mean after removing floor(fraction * n) values at each end of the sorted data.
double trimmed_mean(std::vector<double> values, double fraction);

std::string lowercase(std::string_view text);

}  // namespace procex::stats
