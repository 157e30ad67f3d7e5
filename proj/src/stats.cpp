#include "procex/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace procex::stats {

namespace {

struct Totals {
  double documents = 0;
  double sentences = 0;
};

Totals totals(const Corpus& corpus) {
  Totals t;
  t.documents = static_cast<double>(corpus.size());
  for (const auto& doc : corpus.documents) t.sentences += doc.sentence_count();
  return t;
}

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

std::vector<std::string> mention_tokens(const Document& doc, const Mention& m) {
  return {doc.tokens.begin() + m.start, doc.tokens.begin() + m.end + 1};
}

}  // namespace

std::string lowercase(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double population_stddev(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const double mu = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double trimmed_mean(std::vector<double> values, double fraction) {
  std::sort(values.begin(), values.end());
  const auto cut = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(values.size())));
  if (2 * cut >= values.size()) return mean(values);
  return mean({values.begin() + static_cast<long>(cut), values.end() - static_cast<long>(cut)});
}

std::vector<TagStatsRow> mention_statistics(const Corpus& corpus) {
  const Totals t = totals(corpus);
  std::array<std::vector<double>, kNumTags> lengths;
  double total = 0;
  for (const auto& doc : corpus.documents) {
    for (const auto& m : doc.gold.mentions) {
      lengths[index_of(m.tag)].push_back(m.length());
      total += 1;
    }
  }
  std::vector<TagStatsRow> rows;
  for (Tag tag : kAllTags) {
    const auto& ls = lengths[index_of(tag)];
    TagStatsRow row{tag};
    row.absolute_count = static_cast<long>(ls.size());
    row.relative_count = ratio(row.absolute_count, total);
    row.per_document = ratio(row.absolute_count, t.documents);
    row.per_sentence = ratio(row.absolute_count, t.sentences);
    row.average_length = mean(ls);
    row.length_stddev = population_stddev(ls);
    rows.push_back(row);
  }
  return rows;
}

std::vector<RelationStatsRow> relation_statistics(const Corpus& corpus) {
  const Totals t = totals(corpus);
  std::array<long, kNumRelationTypes> counts{};
  double total = 0;
  for (const auto& doc : corpus.documents) {
    for (const auto& r : doc.gold.relations) {
      ++counts[index_of(r.type)];
      total += 1;
    }
  }
  std::vector<RelationStatsRow> rows;
  for (RelationType type : kAllRelationTypes) {
    RelationStatsRow row{type};
    row.absolute_count = counts[index_of(type)];
    row.relative_count = ratio(row.absolute_count, total);
    row.per_document = ratio(row.absolute_count, t.documents);
    row.per_sentence = ratio(row.absolute_count, t.sentences);
    rows.push_back(row);
  }
  return rows;
}

int intra_entity_distance(const Entity& entity, const std::vector<Mention>& mentions) {
  const auto& ids = entity.mention_ids;
  if (ids.size() < 2) {
    throw std::invalid_argument("intra-entity distance is undefined for single-mention entities");
  }
  int result = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    int nearest = std::numeric_limits<int>::max();
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (i != j) nearest = std::min(nearest, token_gap(mentions.at(ids[i]), mentions.at(ids[j])));
    }
    result = std::max(result, nearest);
  }
  return result;
}

std::vector<EntityStatsRow> entity_statistics(const Corpus& corpus) {
  const Totals t = totals(corpus);
  std::array<long, kNumTags> counts{};
  std::array<long, kNumTags> multi{};
  std::array<std::vector<double>, kNumTags> distances;
  double total = 0;
  for (const auto& doc : corpus.documents) {
    for (const auto& e : doc.gold.entities) {
      const std::size_t tag = index_of(entity_tag(e, doc.gold.mentions));
      ++counts[tag];
      total += 1;
      if (e.mention_ids.size() >= 2) {
        ++multi[tag];
        distances[tag].push_back(intra_entity_distance(e, doc.gold.mentions));
      }
    }
  }
  std::vector<EntityStatsRow> rows;
  for (Tag tag : kAllTags) {
    const std::size_t i = index_of(tag);
    EntityStatsRow row;
    row.tag = tag;
    row.absolute_count = counts[i];
    row.relative_count = ratio(counts[i], total);
    row.per_document = ratio(counts[i], t.documents);
    row.per_sentence = ratio(counts[i], t.sentences);
    row.multi_mention_count = multi[i];
    if (!distances[i].empty()) {
      row.distance = DistanceSummary{median(distances[i]), mean(distances[i]),
                                     trimmed_mean(distances[i], 0.1),
                                     population_stddev(distances[i])};
    }
    rows.push_back(row);
  }
  return rows;
}

CorrelationMatrix relation_argument_correlation(const Corpus& corpus) {
  CorrelationMatrix m;
  for (const auto& doc : corpus.documents) {
    const auto& g = doc.gold;
    for (const auto& r : g.relations) {
      const std::size_t row = index_of(r.type);
      ++m.counts[row][0][index_of(entity_tag(g.entities.at(r.head), g.mentions))];
      ++m.counts[row][1][index_of(entity_tag(g.entities.at(r.tail), g.mentions))];
    }
  }
  return m;
}

double type_token_ratio(const std::vector<std::vector<std::string>>& token_lists) {
  std::unordered_set<std::string> unique;
  std::size_t total = 0;
  for (const auto& tokens : token_lists) {
    for (const auto& token : tokens) {
      unique.insert(lowercase(token));
      ++total;
    }
  }
  if (total == 0) throw std::invalid_argument("type-token ratio of an empty token list");
  return static_cast<double>(unique.size()) / static_cast<double>(total);
}

std::array<std::optional<double>, kNumTags> type_token_ratio_by_tag(const Corpus& corpus) {
  std::array<std::vector<std::vector<std::string>>, kNumTags> groups;
  for (const auto& doc : corpus.documents) {
    for (const auto& m : doc.gold.mentions) {
      groups[index_of(m.tag)].push_back(mention_tokens(doc, m));
    }
  }
  std::array<std::optional<double>, kNumTags> out;
  for (std::size_t i = 0; i < kNumTags; ++i) {
    if (!groups[i].empty()) out[i] = type_token_ratio(groups[i]);
  }
  return out;
}

std::array<std::optional<double>, kNumRelationTypes> type_token_ratio_by_relation(
    const Corpus& corpus) {
  std::array<std::vector<std::vector<std::string>>, kNumRelationTypes> groups;
  for (const auto& doc : corpus.documents) {
    const auto& g = doc.gold;
    for (const auto& r : g.relations) {
      for (std::size_t entity : {r.head, r.tail}) {
        for (std::size_t id : g.entities.at(entity).mention_ids) {
          groups[index_of(r.type)].push_back(mention_tokens(doc, g.mentions.at(id)));
        }
      }
    }
  }
  std::array<std::optional<double>, kNumRelationTypes> out;
  for (std::size_t i = 0; i < kNumRelationTypes; ++i) {
    if (!groups[i].empty()) out[i] = type_token_ratio(groups[i]);
  }
  return out;
}

}  // namespace procex::stats
