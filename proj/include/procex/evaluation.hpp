#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "procex/types.hpp"

namespace procex {

enum class Level { Mention, Entity, Relation };

std::string_view to_string(Level level);

struct ClassCounts {
  long true_positives = 0;
  long predicted = 0;
  long gold = 0;

  ClassCounts& operator+=(const ClassCounts& o) {
    true_positives += o.true_positives;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// Per-class counts; classes are tags (mention, entity level) or relation types.
struct MatchCounts {
  std::vector<ClassCounts> classes;

  MatchCounts() = default;
  explicit MatchCounts(std::size_t n) : classes(n) {}
  explicit MatchCounts(Level level);

  MatchCounts& operator+=(const MatchCounts& o);
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

/// P = tp/pred, R = tp/gold, F1 = 2PR/(P+R); every ratio with a zero
/// denominator is 0.
Prf prf(long true_positives, long predicted, long gold);

/// Pools counts over all classes.
Prf micro_prf(const MatchCounts& counts);
/// Unweighted mean of per-class P, R and F1 over classes with gold instances.
Prf macro_prf(const MatchCounts& counts);

// Strict one-to-one matching. A mention matches on identical span and tag; an
// entity on an identical set of matching mentions; a relation on matching
// head entity, tail entity and type.
MatchCounts match_mentions(const std::vector<Mention>& predicted, const std::vector<Mention>& gold);
MatchCounts match_entities(const Annotations& predicted, const Annotations& gold);
MatchCounts match_relations(const Annotations& predicted, const Annotations& gold);
MatchCounts match_level(Level level, const Annotations& predicted, const Annotations& gold);

/// For each predicted relation, whether it is matched by a gold relation
/// under the same one-to-one strict matching.
std::vector<bool> relation_hits(const Annotations& predicted, const Annotations& gold);

struct ClassMetrics {
  std::string name;
  ClassCounts counts;
  Prf scores;
};

struct MetricsReport {
  int scenario = 0;
  int fold = -1;  // -1 for fold averages
  Level level = Level::Mention;
  std::vector<ClassMetrics> classes;
  Prf micro;
  Prf macro;
};

MetricsReport make_report(int scenario, int fold, Level level, const MatchCounts& counts);

/// Arithmetic mean of every score across reports of the same scenario and
/// level; counts are summed.
MetricsReport average_reports(const std::vector<MetricsReport>& reports);

nlohmann::json report_to_json(const MetricsReport& report);
std::string report_to_csv(const MetricsReport& report);

}  // namespace procex
