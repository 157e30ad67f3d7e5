#include "procex/evaluation.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace procex {

namespace {

using EntityKey = std::vector<Mention>;
using RelationKey = std::tuple<EntityKey, EntityKey, RelationType>;

EntityKey entity_key(const Entity& e, const std::vector<Mention>& mentions) {
  EntityKey key;
  for (std::size_t id : e.mention_ids) key.push_back(mentions.at(id));
  std::sort(key.begin(), key.end());
  return key;
}

// Multiset intersection of predicted and gold keys, accumulated per class.
template <typename Key>
void accumulate(MatchCounts& counts, const std::vector<std::pair<Key, std::size_t>>& predicted,
                const std::vector<std::pair<Key, std::size_t>>& gold) {
  std::map<Key, std::pair<long, long>> multiplicity;
  for (const auto& [key, cls] : predicted) {
    ++counts.classes.at(cls).predicted;
    ++multiplicity[key].first;
  }
  for (const auto& [key, cls] : gold) {
    ++counts.classes.at(cls).gold;
    ++multiplicity[key].second;
  }
  std::map<Key, std::size_t> key_class;
  for (const auto& [key, cls] : gold) key_class.emplace(key, cls);
  for (const auto& [key, n] : multiplicity) {
    const long tp = std::min(n.first, n.second);
    if (tp > 0) counts.classes[key_class.at(key)].true_positives += tp;
  }
}

std::string class_name(Level level, std::size_t i) {
  if (level == Level::Relation) return std::string(to_string(kAllRelationTypes[i]));
  return std::string(to_string(kAllTags[i]));
}

std::string num(double v) { return nlohmann::json(v).dump(); }

}  // namespace

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Mention: return "mention";
    case Level::Entity: return "entity";
    case Level::Relation: return "relation";
  }
  return "?";
}

MatchCounts::MatchCounts(Level level)
    : classes(level == Level::Relation ? kNumRelationTypes : kNumTags) {}

MatchCounts& MatchCounts::operator+=(const MatchCounts& o) {
  if (classes.size() != o.classes.size()) throw std::invalid_argument("class count mismatch");
  for (std::size_t i = 0; i < classes.size(); ++i) classes[i] += o.classes[i];
  return *this;
}

Prf prf(long tp, long predicted, long gold) {
  Prf out;
  out.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
  out.recall = gold > 0 ? static_cast<double>(tp) / static_cast<double>(gold) : 0.0;
  const double sum = out.precision + out.recall;
  out.f1 = sum > 0 ? 2.0 * out.precision * out.recall / sum : 0.0;
  return out;
}

Prf micro_prf(const MatchCounts& counts) {
  ClassCounts total;
  for (const auto& c : counts.classes) total += c;
  return prf(total.true_positives, total.predicted, total.gold);
}

Prf macro_prf(const MatchCounts& counts) {
  Prf out;
  int n = 0;
  for (const auto& c : counts.classes) {
    if (c.gold == 0) continue;
    const Prf p = prf(c.true_positives, c.predicted, c.gold);
    out.precision += p.precision;
    out.recall += p.recall;
    out.f1 += p.f1;
    ++n;
  }
  if (n > 0) {
    out.precision /= n;
    out.recall /= n;
    out.f1 /= n;
  }
  return out;
}

MatchCounts match_mentions(const std::vector<Mention>& predicted, const std::vector<Mention>& gold) {
  MatchCounts counts(Level::Mention);
  std::vector<std::pair<Mention, std::size_t>> p, g;
  for (const auto& m : predicted) p.emplace_back(m, index_of(m.tag));
  for (const auto& m : gold) g.emplace_back(m, index_of(m.tag));
  accumulate(counts, p, g);
  return counts;
}

MatchCounts match_entities(const Annotations& predicted, const Annotations& gold) {
  MatchCounts counts(Level::Entity);
  auto keys = [](const Annotations& a) {
    std::vector<std::pair<EntityKey, std::size_t>> out;
    for (const auto& e : a.entities) {
      out.emplace_back(entity_key(e, a.mentions), index_of(entity_tag(e, a.mentions)));
    }
    return out;
  };
  accumulate(counts, keys(predicted), keys(gold));
  return counts;
}

MatchCounts match_relations(const Annotations& predicted, const Annotations& gold) {
  MatchCounts counts(Level::Relation);
  auto keys = [](const Annotations& a) {
    std::vector<std::pair<RelationKey, std::size_t>> out;
    for (const auto& r : a.relations) {
      out.emplace_back(RelationKey{entity_key(a.entities.at(r.head), a.mentions),
                                   entity_key(a.entities.at(r.tail), a.mentions), r.type},
                       index_of(r.type));
    }
    return out;
  };
  accumulate(counts, keys(predicted), keys(gold));
  return counts;
}

std::vector<bool> relation_hits(const Annotations& predicted, const Annotations& gold) {
  auto key = [](const Annotations& a, const Relation& r) {
    return RelationKey{entity_key(a.entities.at(r.head), a.mentions), entity_key(a.entities.at(r.tail), a.mentions),
                       r.type};
  };
  std::map<RelationKey, long> available;
  for (const auto& r : gold.relations) ++available[key(gold, r)];
  std::vector<bool> hits;
  for (const auto& r : predicted.relations) {
    auto it = available.find(key(predicted, r));
    const bool hit = it != available.end() && it->second > 0;
    if (hit) --it->second;
    hits.push_back(hit);
  }
  return hits;
}

MatchCounts match_level(Level level, const Annotations& predicted, const Annotations& gold) {
  switch (level) {
    case Level::Mention: return match_mentions(predicted.mentions, gold.mentions);
    case Level::Entity: return match_entities(predicted, gold);
    case Level::Relation: return match_relations(predicted, gold);
  }
  throw std::invalid_argument("unknown level");
}

MetricsReport make_report(int scenario, int fold, Level level, const MatchCounts& counts) {
  MetricsReport r;
  r.scenario = scenario;
  r.fold = fold;
  r.level = level;
  for (std::size_t i = 0; i < counts.classes.size(); ++i) {
    const auto& c = counts.classes[i];
    r.classes.push_back({class_name(level, i), c, prf(c.true_positives, c.predicted, c.gold)});
  }
  r.micro = micro_prf(counts);
  r.macro = macro_prf(counts);
  return r;
}

MetricsReport average_reports(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("no reports to average");
  MetricsReport avg = reports.front();
  avg.fold = -1;
  for (auto& c : avg.classes) c = {c.name, {}, {}};
  avg.micro = avg.macro = {};
  const double n = static_cast<double>(reports.size());
  auto add = [n](Prf& into, const Prf& p) {
    into.precision += p.precision / n;
    into.recall += p.recall / n;
    into.f1 += p.f1 / n;
  };
  for (const auto& r : reports) {
    if (r.scenario != avg.scenario || r.level != avg.level || r.classes.size() != avg.classes.size()) {
      throw std::invalid_argument("cannot average reports of different scenarios");
    }
    for (std::size_t i = 0; i < r.classes.size(); ++i) {
      avg.classes[i].counts += r.classes[i].counts;
      add(avg.classes[i].scores, r.classes[i].scores);
    }
    add(avg.micro, r.micro);
    add(avg.macro, r.macro);
  }
  return avg;
}

nlohmann::json report_to_json(const MetricsReport& r) {
  auto scores = [](const Prf& p) {
    return nlohmann::json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
  };
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : r.classes) {
    classes.push_back({{"class", c.name},
                       {"true_positives", c.counts.true_positives},
                       {"predicted", c.counts.predicted},
                       {"gold", c.counts.gold},
                       {"precision", c.scores.precision},
                       {"recall", c.scores.recall},
                       {"f1", c.scores.f1}});
  }
  nlohmann::json j = {{"scenario", r.scenario},
                      {"level", to_string(r.level)},
                      {"classes", std::move(classes)},
                      {"micro", scores(r.micro)},
                      {"macro", scores(r.macro)}};
  j["fold"] = r.fold >= 0 ? nlohmann::json(r.fold) : nlohmann::json("average");
  return j;
}

std::string report_to_csv(const MetricsReport& r) {
  std::ostringstream out;
  const std::string fold = r.fold >= 0 ? std::to_string(r.fold) : "average";
  const std::string prefix = std::to_string(r.scenario) + "," + fold + "," + std::string(to_string(r.level));
  out << "scenario,fold,level,class,true_positives,predicted,gold,precision,recall,f1\n";
  for (const auto& c : r.classes) {
    out << prefix << ',' << c.name << ',' << c.counts.true_positives << ',' << c.counts.predicted
        << ',' << c.counts.gold << ',' << num(c.scores.precision) << ',' << num(c.scores.recall)
        << ',' << num(c.scores.f1) << '\n';
  }
  out << prefix << ",micro,,,," << num(r.micro.precision) << ',' << num(r.micro.recall) << ','
      << num(r.micro.f1) << '\n';
  out << prefix << ",macro,,,," << num(r.macro.precision) << ',' << num(r.macro.recall) << ','
      << num(r.macro.f1) << '\n';
  return out.str();
}

}  // namespace procex
