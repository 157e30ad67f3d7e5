#include "procex/resolution.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "procex/error.hpp"
#include "procex/evaluation.hpp"
#include "procex/stats.hpp"

namespace procex {

namespace {

std::vector<std::string> surface(const Document& doc, const Mention& m) {
  return {doc.tokens.begin() + m.start, doc.tokens.begin() + m.end + 1};
}

std::vector<std::size_t> token_order(const std::vector<Mention>& mentions) {
  std::vector<std::size_t> order(mentions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ma = mentions[a];
    const auto& mb = mentions[b];
    return std::tie(ma.start, ma.end) < std::tie(mb.start, mb.end);
  });
  return order;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<Entity> sorted_entities(std::vector<Entity> entities) {
  for (auto& e : entities) std::sort(e.mention_ids.begin(), e.mention_ids.end());
  std::sort(entities.begin(), entities.end(),
            [](const Entity& a, const Entity& b) { return a.mention_ids.front() < b.mention_ids.front(); });
  return entities;
}

}  // namespace

ResolutionConfig::ResolutionConfig() {
  resolvable[index_of(Tag::Actor)] = true;
  resolvable[index_of(Tag::ActivityData)] = true;
}

double surface_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("surface overlap of an empty mention");
  std::map<std::string, int> counts;
  for (const auto& t : a) ++counts[stats::lowercase(t)];
  std::size_t shared = 0;
  for (const auto& t : b) {
    auto it = counts.find(stats::lowercase(t));
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++shared;
    }
  }
  return static_cast<double>(shared) / static_cast<double>(std::max(a.size(), b.size()));
}

std::vector<Entity> naive_resolve(const Document& doc, const std::vector<Mention>& mentions,
                                  const ResolutionConfig& config) {
  const auto order = token_order(mentions);
  std::vector<std::vector<std::string>> forms;
  forms.reserve(mentions.size());
  for (const auto& m : mentions) forms.push_back(surface(doc, m));

  DisjointSets sets(mentions.size());
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    if (!config.is_resolvable(mentions[i].tag)) continue;
    double best = -1.0;
    std::size_t best_j = i;
    for (std::size_t j : order) {
      if (j == i || mentions[j].tag != mentions[i].tag) continue;
      const double overlap = surface_overlap(forms[i], forms[j]);
      if (overlap > best) {
        best = overlap;
        best_j = j;
      }
    }
    if (best_j != i && best >= config.alpha_m) sets.unite(i, best_j);
  }

  std::map<std::size_t, Entity> groups;
  for (std::size_t i = 0; i < mentions.size(); ++i) groups[sets.find(i)].mention_ids.push_back(i);
  std::vector<Entity> entities;
  for (auto& [root, e] : groups) entities.push_back(std::move(e));
  return sorted_entities(std::move(entities));
}

double span_jaccard(int a_start, int a_end, int b_start, int b_end) {
  const int inter = std::min(a_end, b_end) - std::max(a_start, b_start) + 1;
  if (inter <= 0) return 0.0;
  const int uni = (a_end - a_start + 1) + (b_end - b_start + 1) - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<Entity> align_resolve(const Document& doc, const std::vector<Mention>& mentions,
                                  const CorefPrediction& coref, const ResolutionConfig& config,
                                  std::vector<ClusterTrace>* trace) {
  (void)doc;
  const auto order = token_order(mentions);
  std::array<int, kNumTags> doc_frequency{};
  for (const auto& m : mentions) ++doc_frequency[index_of(m.tag)];

  std::vector<int> owner(mentions.size(), -1);
  std::vector<Entity> entities;
  if (trace) trace->clear();

  for (const auto& cluster : coref.clusters) {
    ClusterTrace ct;
    std::array<int, kNumTags> votes{};
    for (const auto& span : cluster) {
      int mapped = -1;
      double best = 0.0;
      for (std::size_t j : order) {
        const double overlap = span_jaccard(span.start, span.end, mentions[j].start, mentions[j].end);
        if (overlap > best) {
          best = overlap;
          mapped = static_cast<int>(j);
        }
      }
      ct.mapped_mention.push_back(mapped);
      if (mapped < 0) {
        ct.spans.push_back(SpanOutcome::NoOverlap);
      } else if (best < config.alpha_m) {
        ct.spans.push_back(SpanOutcome::BelowThreshold);
      } else {
        ct.spans.push_back(SpanOutcome::Accepted);
        ++votes[index_of(mentions[static_cast<std::size_t>(mapped)].tag)];
      }
    }

    // Majority tag; ties go to the tag more frequent in the document, then to
    // the lexicographically smaller tag name.
    std::optional<Tag> majority;
    for (Tag t : kAllTags) {
      if (votes[index_of(t)] == 0) continue;
      if (!majority) {
        majority = t;
        continue;
      }
      const auto key = [&](Tag x) {
        return std::make_tuple(votes[index_of(x)], doc_frequency[index_of(x)]);
      };
      if (key(t) > key(*majority) || (key(t) == key(*majority) && to_string(t) < to_string(*majority))) {
        majority = t;
      }
    }

    std::vector<std::size_t> survivors;
    for (std::size_t s = 0; s < cluster.size(); ++s) {
      if (ct.spans[s] != SpanOutcome::Accepted) continue;
      const auto m = static_cast<std::size_t>(ct.mapped_mention[s]);
      if (mentions[m].tag != *majority) {
        ct.spans[s] = SpanOutcome::MinorityTag;
      } else {
        survivors.push_back(m);
      }
    }

    const double fraction =
        cluster.empty() ? 0.0 : static_cast<double>(survivors.size()) / static_cast<double>(cluster.size());
    if (majority && !config.is_resolvable(*majority)) {
      ct.outcome = ClusterOutcome::NotResolvable;
    } else if (fraction < config.alpha_c) {
      ct.outcome = ClusterOutcome::TooFewSurvivors;
    } else {
      ct.outcome = ClusterOutcome::Accepted;
      Entity e;
      for (std::size_t m : survivors) {
        if (owner[m] >= 0) continue;
        owner[m] = static_cast<int>(entities.size());
        e.mention_ids.push_back(m);
      }
      if (!e.mention_ids.empty()) entities.push_back(std::move(e));
    }
    if (trace) trace->push_back(std::move(ct));
  }

  for (std::size_t i = 0; i < mentions.size(); ++i) {
    if (owner[i] < 0) entities.push_back(Entity{{i}});
  }
  return sorted_entities(std::move(entities));
}

std::vector<CorefPrediction> parse_coref_predictions(std::istream& in, const std::string& source) {
  std::vector<CorefPrediction> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CorefPrediction p;
      p.name = j.at("name").get<std::string>();
      for (const auto& jc : j.at("clusters")) {
        std::vector<TokenSpan> cluster;
        for (const auto& js : jc) {
          if (!js.is_array() || js.size() != 2 || !js[0].is_number_integer() ||
              !js[1].is_number_integer()) {
            throw InputError("span must be a [start, end] pair of integers");
          }
          cluster.push_back({js[0].get<int>(), js[1].get<int>()});
        }
        p.clusters.push_back(std::move(cluster));
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, line_no, e.what());
    } catch (const InputError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return out;
}

void validate_coref_predictions(const std::vector<CorefPrediction>& predictions, const Corpus& corpus,
                                const std::string& source) {
  for (const auto& p : predictions) {
    const Document* doc = corpus.find(p.name);
    if (!doc) throw ValidationError(source + ": unknown document \"" + p.name + "\"");
    for (std::size_t c = 0; c < p.clusters.size(); ++c) {
      if (p.clusters[c].empty()) {
        throw ValidationError(source + ": document \"" + p.name + "\" has empty cluster " +
                              std::to_string(c));
      }
      for (const auto& s : p.clusters[c]) {
        if (s.start < 0 || s.end < s.start || s.end >= doc->size()) {
          throw ValidationError(source + ": document \"" + p.name + "\" span [" +
                                std::to_string(s.start) + "," + std::to_string(s.end) +
                                "] outside " + std::to_string(doc->size()) + " tokens");
        }
      }
    }
  }
}

CorefIndex load_coref_predictions(const std::filesystem::path& path, const Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open coreference predictions " + path.string());
  auto predictions = parse_coref_predictions(in, path.string());
  validate_coref_predictions(predictions, corpus, path.string());
  CorefIndex index;
  for (auto& p : predictions) {
    const std::string name = p.name;
    if (!index.emplace(name, std::move(p)).second) {
      throw ValidationError(path.string() + ": duplicate predictions for \"" + name + "\"");
    }
  }
  return index;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

GridSearchResult grid_search_alignment(std::span<const Document* const> dev, const CorefIndex& coref,
                                       const ResolutionConfig& base,
                                       const std::vector<double>& alpha_m_grid,
                                       const std::vector<double>& alpha_c_grid) {
  if (dev.empty()) throw InputError("grid search needs at least one development document");
  if (alpha_m_grid.empty() || alpha_c_grid.empty()) throw InputError("empty parameter grid");

  std::vector<double> ms = alpha_m_grid;
  std::vector<double> cs = alpha_c_grid;
  std::sort(ms.begin(), ms.end());
  std::sort(cs.begin(), cs.end());

  const CorefPrediction empty;
  GridSearchResult result;
  bool have_best = false;
  for (double am : ms) {
    for (double ac : cs) {
      ResolutionConfig config = base;
      config.alpha_m = am;
      config.alpha_c = ac;
      MatchCounts counts(Level::Entity);
      for (const Document* doc : dev) {
        auto it = coref.find(doc->name);
        Annotations predicted;
        predicted.mentions = doc->gold.mentions;
        predicted.entities = align_resolve(*doc, predicted.mentions,
                                           it == coref.end() ? empty : it->second, config);
        counts += match_entities(predicted, doc->gold);
      }
      const double f1 = micro_prf(counts).f1;
      result.surface.push_back({am, ac, f1});
      if (!have_best || f1 > result.f1) {
        result.alpha_m = am;
        result.alpha_c = ac;
        result.f1 = f1;
        have_best = true;
      }
    }
  }
  return result;
}

}  // namespace procex
