#include "procex/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "procex/error.hpp"
#include "procex/rng.hpp"

namespace procex {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  if (!j.is_object()) throw InputError("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("missing key \"") + key + "\"");
  return *it;
}

int as_int(const json& j, const char* what) {
  if (!j.is_number_integer()) throw InputError(std::string(what) + " must be an integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw InputError(std::string(what) + " out of range");
  }
  return static_cast<int>(v);
}

std::size_t as_index(const json& j, const char* what) {
  const int v = as_int(j, what);
  if (v < 0) throw InputError(std::string(what) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

const json& as_array(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array");
  return j;
}

std::string as_string(const json& j, const char* what) {
  if (!j.is_string()) throw InputError(std::string(what) + " must be a string");
  return j.get<std::string>();
}

void add(std::vector<Violation>& out, std::string rule, std::size_t index, std::string message) {
  out.push_back({std::move(rule), index, std::move(message)});
}

}  // namespace

std::vector<Violation> validate_annotations(const Annotations& a, int token_count) {
  std::vector<Violation> out;
  const std::size_t n_mentions = a.mentions.size();

  for (std::size_t i = 0; i < n_mentions; ++i) {
    const Mention& m = a.mentions[i];
    if (m.start < 0 || m.end < m.start || m.end >= token_count) {
      add(out, "mention bounds", i,
          "mention " + std::to_string(i) + " span [" + std::to_string(m.start) + "," +
              std::to_string(m.end) + "] outside document of " + std::to_string(token_count) +
              " tokens");
    }
  }

  std::vector<int> owner(n_mentions, -1);
  for (std::size_t e = 0; e < a.entities.size(); ++e) {
    const auto& ids = a.entities[e].mention_ids;
    if (ids.empty()) {
      add(out, "empty entity", e, "entity " + std::to_string(e) + " has no mentions");
      continue;
    }
    std::optional<Tag> tag;
    for (std::size_t id : ids) {
      if (id >= n_mentions) {
        add(out, "entity mention index", e,
            "entity " + std::to_string(e) + " references missing mention " + std::to_string(id));
        continue;
      }
      if (owner[id] == static_cast<int>(e)) {
        add(out, "clusters overlap", e,
            "entity " + std::to_string(e) + " lists mention " + std::to_string(id) + " twice");
        continue;
      }
      if (owner[id] >= 0) {
        add(out, "clusters overlap", e,
            "mention " + std::to_string(id) + " belongs to entities " + std::to_string(owner[id]) +
                " and " + std::to_string(e));
        continue;
      }
      owner[id] = static_cast<int>(e);
      if (!tag) {
        tag = a.mentions[id].tag;
      } else if (*tag != a.mentions[id].tag) {
        add(out, "type homogeneity", e,
            "entity " + std::to_string(e) + " mixes " + std::string(to_string(*tag)) + " and " +
                std::string(to_string(a.mentions[id].tag)));
      }
    }
  }
  for (std::size_t i = 0; i < n_mentions; ++i) {
    if (owner[i] < 0) {
      add(out, "mention not clustered", i,
          "mention " + std::to_string(i) + " belongs to no entity");
    }
  }

  for (std::size_t r = 0; r < a.relations.size(); ++r) {
    const Relation& rel = a.relations[r];
    if (rel.head >= a.entities.size() || rel.tail >= a.entities.size()) {
      add(out, "relation entity index", r,
          "relation " + std::to_string(r) + " references a missing entity");
    }
  }
  return out;
}

std::vector<Violation> validate_document(const Document& doc) {
  std::vector<Violation> out;
  const int n = doc.size();
  if (n == 0) add(out, "empty document", 0, "document has no tokens");
  if (doc.sentence_ids.size() != doc.tokens.size()) {
    add(out, "sentence ids length", 0,
        "sentence_ids has " + std::to_string(doc.sentence_ids.size()) + " entries for " +
            std::to_string(n) + " tokens");
  } else if (n > 0) {
    if (doc.sentence_ids[0] != 0) add(out, "sentence ids start", 0, "sentence_ids[0] must be 0");
    for (std::size_t i = 1; i < doc.sentence_ids.size(); ++i) {
      const int step = doc.sentence_ids[i] - doc.sentence_ids[i - 1];
      if (step != 0 && step != 1) {
        add(out, "sentence ids step", i,
            "sentence_ids[" + std::to_string(i) + "] jumps by " + std::to_string(step));
      }
    }
  }
  auto rest = validate_annotations(doc.gold, n);
  out.insert(out.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
  return out;
}

void add_missing_singletons(Annotations& a) {
  std::vector<bool> covered(a.mentions.size(), false);
  for (const auto& e : a.entities) {
    for (std::size_t id : e.mention_ids) {
      if (id < covered.size()) covered[id] = true;
    }
  }
  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (!covered[i]) a.entities.push_back(Entity{{i}});
  }
}

json annotations_to_json(const Annotations& a) {
  json mentions = json::array();
  for (const auto& m : a.mentions) {
    mentions.push_back({{"start", m.start}, {"end", m.end}, {"tag", to_string(m.tag)}});
  }
  json entities = json::array();
  for (const auto& e : a.entities) entities.push_back(e.mention_ids);
  json relations = json::array();
  for (const auto& r : a.relations) {
    relations.push_back({{"head", r.head}, {"tail", r.tail}, {"type", to_string(r.type)}});
  }
  return {{"mentions", std::move(mentions)},
          {"entities", std::move(entities)},
          {"relations", std::move(relations)}};
}

Annotations annotations_from_json(const json& j) {
  Annotations a;
  for (const auto& jm : as_array(require(j, "mentions"), "mentions")) {
    Mention m;
    m.start = as_int(require(jm, "start"), "mention start");
    m.end = as_int(require(jm, "end"), "mention end");
    const auto tag_name = as_string(require(jm, "tag"), "mention tag");
    const auto tag = parse_tag(tag_name);
    if (!tag) throw InputError("unknown mention tag \"" + tag_name + "\"");
    m.tag = *tag;
    a.mentions.push_back(m);
  }
  if (j.contains("entities")) {
    for (const auto& je : as_array(j.at("entities"), "entities")) {
      Entity e;
      for (const auto& id : as_array(je, "entity")) {
        e.mention_ids.push_back(as_index(id, "entity mention index"));
      }
      std::sort(e.mention_ids.begin(), e.mention_ids.end());
      a.entities.push_back(std::move(e));
    }
  }
  if (j.contains("relations")) {
    for (const auto& jr : as_array(j.at("relations"), "relations")) {
      Relation r;
      r.head = as_index(require(jr, "head"), "relation head");
      r.tail = as_index(require(jr, "tail"), "relation tail");
      const auto type_name = as_string(require(jr, "type"), "relation type");
      const auto type = parse_relation_type(type_name);
      if (!type) throw InputError("unknown relation type \"" + type_name + "\"");
      r.type = *type;
      a.relations.push_back(r);
    }
  }
  return a;
}

json document_to_json(const Document& doc) {
  json j = annotations_to_json(doc.gold);
  j["name"] = doc.name;
  j["tokens"] = doc.tokens;
  j["sentence_ids"] = doc.sentence_ids;
  return j;
}

Document document_from_json(const json& j) {
  Document doc;
  doc.name = as_string(require(j, "name"), "name");
  for (const auto& t : as_array(require(j, "tokens"), "tokens")) {
    doc.tokens.push_back(as_string(t, "token"));
  }
  for (const auto& s : as_array(require(j, "sentence_ids"), "sentence_ids")) {
    doc.sentence_ids.push_back(as_int(s, "sentence id"));
  }
  doc.gold = annotations_from_json(j);
  return doc;
}

Corpus parse_corpus(std::istream& in, const std::string& source) {
  Corpus corpus;
  std::unordered_set<std::string> names;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Document doc;
    try {
      doc = document_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    } catch (const InputError& e) {
      throw ParseError(source, line_no, e.what());
    }
    add_missing_singletons(doc.gold);
    if (auto violations = validate_document(doc); !violations.empty()) {
      const auto& v = violations.front();
      throw ValidationError(source + ":" + std::to_string(line_no) + ": document \"" + doc.name +
                            "\" violates \"" + v.rule + "\": " + v.message);
    }
    if (!names.insert(doc.name).second) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": duplicate document name \"" +
                            doc.name + "\"");
    }
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file " + path.string());
  return parse_corpus(in, path.string());
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus.documents) out << document_to_json(doc).dump() << '\n';
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_corpus(out, corpus);
}

std::vector<DocumentAnnotations> parse_annotations(std::istream& in, const std::string& source) {
  std::vector<DocumentAnnotations> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      items.push_back({as_string(require(j, "name"), "name"), annotations_from_json(j)});
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    } catch (const InputError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return items;
}

std::vector<DocumentAnnotations> load_annotations(const std::filesystem::path& path,
                                                  const Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open annotation file " + path.string());
  auto items = parse_annotations(in, path.string());
  for (auto& item : items) {
    const Document* doc = corpus.find(item.name);
    if (!doc) throw ValidationError(path.string() + ": unknown document \"" + item.name + "\"");
    add_missing_singletons(item.annotations);
    if (auto v = validate_annotations(item.annotations, doc->size()); !v.empty()) {
      throw ValidationError(path.string() + ": document \"" + item.name + "\" violates \"" +
                            v.front().rule + "\": " + v.front().message);
    }
  }
  return items;
}

void write_annotations(std::ostream& out, const std::vector<DocumentAnnotations>& items) {
  for (const auto& item : items) {
    json j = annotations_to_json(item.annotations);
    j["name"] = item.name;
    out << j.dump() << '\n';
  }
}

std::vector<Fold> split_folds(std::size_t document_count, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw InputError("fold count must be positive");
  if (k > document_count) {
    throw InputError("cannot split " + std::to_string(document_count) + " documents into " +
                     std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(document_count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<Fold> folds(k);
  const std::size_t base = document_count / k;
  const std::size_t extra = document_count % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].test.assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
    std::sort(folds[f].test.begin(), folds[f].test.end());
  }
  for (std::size_t f = 0; f < k; ++f) {
    std::set<std::size_t> test(folds[f].test.begin(), folds[f].test.end());
    for (std::size_t d = 0; d < document_count; ++d) {
      if (!test.count(d)) folds[f].train.push_back(d);
    }
  }
  return folds;
}

std::vector<Fold> split_folds(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  return split_folds(corpus.size(), k, seed);
}

}  // namespace procex
