#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "procex/types.hpp"

namespace procex {

struct Violation {
  std::string rule;   // short rule id, e.g. "clusters overlap"
  std::size_t index;  // offending token / mention / entity / relation index
  std::string message;
};

/// Checks every data-model invariant of a document and its gold annotations.
/// Returns an empty list iff the document is valid.
std::vector<Violation> validate_document(const Document& doc);

/// Checks invariants of a prediction set against a document's token count:
/// mention bounds, entity partition and homogeneity, relation indices.
std::vector<Violation> validate_annotations(const Annotations& annotations, int token_count);

/// Appends a singleton entity for every mention not referenced by any entity.
void add_missing_singletons(Annotations& annotations);

// JSON mapping of the corpus line schema.
nlohmann::json document_to_json(const Document& doc);
Document document_from_json(const nlohmann::json& j);
nlohmann::json annotations_to_json(const Annotations& annotations);
Annotations annotations_from_json(const nlohmann::json& j);

/// Reads a JSON-lines corpus. Blank lines are skipped. Throws ParseError
/// (with the 1-based line number) or ValidationError (naming document and rule).
Corpus parse_corpus(std::istream& in, const std::string& source = "<stream>");
Corpus load_corpus(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

/// Named prediction set for one document, as stored in prediction files.
struct DocumentAnnotations {
  std::string name;
  Annotations annotations;
};

std::vector<DocumentAnnotations> parse_annotations(std::istream& in,
                                                   const std::string& source = "<stream>");
/// Loads a prediction file and validates each entry against the named corpus document.
std::vector<DocumentAnnotations> load_annotations(const std::filesystem::path& path,
                                                  const Corpus& corpus);
void write_annotations(std::ostream& out, const std::vector<DocumentAnnotations>& items);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Document-level k-fold partition. Deterministic in seed; test sets are
/// disjoint, cover every document, and differ in size by at most one.
std::vector<Fold> split_folds(std::size_t document_count, std::size_t k, std::uint64_t seed);
std::vector<Fold> split_folds(const Corpus& corpus, std::size_t k, std::uint64_t seed);

}  // namespace procex
