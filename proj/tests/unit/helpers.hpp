#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "procex/corpus.hpp"
#include "procex/rng.hpp"
#include "procex/types.hpp"

namespace procex::testing {

// Whitespace-separated tokens; a "." token ends a sentence.
inline Document make_document(const std::string& name, const std::string& text) {
  Document doc;
  doc.name = name;
  std::istringstream in(text);
  std::string tok;
  int sentence = 0;
  bool pending = false;
  while (in >> tok) {
    if (pending) {
      ++sentence;
      pending = false;
    }
    doc.tokens.push_back(tok);
    doc.sentence_ids.push_back(sentence);
    if (tok == ".") pending = true;
  }
  return doc;
}

// Random non-overlapping mentions over `n` tokens.
inline std::vector<Mention> random_mentions(Rng& rng, int n, double density = 0.4) {
  std::vector<Mention> out;
  int pos = 0;
  while (pos < n) {
    if (rng.bernoulli(density)) {
      const int len = 1 + static_cast<int>(rng.below(3));
      const int end = std::min(n - 1, pos + len - 1);
      out.push_back({pos, end, kAllTags[rng.below(kNumTags)]});
      pos = end + 1;
    } else {
      ++pos;
    }
  }
  return out;
}

inline std::string data_path(const std::string& name) { return std::string(PROCEX_TEST_DATA) + "/" + name; }

}  // namespace procex::testing
