#include "procex/features.hpp"

#include <algorithm>
#include <cctype>

#include "procex/stats.hpp"

namespace procex {

namespace {

char shape_class(unsigned char c) {
  if (std::isupper(c)) return 'X';
  if (std::islower(c)) return 'x';
  if (std::isdigit(c)) return 'd';
  return static_cast<char>(c);
}

bool all_of_chars(std::string_view s, int (*pred)(int)) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [&](char c) {
    return pred(static_cast<unsigned char>(c)) != 0;
  });
}

}  // namespace

std::string word_shape(std::string_view token) {
  std::string shape;
  char last = '\0';
  int run = 0;
  for (char c : token) {
    const char s = shape_class(static_cast<unsigned char>(c));
    run = (s == last) ? run + 1 : 1;
    last = s;
    if (run <= 4) shape.push_back(s);
  }
  return shape;
}

std::vector<std::string> extract_token_features(const Document& doc, int position) {
  const int sentence = doc.sentence_ids.at(static_cast<std::size_t>(position));
  int first = position;
  while (first > 0 && doc.sentence_ids[static_cast<std::size_t>(first - 1)] == sentence) --first;
  int last = position;
  while (last + 1 < doc.size() && doc.sentence_ids[static_cast<std::size_t>(last + 1)] == sentence) {
    ++last;
  }

  const std::string& token = doc.tokens[static_cast<std::size_t>(position)];
  const std::string lower = stats::lowercase(token);

  std::vector<std::string> f;
  f.reserve(24);
  f.emplace_back("bias");
  for (int offset = -2; offset <= 2; ++offset) {
    const int p = position + offset;
    const std::string key = "[" + std::to_string(offset) + "]=";
    if (p < first) {
      f.push_back("w" + key + "__BOS__");
    } else if (p > last) {
      f.push_back("w" + key + "__EOS__");
    } else {
      const std::string& t = doc.tokens[static_cast<std::size_t>(p)];
      f.push_back("w" + key + stats::lowercase(t));
      f.push_back("shape" + key + word_shape(t));
    }
  }
  for (std::size_t n : {2u, 3u}) {
    const std::size_t k = std::min(n, lower.size());
    f.push_back("p" + std::to_string(n) + "=" + lower.substr(0, k));
    f.push_back("s" + std::to_string(n) + "=" + lower.substr(lower.size() - k));
  }
  if (all_of_chars(token, std::isdigit)) f.emplace_back("is_digit");
  if (all_of_chars(token, std::ispunct)) f.emplace_back("is_punct");
  if (all_of_chars(token, std::isupper)) f.emplace_back("is_upper");
  if (!token.empty() && std::isupper(static_cast<unsigned char>(token[0]))) f.emplace_back("is_title");
  if (position == first) f.emplace_back("BOS");
  if (position == last) f.emplace_back("EOS");
  return f;
}

}  // namespace procex
