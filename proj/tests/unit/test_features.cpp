#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "procex/features.hpp"

using namespace procex;

namespace {

bool has(const std::vector<std::string>& f, const std::string& s) {
  return std::find(f.begin(), f.end(), s) != f.end();
}

}  // namespace

TEST_CASE("word shape") {
  CHECK(word_shape("Claims") == "Xxxxx");
  CHECK(word_shape("2024") == "dddd");
  CHECK(word_shape("A-1") == "X-d");
  CHECK(word_shape("") == "");
}

TEST_CASE("sentence-initial token") {
  const Document d = procex::testing::make_document("d", "Claims are checked . Then done .");
  const auto f = extract_token_features(d, 0);
  CHECK(has(f, "w[0]=claims"));
  CHECK(has(f, "shape[0]=Xxxxx"));
  CHECK(has(f, "BOS"));
  CHECK(has(f, "w[-1]=__BOS__"));
  CHECK(has(f, "w[-2]=__BOS__"));
  CHECK(has(f, "w[1]=are"));
  CHECK(std::none_of(f.begin(), f.end(), [](const std::string& s) { return s.rfind("shape[-1]", 0) == 0; }));
}

TEST_CASE("window stops at sentence boundaries") {
  const Document d = procex::testing::make_document("d", "Claims are checked . Then done .");
  const auto last = extract_token_features(d, 3);
  CHECK(has(last, "EOS"));
  CHECK(has(last, "w[1]=__EOS__"));
  const auto next = extract_token_features(d, 4);
  CHECK(has(next, "w[-1]=__BOS__"));
  CHECK(has(next, "BOS"));
  CHECK(has(extract_token_features(d, 3), "is_punct"));
}

TEST_CASE("identical contexts give identical features") {
  const Document a = procex::testing::make_document("a", "The clerk checks the form .");
  const Document b = procex::testing::make_document("b", "X y . The clerk checks the form .");
  for (int p = 0; p < a.size(); ++p) {
    CHECK(extract_token_features(a, p) == extract_token_features(b, p + 3));
    CHECK(extract_token_features(a, p) == extract_token_features(a, p));
  }
}
