#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "procex/types.hpp"

namespace procex {

/// Character-class shape: upper -> X, lower -> x, digit -> d, anything else
/// kept verbatim; runs of one class are cut after four characters
/// ("Claims" -> "Xxxxx", "2024" -> "dddd").
std::string word_shape(std::string_view token);

/// Observation attributes for one token. Window attributes cover offsets
/// -2..+2 within the token's sentence and fall back to __BOS__ / __EOS__
/// padding outside it.
std::vector<std::string> extract_token_features(const Document& doc, int position);

}  // namespace procex
