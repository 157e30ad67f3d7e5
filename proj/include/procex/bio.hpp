#pragma once

#include <span>
#include <string>
#include <vector>

#include "procex/types.hpp"

namespace procex {

enum class BioPrefix { O, B, I };

// Label index layout: 0 = O, 1 + 2t = B-t, 2 + 2t = I-t.
inline constexpr int kNumBioLabels = 2 * static_cast<int>(kNumTags) + 1;

struct BioLabel {
  BioPrefix prefix = BioPrefix::O;
  Tag tag = Tag::Activity;  // ignored for O

  int index() const {
    if (prefix == BioPrefix::O) return 0;
    return 1 + 2 * static_cast<int>(index_of(tag)) + (prefix == BioPrefix::I ? 1 : 0);
  }
  static BioLabel from_index(int index);
  std::string name() const;

  friend bool operator==(const BioLabel& a, const BioLabel& b) { return a.index() == b.index(); }
};

/// Length-N label indices. Throws InputError for overlapping or out-of-range mentions.
std::vector<int> encode_bio(int token_count, const std::vector<Mention>& mentions);

/// Spans from label indices. A stray I-label (not continuing a B/I of the same
/// tag) opens a new mention. Mentions are returned in token order.
std::vector<Mention> decode_bio(std::span<const int> labels);

}  // namespace procex
