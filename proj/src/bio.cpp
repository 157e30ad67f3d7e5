#include "procex/bio.hpp"

#include <algorithm>
#include <stdexcept>

#include "procex/error.hpp"

namespace procex {

BioLabel BioLabel::from_index(int index) {
  if (index < 0 || index >= kNumBioLabels) throw std::out_of_range("BIO label index");
  if (index == 0) return {};
  const int t = (index - 1) / 2;
  return {(index - 1) % 2 == 0 ? BioPrefix::B : BioPrefix::I, kAllTags[static_cast<std::size_t>(t)]};
}

std::string BioLabel::name() const {
  if (prefix == BioPrefix::O) return "O";
  return std::string(prefix == BioPrefix::B ? "B-" : "I-") + std::string(to_string(tag));
}

std::vector<int> encode_bio(int token_count, const std::vector<Mention>& mentions) {
  std::vector<int> labels(static_cast<std::size_t>(token_count), 0);
  std::vector<bool> used(labels.size(), false);
  for (const auto& m : mentions) {
    if (m.start < 0 || m.end < m.start || m.end >= token_count) {
      throw InputError("mention [" + std::to_string(m.start) + "," + std::to_string(m.end) +
                       "] outside sequence of length " + std::to_string(token_count));
    }
    for (int i = m.start; i <= m.end; ++i) {
      if (used[static_cast<std::size_t>(i)]) {
        throw InputError("overlapping mentions at token " + std::to_string(i));
      }
      used[static_cast<std::size_t>(i)] = true;
      labels[static_cast<std::size_t>(i)] =
          BioLabel{i == m.start ? BioPrefix::B : BioPrefix::I, m.tag}.index();
    }
  }
  return labels;
}

std::vector<Mention> decode_bio(std::span<const int> labels) {
  std::vector<Mention> mentions;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const BioLabel label = BioLabel::from_index(labels[i]);
    const int pos = static_cast<int>(i);
    switch (label.prefix) {
      case BioPrefix::O:
        open = false;
        break;
      case BioPrefix::B:
        mentions.push_back({pos, pos, label.tag});
        open = true;
        break;
      case BioPrefix::I:
        if (open && mentions.back().tag == label.tag) {
          mentions.back().end = pos;
        } else {
          mentions.push_back({pos, pos, label.tag});
          open = true;
        }
        break;
    }
  }
  return mentions;
}

}  // namespace procex
