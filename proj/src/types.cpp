#include "procex/types.hpp"

#include <algorithm>

namespace procex {

namespace {

constexpr std::array<std::string_view, kNumTags> kTagNames = {
    "Activity",   "Activity Data", "Actor",
    "Further Specification", "XOR Gateway", "AND Gateway",
    "Condition Specification",
};

constexpr std::array<std::string_view, kNumRelationTypes> kRelationNames = {
    "Flows",          "Uses",
    "Actor Performer", "Actor Recipient",
    "Further Specification", "Same Gateway",
};

}  // namespace

std::string_view to_string(Tag tag) { return kTagNames[index_of(tag)]; }

std::string_view to_string(RelationType type) { return kRelationNames[index_of(type)]; }

std::optional<Tag> parse_tag(std::string_view name) {
  for (std::size_t i = 0; i < kNumTags; ++i) {
    if (kTagNames[i] == name) return kAllTags[i];
  }
  return std::nullopt;
}

std::optional<RelationType> parse_relation_type(std::string_view name) {
  for (std::size_t i = 0; i < kNumRelationTypes; ++i) {
    if (kRelationNames[i] == name) return kAllRelationTypes[i];
  }
  return std::nullopt;
}

const Document* Corpus::find(std::string_view name) const {
  auto it = std::find_if(documents.begin(), documents.end(),
                         [&](const Document& d) { return d.name == name; });
  return it == documents.end() ? nullptr : &*it;
}

int token_gap(const Mention& a, const Mention& b) {
  const int gap = std::max(a.start, b.start) - std::min(a.end, b.end) - 1;
  return std::max(gap, 0);
}

Tag entity_tag(const Entity& entity, const std::vector<Mention>& mentions) {
  return mentions.at(entity.mention_ids.at(0)).tag;
}

std::vector<Entity> singleton_entities(std::size_t mention_count) {
  std::vector<Entity> entities(mention_count);
  for (std::size_t i = 0; i < mention_count; ++i) entities[i].mention_ids = {i};
  return entities;
}

}  // namespace procex
