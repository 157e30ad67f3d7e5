#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace procex {

// Process-element tag set. Order is the canonical report order.
enum class Tag : std::uint8_t {
  Activity,
  ActivityData,
  Actor,
  FurtherSpecification,
  XorGateway,
  AndGateway,
  ConditionSpecification,
};

inline constexpr std::size_t kNumTags = 7;
inline constexpr std::array<Tag, kNumTags> kAllTags = {
    Tag::Activity,   Tag::ActivityData, Tag::Actor,
    Tag::FurtherSpecification, Tag::XorGateway, Tag::AndGateway,
    Tag::ConditionSpecification,
};

enum class RelationType : std::uint8_t {
  Flows,
  Uses,
  ActorPerformer,
  ActorRecipient,
  FurtherSpecification,
  SameGateway,
};

inline constexpr std::size_t kNumRelationTypes = 6;
inline constexpr std::array<RelationType, kNumRelationTypes> kAllRelationTypes = {
    RelationType::Flows,          RelationType::Uses,
    RelationType::ActorPerformer, RelationType::ActorRecipient,
    RelationType::FurtherSpecification, RelationType::SameGateway,
};

constexpr std::size_t index_of(Tag t) { return static_cast<std::size_t>(t); }
constexpr std::size_t index_of(RelationType r) { return static_cast<std::size_t>(r); }

std::string_view to_string(Tag tag);
std::string_view to_string(RelationType type);

// Exact, case-sensitive lookup against the fixed vocabularies.
std::optional<Tag> parse_tag(std::string_view name);
std::optional<RelationType> parse_relation_type(std::string_view name);

/// A token span [start, end] (both inclusive) carrying a process-element tag.
struct Mention {
  int start = 0;
  int end = 0;
  Tag tag = Tag::Activity;

  int length() const { return end - start + 1; }
  friend bool operator==(const Mention&, const Mention&) = default;
  friend auto operator<=>(const Mention&, const Mention&) = default;
};

/// A cluster of mentions (indices into the owning mention list).
struct Entity {
  std::vector<std::size_t> mention_ids;

  friend bool operator==(const Entity&, const Entity&) = default;
};

/// Directed entity-level relation.
struct Relation {
  std::size_t head = 0;
  std::size_t tail = 0;
  RelationType type = RelationType::Flows;

  friend bool operator==(const Relation&, const Relation&) = default;
};

/// Mentions, entities over those mentions, and relations over those entities.
/// Used both for gold annotations and for pipeline predictions.
struct Annotations {
  std::vector<Mention> mentions;
  std::vector<Entity> entities;
  std::vector<Relation> relations;

  friend bool operator==(const Annotations&, const Annotations&) = default;
};

struct Document {
  std::string name;
  std::vector<std::string> tokens;
  std::vector<int> sentence_ids;
  Annotations gold;

  int size() const { return static_cast<int>(tokens.size()); }
  int sentence_count() const { return sentence_ids.empty() ? 0 : sentence_ids.back() + 1; }

  friend bool operator==(const Document&, const Document&) = default;
};

struct Corpus {
  std::vector<Document> documents;

  std::size_t size() const { return documents.size(); }
  const Document* find(std::string_view name) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Tokens strictly between two spans; 0 when adjacent or overlapping.
int token_gap(const Mention& a, const Mention& b);

/// Tag of an entity, taken from its first mention.
Tag entity_tag(const Entity& entity, const std::vector<Mention>& mentions);

/// One singleton entity per mention, in mention order.
std::vector<Entity> singleton_entities(std::size_t mention_count);

}  // namespace procex
