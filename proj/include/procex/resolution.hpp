#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "procex/types.hpp"

namespace procex {

struct ResolutionConfig {
  double alpha_m = 0.8;  // mention overlap threshold
  double alpha_c = 0.5;  // fraction of a predicted cluster that must survive
  std::array<bool, kNumTags> resolvable{};  // tags allowed in multi-mention entities

  ResolutionConfig();
  bool is_resolvable(Tag tag) const { return resolvable[index_of(tag)]; }
};

struct TokenSpan {
  int start = 0;
  int end = 0;  // inclusive
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

/// Externally produced coreference clusters for one document.
struct CorefPrediction {
  std::string name;
  std::vector<std::vector<TokenSpan>> clusters;
};

using CorefIndex = std::map<std::string, CorefPrediction, std::less<>>;

/// Case-insensitive token-multiset intersection over the longer mention's
/// length. Throws std::invalid_argument for empty input.
double surface_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Links each resolvable mention to its best same-tag surface match when the
/// overlap reaches alpha_m and returns the connected components. Non-resolvable
/// mentions stay singletons. Entities come out sorted by first mention.
std::vector<Entity> naive_resolve(const Document& doc, const std::vector<Mention>& mentions,
                                  const ResolutionConfig& config);

/// Jaccard overlap of the token index sets of two spans.
double span_jaccard(int a_start, int a_end, int b_start, int b_end);

enum class SpanOutcome {
  Accepted,
  NoOverlap,       // no mention shares a token with the span
  BelowThreshold,  // best mention overlap under alpha_m
  MinorityTag,     // mapped mention disagrees with the cluster's majority tag
};

enum class ClusterOutcome {
  Accepted,
  TooFewSurvivors,  // surviving fraction under alpha_c
  NotResolvable,    // majority tag outside the resolvable set
};

struct ClusterTrace {
  std::vector<SpanOutcome> spans;
  std::vector<int> mapped_mention;  // -1 when the span maps to nothing
  ClusterOutcome outcome = ClusterOutcome::Accepted;
};

/// Maps predicted coreference spans onto mentions and keeps a cluster only if
/// enough of its spans survive the overlap, threshold, and majority-tag checks.
/// Mentions not claimed by a surviving cluster become singletons; a mention
/// claimed by several clusters stays with the first. Per-cluster decisions are
/// written to `trace` when given.
std::vector<Entity> align_resolve(const Document& doc, const std::vector<Mention>& mentions,
                                  const CorefPrediction& coref, const ResolutionConfig& config,
                                  std::vector<ClusterTrace>* trace = nullptr);

std::vector<CorefPrediction> parse_coref_predictions(std::istream& in,
                                                     const std::string& source = "<stream>");
/// Loads and validates predictions against the corpus: every document must
/// exist, clusters must be non-empty and spans within bounds.
CorefIndex load_coref_predictions(const std::filesystem::path& path, const Corpus& corpus);
void validate_coref_predictions(const std::vector<CorefPrediction>& predictions, const Corpus& corpus,
                                const std::string& source);

struct GridPoint {
  double alpha_m = 0;
  double alpha_c = 0;
  double f1 = 0;
};

struct GridSearchResult {
  double alpha_m = 0;
  double alpha_c = 0;
  double f1 = 0;
  std::vector<GridPoint> surface;
};

/// 0.0, 0.1, ..., 1.0
std::vector<double> default_alpha_grid();

/// Exhaustive search over (alpha_m, alpha_c) maximizing entity micro-F1 of
/// align_resolve on the documents' gold mentions. Ties go to the smallest
/// alpha_m, then the smallest alpha_c. Throws InputError for an empty dev set.
GridSearchResult grid_search_alignment(std::span<const Document* const> dev, const CorefIndex& coref,
                                       const ResolutionConfig& base,
                                       const std::vector<double>& alpha_m_grid = default_alpha_grid(),
                                       const std::vector<double>& alpha_c_grid = default_alpha_grid());

}  // namespace procex
