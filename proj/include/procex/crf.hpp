#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "procex/bio.hpp"
#include "procex/types.hpp"

namespace procex {

struct CrfConfig {
  double l2 = 0.1;
  int epochs = 50;
  double learning_rate = 0.1;  // decays as learning_rate / sqrt(epoch)
  int batch_size = 8;          // sequences per gradient step
  std::uint64_t seed = 0;
};

/// One training or decoding instance: per-position attribute ids and, when
/// labelled, the gold label per position.
struct CrfSequence {
  std::vector<std::vector<int>> attributes;
  std::vector<int> labels;

  std::size_t size() const { return attributes.size(); }
};

/// Linear-chain CRF. State weights are dense over (attribute, label) pairs,
/// laid out attribute-major; transition weights follow, laid out
/// previous-label-major.
struct CrfModel {
  int num_labels = kNumBioLabels;
  std::vector<std::string> attributes;
  std::unordered_map<std::string, int> vocabulary;
  std::vector<double> weights;
  CrfConfig config;
  std::vector<double> loss_history;  // mean objective before training and after each epoch

  CrfModel() = default;
  CrfModel(std::vector<std::string> attribute_names, int labels);

  std::size_t num_state_features() const { return attributes.size() * static_cast<std::size_t>(num_labels); }
  std::size_t num_weights() const { return num_state_features() + static_cast<std::size_t>(num_labels * num_labels); }

  double state_weight(int attribute, int label) const {
    return weights[static_cast<std::size_t>(attribute * num_labels + label)];
  }
  double transition(int from, int to) const {
    return weights[num_state_features() + static_cast<std::size_t>(from * num_labels + to)];
  }
};

/// Per-position label scores and the derived forward/backward tables (log space).
struct CrfLattice {
  int length = 0;
  int labels = 0;
  std::vector<double> emission;  // [t * labels + y]
  std::vector<double> alpha;
  std::vector<double> beta;
  double log_partition = 0;
};

CrfLattice forward_backward(const CrfModel& model, const CrfSequence& seq);

/// Unnormalized log score of a label path.
double path_score(const CrfModel& model, const CrfSequence& seq, std::span<const int> labels);

struct ViterbiResult {
  std::vector<int> labels;
  double score = 0;
};

/// Highest-scoring label path; ties resolve towards lower label indices.
ViterbiResult viterbi(const CrfModel& model, const CrfSequence& seq);

struct Objective {
  double value = 0;
  std::vector<double> gradient;
};

/// Sum over sequences of conditional log-likelihood minus
/// (l2 * l2_scale / 2) * |w|^2, with its exact gradient.
/// Throws NumericError on non-finite intermediates.
Objective log_likelihood_and_gradient(const CrfModel& model, std::span<const CrfSequence> sequences,
                                      double l2, double l2_scale = 1.0);

/// Per-sentence instances of a document, attribute ids looked up in the model
/// vocabulary (unknown attributes are dropped). Labels are filled from the gold
/// mentions when `with_labels` is set.
std::vector<CrfSequence> encode_document(const CrfModel& model, const Document& doc,
                                         bool with_labels);

/// Builds the attribute vocabulary from the documents and fits the weights by
/// mini-batch gradient ascent. Deterministic for a fixed config.
CrfModel train_crf(std::span<const Document> documents, const CrfConfig& config);
CrfModel train_crf(std::span<const Document* const> documents, const CrfConfig& config);

std::vector<int> predict_labels(const CrfModel& model, const Document& doc);
std::vector<Mention> predict_mentions(const CrfModel& model, const Document& doc);

nlohmann::json crf_to_json(const CrfModel& model);
CrfModel crf_from_json(const nlohmann::json& j);
void save_crf(const std::filesystem::path& path, const CrfModel& model);
CrfModel load_crf(const std::filesystem::path& path);

}  // namespace procex
