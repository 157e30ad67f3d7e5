#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace procex::gbdt {

enum class FeatureKind { Numeric, Categorical };

/// Column description. Categorical columns hold integer codes indexing
/// `categories`.
struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  std::vector<std::string> categories;
};

/// Dense row-major feature table.
struct FeatureMatrix {
  std::vector<FeatureSpec> features;
  std::vector<double> values;

  std::size_t cols() const { return features.size(); }
  std::size_t rows() const { return cols() == 0 ? 0 : values.size() / cols(); }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
  void add_row(std::span<const double> row);
};

struct TreeNode {
  int feature = -1;                  // -1 for leaves
  double threshold = 0;              // numeric: value <= threshold goes left
  std::vector<int> left_categories;  // categorical: sorted codes that go left
  int left = -1;
  int right = -1;
  double value = 0;                  // leaf output, already shrunk by the learning rate
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const;
  int depth() const;
};

struct GbdtConfig {
  int iterations = 1000;
  double learning_rate = 0.1;
  int max_depth = 4;
  double l2_leaf = 1.0;
  double min_child_hessian = 1e-3;
};

/// Multiclass boosted ensemble: one regression tree per class per iteration
/// over the softmax log-loss.
struct GbdtModel {
  int num_classes = 0;
  std::vector<FeatureSpec> features;
  std::vector<std::vector<RegressionTree>> trees;  // [iteration][class]

  std::vector<double> raw_scores(std::span<const double> row) const;
};

/// Rows used at a boosting iteration; the default uses every row.
using RowSampler = std::function<std::vector<std::size_t>(int iteration)>;

struct TrainResult {
  GbdtModel model;
  // Mean log-loss on each iteration's rows before its update; the last
  // entry is measured on the final iteration's rows after the update.
  std::vector<double> loss_history;
};

/// Newton boosting with exact splits: every distinct numeric value is a
/// candidate threshold; categorical splits scan prefixes of the categories
/// ordered by gradient/hessian ratio. Throws InputError when fewer than two
/// classes occur in the labels.
TrainResult train_gbdt(const FeatureMatrix& data, std::span<const int> labels, int num_classes,
                       const GbdtConfig& config, const RowSampler& sampler = {});

std::vector<double> softmax(std::span<const double> scores);

nlohmann::json to_json(const GbdtModel& model);
GbdtModel gbdt_from_json(const nlohmann::json& j);

}  // namespace procex::gbdt
