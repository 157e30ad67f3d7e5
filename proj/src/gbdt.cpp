#include "procex/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "procex/error.hpp"

namespace procex::gbdt {

namespace {

// Exact per-feature discretization: each distinct value is its own level.
struct Levels {
  std::vector<std::vector<double>> values;       // [feature] sorted distinct values
  std::vector<std::vector<std::uint32_t>> bins;  // [feature][row]
};

Levels discretize(const FeatureMatrix& data) {
  Levels lv;
  const std::size_t n = data.rows();
  lv.values.resize(data.cols());
  lv.bins.resize(data.cols());
  for (std::size_t f = 0; f < data.cols(); ++f) {
    std::vector<double> col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = data.values[r * data.cols() + f];
    auto distinct = col;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    lv.bins[f].resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      lv.bins[f][r] = static_cast<std::uint32_t>(
          std::lower_bound(distinct.begin(), distinct.end(), col[r]) - distinct.begin());
    }
    lv.values[f] = std::move(distinct);
  }
  return lv;
}

struct Split {
  int feature = -1;
  double gain = 0;
  double threshold = 0;
  std::vector<std::uint32_t> left_bins;  // bins routed left
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& data, const Levels& levels, const std::vector<double>& grad,
              const std::vector<double>& hess, const GbdtConfig& config)
      : data_(data), levels_(levels), grad_(grad), hess_(hess), config_(config) {}

  RegressionTree build(std::vector<std::size_t> rows) {
    tree_ = {};
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  double score(double g, double h) const { return g * g / (h + config_.l2_leaf); }

  int grow(std::vector<std::size_t>& rows, int depth) {
    double G = 0, H = 0;
    for (std::size_t r : rows) {
      G += grad_[r];
      H += hess_[r];
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes[static_cast<std::size_t>(id)].value = -config_.learning_rate * G / (H + config_.l2_leaf);
    if (depth >= config_.max_depth || rows.size() < 2) return id;

    Split best = find_split(rows, G, H);
    if (best.feature < 0) return id;

    const auto f = static_cast<std::size_t>(best.feature);
    std::vector<bool> goes_left(levels_.values[f].size(), false);
    for (auto b : best.left_bins) goes_left[b] = true;
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (goes_left[levels_.bins[f][r]] ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    TreeNode node;
    node.feature = best.feature;
    node.value = tree_.nodes[static_cast<std::size_t>(id)].value;
    if (data_.features[f].kind == FeatureKind::Numeric) {
      node.threshold = best.threshold;
    } else {
      for (auto b : best.left_bins) node.left_categories.push_back(static_cast<int>(levels_.values[f][b]));
      std::sort(node.left_categories.begin(), node.left_categories.end());
    }
    node.left = grow(left, depth + 1);
    node.right = grow(right, depth + 1);
    tree_.nodes[static_cast<std::size_t>(id)] = std::move(node);
    return id;
  }

  Split find_split(const std::vector<std::size_t>& rows, double G, double H) const {
    Split best;
    best.gain = 1e-12;
    const double parent = score(G, H);
    for (std::size_t f = 0; f < data_.cols(); ++f) {
      const std::size_t nb = levels_.values[f].size();
      if (nb < 2) continue;
      std::vector<double> gb(nb, 0.0), hb(nb, 0.0);
      std::vector<std::uint32_t> cb(nb, 0);
      for (std::size_t r : rows) {
        const auto b = levels_.bins[f][r];
        gb[b] += grad_[r];
        hb[b] += hess_[r];
        ++cb[b];
      }
      std::vector<std::uint32_t> present;
      for (std::uint32_t b = 0; b < nb; ++b) {
        if (cb[b] > 0) present.push_back(b);
      }
      if (present.size() < 2) continue;

      const bool categorical = data_.features[f].kind == FeatureKind::Categorical;
      if (categorical) {
        std::stable_sort(present.begin(), present.end(), [&](std::uint32_t a, std::uint32_t b) {
          return gb[a] / (hb[a] + config_.l2_leaf) < gb[b] / (hb[b] + config_.l2_leaf);
        });
      }
      double gl = 0, hl = 0;
      for (std::size_t i = 0; i + 1 < present.size(); ++i) {
        gl += gb[present[i]];
        hl += hb[present[i]];
        const double gr = G - gl, hr = H - hl;
        if (hl < config_.min_child_hessian || hr < config_.min_child_hessian) continue;
        const double gain = score(gl, hl) + score(gr, hr) - parent;
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = static_cast<int>(f);
          best.left_bins.assign(present.begin(), present.begin() + static_cast<long>(i) + 1);
          if (!categorical) {
            best.threshold = 0.5 * (levels_.values[f][present[i]] + levels_.values[f][present[i + 1]]);
          }
        }
      }
    }
    return best;
  }

  const FeatureMatrix& data_;
  const Levels& levels_;
  const std::vector<double>& grad_;
  const std::vector<double>& hess_;
  const GbdtConfig& config_;
  RegressionTree tree_;
};

double mean_log_loss(const std::vector<double>& raw, std::span<const int> labels,
                     const std::vector<std::size_t>& rows, int k) {
  double total = 0;
  for (std::size_t r : rows) {
    const auto p = softmax({raw.data() + r * static_cast<std::size_t>(k), static_cast<std::size_t>(k)});
    total -= std::log(std::max(p[static_cast<std::size_t>(labels[r])], 1e-300));
  }
  return rows.empty() ? 0.0 : total / static_cast<double>(rows.size());
}

}  // namespace

void FeatureMatrix::add_row(std::span<const double> row) {
  if (row.size() != cols()) throw std::invalid_argument("feature row has wrong arity");
  values.insert(values.end(), row.begin(), row.end());
}

double RegressionTree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    const double v = row[static_cast<std::size_t>(n.feature)];
    bool left;
    if (n.left_categories.empty()) {
      left = v <= n.threshold;
    } else {
      left = std::binary_search(n.left_categories.begin(), n.left_categories.end(), static_cast<int>(v));
    }
    i = static_cast<std::size_t>(left ? n.left : n.right);
  }
  return nodes[i].value;
}

int RegressionTree::depth() const {
  std::function<int(std::size_t)> rec = [&](std::size_t i) -> int {
    if (nodes[i].feature < 0) return 0;
    return 1 + std::max(rec(static_cast<std::size_t>(nodes[i].left)), rec(static_cast<std::size_t>(nodes[i].right)));
  };
  return nodes.empty() ? 0 : rec(0);
}

std::vector<double> GbdtModel::raw_scores(std::span<const double> row) const {
  if (row.size() != features.size()) throw InputError("feature row has wrong arity for this model");
  std::vector<double> scores(static_cast<std::size_t>(num_classes), 0.0);
  for (const auto& iteration : trees) {
    for (std::size_t k = 0; k < iteration.size(); ++k) scores[k] += iteration[k].predict(row);
  }
  return scores;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  if (p.empty()) return p;
  const double hi = *std::max_element(p.begin(), p.end());
  double sum = 0;
  for (double& v : p) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

TrainResult train_gbdt(const FeatureMatrix& data, std::span<const int> labels, int num_classes,
                       const GbdtConfig& config, const RowSampler& sampler) {
  const std::size_t n = data.rows();
  if (labels.size() != n) throw InputError("label count does not match feature rows");
  if (num_classes < 2) throw InputError("boosting needs at least two classes");
  std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
  for (int y : labels) {
    if (y < 0 || y >= num_classes) throw InputError("label out of range");
    seen[static_cast<std::size_t>(y)] = true;
  }
  if (std::count(seen.begin(), seen.end(), true) < 2) {
    throw InputError("degenerate training data: fewer than two classes present");
  }
  if (config.iterations < 0 || config.max_depth < 0 || !(config.learning_rate > 0)) {
    throw InputError("invalid boosting configuration");
  }

  const Levels levels = discretize(data);
  const auto K = static_cast<std::size_t>(num_classes);
  TrainResult result;
  result.model.num_classes = num_classes;
  result.model.features = data.features;

  std::vector<double> raw(n * K, 0.0);
  std::vector<double> grad(n, 0.0), hess(n, 0.0);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> rows = all;

  for (int it = 0; it < config.iterations; ++it) {
    if (sampler) rows = sampler(it);
    result.loss_history.push_back(mean_log_loss(raw, labels, rows, num_classes));
    std::vector<std::vector<double>> probs;
    probs.reserve(rows.size());
    for (std::size_t r : rows) probs.push_back(softmax({raw.data() + r * K, K}));

    std::vector<RegressionTree> round;
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        const double p = probs[i][k];
        grad[r] = p - (static_cast<std::size_t>(labels[r]) == k ? 1.0 : 0.0);
        hess[r] = std::max(p * (1.0 - p), 1e-16);
      }
      round.push_back(TreeBuilder(data, levels, grad, hess, config).build(rows));
    }
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = data.row(r);
      for (std::size_t k = 0; k < K; ++k) raw[r * K + k] += round[k].predict(row);
    }
    result.model.trees.push_back(std::move(round));
  }
  result.loss_history.push_back(mean_log_loss(raw, labels, rows, num_classes));
  for (double v : raw) {
    if (!std::isfinite(v)) throw NumericError("boosting produced non-finite scores");
  }
  return result;
}

nlohmann::json to_json(const GbdtModel& model) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : model.features) {
    features.push_back({{"name", f.name},
                        {"kind", f.kind == FeatureKind::Numeric ? "numeric" : "categorical"},
                        {"categories", f.categories}});
  }
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& round : model.trees) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& tree : round) {
      nlohmann::json nodes = nlohmann::json::array();
      for (const auto& n : tree.nodes) {
        if (n.feature < 0) {
          nodes.push_back({{"value", n.value}});
        } else if (n.left_categories.empty()) {
          nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
        } else {
          nodes.push_back({{"feature", n.feature}, {"categories", n.left_categories}, {"left", n.left}, {"right", n.right}});
        }
      }
      jr.push_back(std::move(nodes));
    }
    iterations.push_back(std::move(jr));
  }
  return {{"num_classes", model.num_classes}, {"features", std::move(features)}, {"trees", std::move(iterations)}};
}

GbdtModel gbdt_from_json(const nlohmann::json& j) {
  GbdtModel model;
  model.num_classes = j.at("num_classes").get<int>();
  for (const auto& jf : j.at("features")) {
    FeatureSpec f;
    f.name = jf.at("name").get<std::string>();
    f.kind = jf.at("kind").get<std::string>() == "numeric" ? FeatureKind::Numeric : FeatureKind::Categorical;
    f.categories = jf.at("categories").get<std::vector<std::string>>();
    model.features.push_back(std::move(f));
  }
  for (const auto& jr : j.at("trees")) {
    std::vector<RegressionTree> round;
    for (const auto& jt : jr) {
      RegressionTree tree;
      for (const auto& jn : jt) {
        TreeNode n;
        if (jn.contains("value")) {
          n.value = jn.at("value").get<double>();
        } else {
          n.feature = jn.at("feature").get<int>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
          if (jn.contains("categories")) {
            n.left_categories = jn.at("categories").get<std::vector<int>>();
          } else {
            n.threshold = jn.at("threshold").get<double>();
          }
        }
        tree.nodes.push_back(std::move(n));
      }
      round.push_back(std::move(tree));
    }
    model.trees.push_back(std::move(round));
  }
  return model;
}

}  // namespace procex::gbdt
