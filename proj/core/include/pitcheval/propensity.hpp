#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pitcheval/matrix.hpp"
#include "pitcheval/meta.hpp"

namespace pitcheval {

struct ForestHyperparams {
  int n_trees = 130;
  int max_depth = 9;
  int min_leaf = 1;
  int features_per_split = 5;  // ceil(sqrt(18))
  std::uint64_t seed = 0;

  void validate(int n_features) const;
};

// feature < 0 marks a leaf; leaf_value is the positive-class fraction.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf_value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const TreeNode& node = nodes[static_cast<std::size_t>(i)];
      i = (x[static_cast<std::size_t>(node.feature)] <= node.threshold) ? node.left
                                                                        : node.right;
    }
    return nodes[static_cast<std::size_t>(i)].leaf_value;
  }
};

// Random-forest classifier for P(Z=1 | X). Prediction is the mean of the
// leaf positive fractions across trees.
struct PropensityModel {
  std::vector<DecisionTree> trees;
  ForestHyperparams hyperparams;
  std::vector<std::string> feature_names;
  int n_features = 0;
  double oob_accuracy = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;
};

// Grows hp.n_trees trees, each on a bootstrap resample of the records (with
// replacement, original size), choosing the best Gini split among
// features_per_split uniformly sampled features per node. Records are
// canonically pre-sorted by unit id, and each tree draws from its own
// counter-based substream of hp.seed, so results are independent of record
// order and of threading. Throws Error(SingleClass) when all labels match.
PropensityModel train_forest(const FeatureMatrix& data, const ForestHyperparams& hp,
                             int n_threads = 1);

// Throws Error(DimensionMismatch) when x does not match the model width.
double predict_propensity(const PropensityModel& model, std::span<const double> x);

std::vector<double> predict_all(const PropensityModel& model, const FeatureMatrix& data,
                                int n_threads = 1);

// min(max(p, epsilon), 1 - epsilon).
double clip_propensity(double p, double epsilon);

struct ClipReport {
  std::int64_t clipped_low = 0;
  std::int64_t clipped_high = 0;
  std::int64_t clipped() const { return clipped_low + clipped_high; }
};

std::vector<double> clip_propensities(std::vector<double> propensities, double epsilon,
                                      ClipReport* report = nullptr);

// Deterministic JSON round-trip of the fitted forest.
std::string model_to_json(const PropensityModel& model, const MetaBlock& meta);
PropensityModel model_from_json(const std::string& text);
void save_model(const std::string& path, const PropensityModel& model,
                const MetaBlock& meta);
PropensityModel load_model(const std::string& path);

}  // namespace pitcheval
