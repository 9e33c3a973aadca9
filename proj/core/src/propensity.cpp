#include "pitcheval/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "pitcheval/error.hpp"
#include "pitcheval/rng.hpp"
#include "pitcheval/threading.hpp"

namespace pitcheval {

void ForestHyperparams::validate(int n_features) const {
  if (n_trees < 1) throw Error(ErrorCode::InvalidConfig, "n_trees must be >= 1");
  if (max_depth < 1) throw Error(ErrorCode::InvalidConfig, "max_depth must be >= 1");
  if (min_leaf < 1) throw Error(ErrorCode::InvalidConfig, "min_leaf must be >= 1");
  if (features_per_split < 1 || features_per_split > n_features) {
    throw Error(ErrorCode::InvalidConfig,
                "features_per_split must be in [1, n_features]");
  }
}

namespace {

// Column-major training view in canonical (unit id) order.
struct TrainingData {
  std::vector<std::vector<double>> columns;
  std::vector<std::uint8_t> labels;
  int n_features = 0;

  std::size_t n() const { return labels.size(); }
};

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingData& data, const ForestHyperparams& hp, Rng rng)
      : data_(data), hp_(hp), rng_(rng) {}

  DecisionTree build(std::vector<int> sample) {
    tree_.nodes.clear();
    work_ = std::move(sample);
    scratch_.reserve(work_.size());
    grow(0, static_cast<int>(work_.size()), 0);
    return std::move(tree_);
  }

 private:
  // Weighted binary Gini of the two children, the quantity minimized.
  static double children_impurity(double n_left, double pos_left, double n_right,
                                  double pos_right) {
    auto gini = [](double count, double positives) {
      if (count <= 0.0) return 0.0;
      const double p = positives / count;
      return 2.0 * p * (1.0 - p);
    };
    return n_left * gini(n_left, pos_left) + n_right * gini(n_right, pos_right);
  }

  SplitChoice find_split(int lo, int hi) {
    const int m = hi - lo;
    double positives = 0.0;
    for (int i = lo; i < hi; ++i) {
      positives += data_.labels[static_cast<std::size_t>(work_[static_cast<std::size_t>(i)])];
    }
    SplitChoice best;
    if (positives == 0.0 || positives == static_cast<double>(m)) return best;  // pure

    std::vector<int> candidates = rng_.sample_indices(data_.n_features, hp_.features_per_split);
    // Ascending feature order so equal-score ties resolve to the lowest
    // feature index; ascending threshold order within a feature.
    std::sort(candidates.begin(), candidates.end());

    for (int feature : candidates) {
      const auto& column = data_.columns[static_cast<std::size_t>(feature)];
      scratch_.clear();
      for (int i = lo; i < hi; ++i) {
        const int record = work_[static_cast<std::size_t>(i)];
        scratch_.emplace_back(column[static_cast<std::size_t>(record)],
                              data_.labels[static_cast<std::size_t>(record)]);
      }
      std::sort(scratch_.begin(), scratch_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      double left_n = 0.0;
      double left_pos = 0.0;
      for (int i = 1; i < m; ++i) {
        left_n += 1.0;
        left_pos += scratch_[static_cast<std::size_t>(i - 1)].second;
        const double prev = scratch_[static_cast<std::size_t>(i - 1)].first;
        const double cur = scratch_[static_cast<std::size_t>(i)].first;
        if (prev == cur) continue;  // only between distinct values
        if (i < hp_.min_leaf || m - i < hp_.min_leaf) continue;
        const double score = children_impurity(left_n, left_pos,
                                               static_cast<double>(m) - left_n,
                                               positives - left_pos);
        if (score < best.score) {
          best.found = true;
          best.feature = feature;
          best.threshold = prev + (cur - prev) / 2.0;
          best.score = score;
        }
      }
    }
    return best;
  }

  int grow(int lo, int hi, int depth) {
    const int node_index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    const int m = hi - lo;
    double positives = 0.0;
    for (int i = lo; i < hi; ++i) {
      positives += data_.labels[static_cast<std::size_t>(work_[static_cast<std::size_t>(i)])];
    }

    SplitChoice split;
    if (depth < hp_.max_depth && m >= 2 * hp_.min_leaf) split = find_split(lo, hi);

    if (!split.found) {
      tree_.nodes[static_cast<std::size_t>(node_index)].leaf_value =
          positives / static_cast<double>(m);
      return node_index;
    }

    const auto& column = data_.columns[static_cast<std::size_t>(split.feature)];
    const auto mid_it = std::stable_partition(
        work_.begin() + lo, work_.begin() + hi,
        [&](int record) { return column[static_cast<std::size_t>(record)] <= split.threshold; });
    const int mid = static_cast<int>(mid_it - work_.begin());

    tree_.nodes[static_cast<std::size_t>(node_index)].feature = split.feature;
    tree_.nodes[static_cast<std::size_t>(node_index)].threshold = split.threshold;
    const int left = grow(lo, mid, depth + 1);
    const int right = grow(mid, hi, depth + 1);
    tree_.nodes[static_cast<std::size_t>(node_index)].left = left;
    tree_.nodes[static_cast<std::size_t>(node_index)].right = right;
    return node_index;
  }

  const TrainingData& data_;
  const ForestHyperparams& hp_;
  Rng rng_;
  DecisionTree tree_;
  std::vector<int> work_;
  std::vector<std::pair<double, std::uint8_t>> scratch_;
};

}  // namespace

PropensityModel train_forest(const FeatureMatrix& data, const ForestHyperparams& hp,
                             int n_threads) {
  const int d = static_cast<int>(data.d());
  hp.validate(d);
  const std::size_t n = data.n();
  if (n == 0) throw Error(ErrorCode::SingleClass, "no training records");

  // Canonical order: sort by unit id (ties by position) so training is
  // independent of input row order.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return data.unit_id[static_cast<std::size_t>(a)] < data.unit_id[static_cast<std::size_t>(b)];
  });

  TrainingData training;
  training.n_features = d;
  training.labels.resize(n);
  training.columns.assign(static_cast<std::size_t>(d), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = static_cast<std::size_t>(order[i]);
    training.labels[i] = data.z[src];
    for (int j = 0; j < d; ++j) {
      training.columns[static_cast<std::size_t>(j)][i] = data.at(src, static_cast<std::size_t>(j));
    }
  }

  std::int64_t positives = 0;
  for (auto label : training.labels) positives += label;
  if (positives == 0 || positives == static_cast<std::int64_t>(n)) {
    throw Error(ErrorCode::SingleClass, "all treatment labels are identical");
  }

  PropensityModel model;
  model.hyperparams = hp;
  model.n_features = d;
  model.feature_names = data.names;
  model.trees.resize(static_cast<std::size_t>(hp.n_trees));

  bool all_rows_identical = true;
  for (std::size_t i = 1; i < n && all_rows_identical; ++i) {
    for (int j = 0; j < d; ++j) {
      if (training.columns[static_cast<std::size_t>(j)][i] !=
          training.columns[static_cast<std::size_t>(j)][0]) {
        all_rows_identical = false;
        break;
      }
    }
  }
  if (all_rows_identical && n > 1) {
    model.warnings.push_back("all feature vectors identical; trees are single leaves");
  }

  // in_bag[t] marks records drawn into tree t's bootstrap resample.
  std::vector<std::vector<std::uint8_t>> in_bag(static_cast<std::size_t>(hp.n_trees));

  parallel_for(static_cast<std::size_t>(hp.n_trees), n_threads, [&](std::size_t t) {
    Rng rng = Rng::substream(hp.seed, t);
    std::vector<int> sample(n);
    auto& bag = in_bag[t];
    bag.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto pick = static_cast<int>(rng.below(n));
      sample[i] = pick;
      bag[static_cast<std::size_t>(pick)] = 1;
    }
    TreeBuilder builder(training, hp, rng);
    model.trees[t] = builder.build(std::move(sample));
  });

  // Out-of-bag accuracy: average the leaf fractions of trees that did not
  // see the record, threshold at 0.5.
  std::vector<double> oob_sum(n, 0.0);
  std::vector<int> oob_count(n, 0);
  std::vector<double> row(static_cast<std::size_t>(d));
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[t][i]) continue;
      for (int j = 0; j < d; ++j) {
        row[static_cast<std::size_t>(j)] = training.columns[static_cast<std::size_t>(j)][i];
      }
      oob_sum[i] += model.trees[t].predict(row);
      oob_count[i] += 1;
    }
  }
  std::int64_t scored = 0;
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (oob_count[i] == 0) continue;
    ++scored;
    const int predicted = oob_sum[i] / oob_count[i] >= 0.5 ? 1 : 0;
    if (predicted == training.labels[i]) ++correct;
  }
  if (scored > 0) {
    model.oob_accuracy = static_cast<double>(correct) / static_cast<double>(scored);
  }
  return model;
}

double predict_propensity(const PropensityModel& model, std::span<const double> x) {
  if (static_cast<int>(x.size()) != model.n_features) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(model.n_features) + " features, got " +
                    std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += tree.predict(x);
  return sum / static_cast<double>(model.trees.size());
}

std::vector<double> predict_all(const PropensityModel& model, const FeatureMatrix& data,
                                int n_threads) {
  if (static_cast<int>(data.d()) != model.n_features) {
    throw Error(ErrorCode::DimensionMismatch, "matrix width does not match model");
  }
  std::vector<double> out(data.n());
  parallel_for(data.n(), n_threads,
               [&](std::size_t i) { out[i] = predict_propensity(model, data.row(i)); });
  return out;
}

double clip_propensity(double p, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw Error(ErrorCode::InvalidConfig, "epsilon must be in (0, 0.5)");
  }
  return std::min(std::max(p, epsilon), 1.0 - epsilon);
}

std::vector<double> clip_propensities(std::vector<double> propensities, double epsilon,
                                      ClipReport* report) {
  ClipReport local;
  for (auto& p : propensities) {
    const double clipped = clip_propensity(p, epsilon);
    if (clipped > p) ++local.clipped_low;
    if (clipped < p) ++local.clipped_high;
    p = clipped;
  }
  if (report != nullptr) *report = local;
  return propensities;
}

std::string model_to_json(const PropensityModel& model, const MetaBlock& meta) {
  nlohmann::json j;
  j["format"] = "pitcheval-forest-v1";
  j["meta"] = {{"tool_version", kToolVersion},
               {"config_hash", meta.config_hash},
               {"seed", model.hyperparams.seed}};
  j["n_features"] = model.n_features;
  j["feature_names"] = model.feature_names;
  j["hyperparams"] = {{"n_trees", model.hyperparams.n_trees},
                      {"max_depth", model.hyperparams.max_depth},
                      {"min_leaf", model.hyperparams.min_leaf},
                      {"features_per_split", model.hyperparams.features_per_split},
                      {"seed", model.hyperparams.seed}};
  if (std::isnan(model.oob_accuracy)) {
    j["oob_accuracy"] = nullptr;
  } else {
    j["oob_accuracy"] = model.oob_accuracy;
  }
  j["warnings"] = model.warnings;
  auto& trees = j["trees"];
  trees = nlohmann::json::array();
  for (const auto& tree : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : tree.nodes) {
      nlohmann::json n;
      n["feature"] = node.feature;
      n["threshold"] = node.threshold;
      n["left"] = node.left;
      n["right"] = node.right;
      if (node.is_leaf()) {
        n["leaf_value"] = node.leaf_value;
      } else {
        n["leaf_value"] = nullptr;
      }
      nodes.push_back(std::move(n));
    }
    trees.push_back(std::move(nodes));
  }
  return j.dump(2) + "\n";
}

PropensityModel model_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "pitcheval-forest-v1") {
    throw Error(ErrorCode::BadValue, "unrecognized model format");
  }
  PropensityModel model;
  model.n_features = j.at("n_features").get<int>();
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const auto& hp = j.at("hyperparams");
  model.hyperparams.n_trees = hp.at("n_trees").get<int>();
  model.hyperparams.max_depth = hp.at("max_depth").get<int>();
  model.hyperparams.min_leaf = hp.at("min_leaf").get<int>();
  model.hyperparams.features_per_split = hp.at("features_per_split").get<int>();
  model.hyperparams.seed = hp.at("seed").get<std::uint64_t>();
  if (!j.at("oob_accuracy").is_null()) {
    model.oob_accuracy = j.at("oob_accuracy").get<double>();
  }
  if (j.contains("warnings")) {
    model.warnings = j.at("warnings").get<std::vector<std::string>>();
  }
  for (const auto& tree_json : j.at("trees")) {
    DecisionTree tree;
    for (const auto& node_json : tree_json) {
      TreeNode node;
      node.feature = node_json.at("feature").get<int>();
      node.threshold = node_json.at("threshold").get<double>();
      node.left = node_json.at("left").get<int>();
      node.right = node_json.at("right").get<int>();
      if (!node_json.at("leaf_value").is_null()) {
        node.leaf_value = node_json.at("leaf_value").get<double>();
      }
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

void save_model(const std::string& path, const PropensityModel& model,
                const MetaBlock& meta) {
  write_text_file(path, model_to_json(model, meta));
}

PropensityModel load_model(const std::string& path) {
  return model_from_json(read_text_file(path));
}

}  // namespace pitcheval
