#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "laborcast/matrix.hpp"
#include "laborcast/rng.hpp"

namespace laborcast {

// Binary regression tree stored as a node arena. Leaves have feature -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  double value = 0.0;
  int left = -1;
  int right = -1;

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
};

struct ForestConfig {
  int n_trees = 300;
  int max_depth = 8;
  int min_samples_leaf = 2;
  int features_per_split = 0;  // 0 = ceil(n_features / 3)
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct BoostConfig {
  int rounds = 500;
  double learning_rate = 0.05;
  int max_depth = 4;
  double l2_leaf = 1.0;
  double min_split_gain = 0.0;
  std::uint64_t seed = 0;
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::vector<double> gain_by_feature;  // summed variance reduction
};

// Additive model of depth-limited trees fitted to gradient statistics.
struct GbtModel {
  double base_score = 0.0;
  double learning_rate = 0.0;
  std::vector<DecisionTree> trees;
  std::vector<double> gain_by_feature;
};

// One shared (feature, threshold) test per depth level; 2^depth leaves
// indexed by the split outcome bits (bit d set = right branch at level d).
struct ObliviousTree {
  std::vector<int> level_features;
  std::vector<double> level_thresholds;
  std::vector<double> leaf_values;

  std::size_t depth() const { return level_features.size(); }
};

struct ObliviousGbtModel {
  double base_score = 0.0;
  double learning_rate = 0.0;
  std::vector<ObliviousTree> trees;
  std::vector<double> gain_by_feature;
};

struct ImportanceEntry {
  std::string code;
  double share = 0.0;
};
using ImportanceRanking = std::vector<ImportanceEntry>;

// Greedy variance-reduction CART. Thresholds are midpoints between
// adjacent distinct sorted values; ties broken by lowest feature index
// then lowest threshold. When rng is given, each split draws
// features_per_split candidates without replacement from it.
// gain_out, when given, accumulates realized split gains per feature.
DecisionTree fit_cart(const Matrix& X, const std::vector<double>& y, int max_depth,
                      int min_samples_leaf, int features_per_split = 0,
                      SplitMix64* rng = nullptr, std::vector<double>* gain_out = nullptr);

double predict_tree(const DecisionTree& t, std::span<const double> row);

Forest fit_random_forest(const Matrix& X, const std::vector<double>& y,
                         const ForestConfig& cfg);
std::vector<double> predict_forest(const Forest& f, const Matrix& X);

// Second-order gradient boosting on squared loss (g = yhat - y, h = 1),
// split gain 0.5 * [GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)], leaf weight
// -G/(H+l).
GbtModel fit_second_order_gbt(const Matrix& X, const std::vector<double>& y,
                              const BoostConfig& cfg,
                              std::vector<double>* loss_trace = nullptr);
std::vector<double> predict_gbt(const GbtModel& m, const Matrix& X);

// Same objective, oblivious trees: the (feature, threshold) pair of each
// level is chosen to maximize total gain summed over the current leaves.
ObliviousGbtModel fit_oblivious_gbt(const Matrix& X, const std::vector<double>& y,
                                    const BoostConfig& cfg,
                                    std::vector<double>* loss_trace = nullptr);
double predict_oblivious_tree(const ObliviousTree& t, std::span<const double> row);
std::vector<double> predict_oblivious(const ObliviousGbtModel& m, const Matrix& X);

// Per-feature share of total realized split gain, descending, ties broken
// by code. Zero total gain yields all-zero shares in code order.
ImportanceRanking gain_importance(const std::vector<double>& gain_by_feature,
                                  const std::vector<std::string>& feature_names);

// Plain-text structure dump for audit.
std::string dump_tree(const DecisionTree& t);

}  // namespace laborcast
