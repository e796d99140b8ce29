#include "laborcast/tree_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "laborcast/errors.hpp"

namespace laborcast {

namespace {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Midpoint between adjacent distinct values, nudged right by a sliver of
// the gap. The nudge transforms exactly like the data under affine
// per-column maps, so a test value landing on the exact midpoint routes
// left under every affine scaler instead of flipping with rounding noise.
// No training value lies inside the open gap, so fitting is unaffected.
double split_point(double lo, double hi) { return 0.5 * (lo + hi) + 5e-10 * (hi - lo); }

// Candidate features in ascending order; a subset drawn without
// replacement from rng when requested, so tie-breaking by lowest feature
// index stays well defined.
std::vector<std::size_t> candidate_features(std::size_t n_features, int features_per_split,
                                            SplitMix64* rng) {
  std::vector<std::size_t> all(n_features);
  std::iota(all.begin(), all.end(), 0);
  if (rng == nullptr || features_per_split <= 0 ||
      static_cast<std::size_t>(features_per_split) >= n_features)
    return all;
  // Partial Fisher-Yates, then sort the drawn prefix.
  for (int i = 0; i < features_per_split; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(rng->next_below(n_features - static_cast<std::size_t>(i)));
    std::swap(all[static_cast<std::size_t>(i)], all[j]);
  }
  all.resize(static_cast<std::size_t>(features_per_split));
  std::sort(all.begin(), all.end());
  return all;
}

// Best variance-reduction split over the given samples. Gain is the
// sum-of-squares decrease; thresholds are midpoints between adjacent
// distinct sorted values. Ties keep the first candidate seen (features
// ascending, thresholds ascending).
SplitChoice best_variance_split(const Matrix& X, const std::vector<double>& y,
                                const std::vector<std::size_t>& samples,
                                const std::vector<std::size_t>& features,
                                int min_samples_leaf) {
  SplitChoice best;
  const auto n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (std::size_t i : samples) sum += y[i];
  const double parent_score = sum * sum / n;

  std::vector<std::pair<double, double>> order(samples.size());  // (x, y)
  for (std::size_t f : features) {
    for (std::size_t k = 0; k < samples.size(); ++k)
      order[k] = {X(samples[k], f), y[samples[k]]};
    std::sort(order.begin(), order.end());
    double sum_left = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      sum_left += order[k].second;
      if (order[k].first == order[k + 1].first) continue;
      const auto n_left = static_cast<double>(k + 1);
      const double n_right = n - n_left;
      if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
      const double sum_right = sum - sum_left;
      const double gain =
          sum_left * sum_left / n_left + sum_right * sum_right / n_right - parent_score;
      if (gain > best.gain) {
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = split_point(order[k].first, order[k + 1].first);
        best.gain = gain;
      }
    }
  }
  return best;
}

int grow_cart(const Matrix& X, const std::vector<double>& y, std::vector<std::size_t> samples,
              int depth, int max_depth, int min_samples_leaf, int features_per_split,
              SplitMix64* rng, std::vector<double>* gain_out, DecisionTree& tree) {
  double sum = 0.0;
  for (std::size_t i : samples) sum += y[i];
  const double mean = sum / static_cast<double>(samples.size());

  const int node_id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{.value = mean});

  if (depth >= max_depth || samples.size() < 2 * static_cast<std::size_t>(min_samples_leaf))
    return node_id;

  const auto features = candidate_features(X.cols(), features_per_split, rng);
  const SplitChoice split = best_variance_split(X, y, samples, features, min_samples_leaf);
  if (!split.found || !(split.gain > 0.0)) return node_id;

  if (gain_out) (*gain_out)[static_cast<std::size_t>(split.feature)] += split.gain;

  std::vector<std::size_t> left, right;
  for (std::size_t i : samples)
    (X(i, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(i);
  samples.clear();
  samples.shrink_to_fit();

  tree.nodes[static_cast<std::size_t>(node_id)].feature = split.feature;
  tree.nodes[static_cast<std::size_t>(node_id)].threshold = split.threshold;
  const int l = grow_cart(X, y, std::move(left), depth + 1, max_depth, min_samples_leaf,
                          features_per_split, rng, gain_out, tree);
  tree.nodes[static_cast<std::size_t>(node_id)].left = l;
  const int r = grow_cart(X, y, std::move(right), depth + 1, max_depth, min_samples_leaf,
                          features_per_split, rng, gain_out, tree);
  tree.nodes[static_cast<std::size_t>(node_id)].right = r;
  return node_id;
}

// Second-order split gain on gradient/hessian sums.
double boost_gain(double g_left, double h_left, double g_right, double h_right, double l2) {
  const double g = g_left + g_right;
  const double h = h_left + h_right;
  return 0.5 * (g_left * g_left / (h_left + l2) + g_right * g_right / (h_right + l2) -
                g * g / (h + l2));
}

double leaf_weight(double g, double h, double l2) {
  const double denom = h + l2;
  return denom > 0.0 ? -g / denom : 0.0;
}

// Best second-order split over one node's samples.
SplitChoice best_boost_split(const Matrix& X, const std::vector<double>& grad,
                             const std::vector<std::size_t>& samples, double l2) {
  SplitChoice best;
  double g_sum = 0.0;
  for (std::size_t i : samples) g_sum += grad[i];
  const double h_sum = static_cast<double>(samples.size());

  std::vector<std::pair<double, double>> order(samples.size());  // (x, g)
  for (std::size_t f = 0; f < X.cols(); ++f) {
    for (std::size_t k = 0; k < samples.size(); ++k)
      order[k] = {X(samples[k], f), grad[samples[k]]};
    std::sort(order.begin(), order.end());
    double g_left = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
      g_left += order[k].second;
      if (order[k].first == order[k + 1].first) continue;
      const auto h_left = static_cast<double>(k + 1);
      const double gain = boost_gain(g_left, h_left, g_sum - g_left, h_sum - h_left, l2);
      if (gain > best.gain) {
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = split_point(order[k].first, order[k + 1].first);
        best.gain = gain;
      }
    }
  }
  return best;
}

int grow_boost_tree(const Matrix& X, const std::vector<double>& grad,
                    std::vector<std::size_t> samples, int depth, const BoostConfig& cfg,
                    std::vector<double>* gain_out, DecisionTree& tree) {
  double g = 0.0;
  for (std::size_t i : samples) g += grad[i];
  const double h = static_cast<double>(samples.size());

  const int node_id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back(TreeNode{.value = leaf_weight(g, h, cfg.l2_leaf)});

  if (depth >= cfg.max_depth || samples.size() < 2) return node_id;
  const SplitChoice split = best_boost_split(X, grad, samples, cfg.l2_leaf);
  if (!split.found || !(split.gain > cfg.min_split_gain)) return node_id;

  if (gain_out) (*gain_out)[static_cast<std::size_t>(split.feature)] += split.gain;

  std::vector<std::size_t> left, right;
  for (std::size_t i : samples)
    (X(i, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(i);

  tree.nodes[static_cast<std::size_t>(node_id)].feature = split.feature;
  tree.nodes[static_cast<std::size_t>(node_id)].threshold = split.threshold;
  const int l = grow_boost_tree(X, grad, std::move(left), depth + 1, cfg, gain_out, tree);
  tree.nodes[static_cast<std::size_t>(node_id)].left = l;
  const int r = grow_boost_tree(X, grad, std::move(right), depth + 1, cfg, gain_out, tree);
  tree.nodes[static_cast<std::size_t>(node_id)].right = r;
  return node_id;
}

void check_fit_inputs(const Matrix& X, const std::vector<double>& y) {
  if (X.rows() == 0 || X.cols() == 0) throw DataError("tree fit needs a non-empty sample set");
  if (X.rows() != y.size()) throw DataError("tree fit: rows(X) != len(y)");
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

DecisionTree fit_cart(const Matrix& X, const std::vector<double>& y, int max_depth,
                      int min_samples_leaf, int features_per_split, SplitMix64* rng,
                      std::vector<double>* gain_out) {
  check_fit_inputs(X, y);
  DecisionTree tree;
  std::vector<std::size_t> samples(X.rows());
  std::iota(samples.begin(), samples.end(), 0);
  grow_cart(X, y, std::move(samples), 0, max_depth, std::max(1, min_samples_leaf),
            features_per_split, rng, gain_out, tree);
  return tree;
}

double predict_tree(const DecisionTree& t, std::span<const double> row) {
  const TreeNode* node = &t.nodes[0];
  while (!node->is_leaf()) {
    const int next =
        row[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right;
    node = &t.nodes[static_cast<std::size_t>(next)];
  }
  return node->value;
}

Forest fit_random_forest(const Matrix& X, const std::vector<double>& y, const ForestConfig& cfg) {
  check_fit_inputs(X, y);
  if (cfg.n_trees < 1) throw DataError("forest needs n_trees >= 1");
  const int per_split =
      cfg.features_per_split > 0
          ? cfg.features_per_split
          : static_cast<int>((X.cols() + 2) / 3);  // ceil(n_features / 3)

  Forest forest;
  forest.gain_by_feature.assign(X.cols(), 0.0);
  forest.trees.reserve(static_cast<std::size_t>(cfg.n_trees));
  const std::uint64_t stream_root = derive_seed(cfg.seed, seed_tag::kForestTree);
  for (int k = 0; k < cfg.n_trees; ++k) {
    SplitMix64 rng(derive_seed(stream_root, static_cast<std::uint64_t>(k)));
    Matrix bag_x;
    std::vector<double> bag_y;
    const Matrix* fit_x = &X;
    const std::vector<double>* fit_y = &y;
    if (cfg.bootstrap) {
      bag_x = Matrix(X.rows(), X.cols());
      bag_y.resize(X.rows());
      for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto src = static_cast<std::size_t>(rng.next_below(X.rows()));
        for (std::size_t c = 0; c < X.cols(); ++c) bag_x(r, c) = X(src, c);
        bag_y[r] = y[src];
      }
      fit_x = &bag_x;
      fit_y = &bag_y;
    }
    forest.trees.push_back(fit_cart(*fit_x, *fit_y, cfg.max_depth, cfg.min_samples_leaf,
                                    per_split, &rng, &forest.gain_by_feature));
  }
  return forest;
}

std::vector<double> predict_forest(const Forest& f, const Matrix& X) {
  std::vector<double> out(X.rows(), 0.0);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    double sum = 0.0;
    for (const auto& tree : f.trees) sum += predict_tree(tree, X.row(r));
    out[r] = sum / static_cast<double>(f.trees.size());
  }
  return out;
}

GbtModel fit_second_order_gbt(const Matrix& X, const std::vector<double>& y,
                              const BoostConfig& cfg, std::vector<double>* loss_trace) {
  check_fit_inputs(X, y);
  if (cfg.rounds < 1) throw DataError("boosting needs rounds >= 1");

  GbtModel model;
  model.base_score = mean_of(y);
  model.learning_rate = cfg.learning_rate;
  model.gain_by_feature.assign(X.cols(), 0.0);

  const std::size_t n = X.rows();
  std::vector<double> yhat(n, model.base_score);
  std::vector<double> grad(n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  for (int round = 0; round < cfg.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = yhat[i] - y[i];
    DecisionTree tree;
    grow_boost_tree(X, grad, all, 0, cfg, &model.gain_by_feature, tree);
    for (std::size_t i = 0; i < n; ++i)
      yhat[i] += cfg.learning_rate * predict_tree(tree, X.row(i));
    model.trees.push_back(std::move(tree));
    if (loss_trace) {
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) loss += (yhat[i] - y[i]) * (yhat[i] - y[i]);
      loss_trace->push_back(loss / static_cast<double>(n));
    }
  }
  return model;
}

std::vector<double> predict_gbt(const GbtModel& m, const Matrix& X) {
  std::vector<double> out(X.rows(), m.base_score);
  for (std::size_t r = 0; r < X.rows(); ++r)
    for (const auto& tree : m.trees) out[r] += m.learning_rate * predict_tree(tree, X.row(r));
  return out;
}

ObliviousGbtModel fit_oblivious_gbt(const Matrix& X, const std::vector<double>& y,
                                    const BoostConfig& cfg, std::vector<double>* loss_trace) {
  check_fit_inputs(X, y);
  if (cfg.rounds < 1) throw DataError("boosting needs rounds >= 1");

  ObliviousGbtModel model;
  model.base_score = mean_of(y);
  model.learning_rate = cfg.learning_rate;
  model.gain_by_feature.assign(X.cols(), 0.0);

  const std::size_t n = X.rows();
  std::vector<double> yhat(n, model.base_score);
  std::vector<double> grad(n);
  std::vector<std::size_t> leaf_of(n);

  // Candidate thresholds per feature: midpoints of adjacent distinct
  // training values, fixed across rounds.
  std::vector<std::vector<double>> thresholds(X.cols());
  for (std::size_t f = 0; f < X.cols(); ++f) {
    std::vector<double> values = X.column(f);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k)
      thresholds[f].push_back(split_point(values[k], values[k + 1]));
  }

  for (int round = 0; round < cfg.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = yhat[i] - y[i];
    std::fill(leaf_of.begin(), leaf_of.end(), 0);

    ObliviousTree tree;
    std::size_t n_leaves = 1;
    for (int level = 0; level < cfg.max_depth; ++level) {
      SplitChoice best;
      std::vector<double> g_left(n_leaves), h_left(n_leaves), g_all(n_leaves), h_all(n_leaves);
      for (std::size_t i = 0; i < n; ++i) {
        g_all[leaf_of[i]] += grad[i];
        h_all[leaf_of[i]] += 1.0;
      }
      for (std::size_t f = 0; f < X.cols(); ++f) {
        for (double t : thresholds[f]) {
          std::fill(g_left.begin(), g_left.end(), 0.0);
          std::fill(h_left.begin(), h_left.end(), 0.0);
          for (std::size_t i = 0; i < n; ++i) {
            if (X(i, f) <= t) {
              g_left[leaf_of[i]] += grad[i];
              h_left[leaf_of[i]] += 1.0;
            }
          }
          double total = 0.0;
          for (std::size_t leaf = 0; leaf < n_leaves; ++leaf)
            total += boost_gain(g_left[leaf], h_left[leaf], g_all[leaf] - g_left[leaf],
                                h_all[leaf] - h_left[leaf], cfg.l2_leaf);
          if (total > best.gain) {
            best.found = true;
            best.feature = static_cast<int>(f);
            best.threshold = t;
            best.gain = total;
          }
        }
      }
      if (!best.found || !(best.gain > cfg.min_split_gain)) break;

      model.gain_by_feature[static_cast<std::size_t>(best.feature)] += best.gain;
      tree.level_features.push_back(best.feature);
      tree.level_thresholds.push_back(best.threshold);
      for (std::size_t i = 0; i < n; ++i)
        if (X(i, static_cast<std::size_t>(best.feature)) > best.threshold)
          leaf_of[i] |= (1ULL << level);
      n_leaves <<= 1;
    }

    tree.leaf_values.assign(n_leaves, 0.0);
    std::vector<double> g_leaf(n_leaves, 0.0), h_leaf(n_leaves, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      g_leaf[leaf_of[i]] += grad[i];
      h_leaf[leaf_of[i]] += 1.0;
    }
    for (std::size_t leaf = 0; leaf < n_leaves; ++leaf)
      tree.leaf_values[leaf] = leaf_weight(g_leaf[leaf], h_leaf[leaf], cfg.l2_leaf);

    for (std::size_t i = 0; i < n; ++i)
      yhat[i] += cfg.learning_rate * tree.leaf_values[leaf_of[i]];
    model.trees.push_back(std::move(tree));
    if (loss_trace) {
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) loss += (yhat[i] - y[i]) * (yhat[i] - y[i]);
      loss_trace->push_back(loss / static_cast<double>(n));
    }
  }
  return model;
}

double predict_oblivious_tree(const ObliviousTree& t, std::span<const double> row) {
  std::size_t leaf = 0;
  for (std::size_t level = 0; level < t.depth(); ++level)
    if (row[static_cast<std::size_t>(t.level_features[level])] > t.level_thresholds[level])
      leaf |= (1ULL << level);
  return t.leaf_values[leaf];
}

std::vector<double> predict_oblivious(const ObliviousGbtModel& m, const Matrix& X) {
  std::vector<double> out(X.rows(), m.base_score);
  for (std::size_t r = 0; r < X.rows(); ++r)
    for (const auto& tree : m.trees)
      out[r] += m.learning_rate * predict_oblivious_tree(tree, X.row(r));
  return out;
}

ImportanceRanking gain_importance(const std::vector<double>& gain_by_feature,
                                  const std::vector<std::string>& feature_names) {
  if (gain_by_feature.size() != feature_names.size())
    throw DataError("gain vector and feature names differ in length");
  double total = 0.0;
  for (double g : gain_by_feature) total += g;

  ImportanceRanking ranking(feature_names.size());
  for (std::size_t i = 0; i < feature_names.size(); ++i)
    ranking[i] = {feature_names[i], total > 0.0 ? gain_by_feature[i] / total : 0.0};
  std::sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
    if (a.share != b.share) return a.share > b.share;
    return a.code < b.code;
  });
  return ranking;
}

std::string dump_tree(const DecisionTree& t) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    const TreeNode& n = t.nodes[i];
    if (n.is_leaf())
      out << i << " leaf " << n.value << '\n';
    else
      out << i << " split f" << n.feature << " <= " << n.threshold << " -> " << n.left << ' '
          << n.right << '\n';
  }
  return out.str();
}

}  // namespace laborcast
