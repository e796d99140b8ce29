#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "laborcast/dataio.hpp"
#include "laborcast/linear_models.hpp"
#include "laborcast/lstm.hpp"
#include "laborcast/scalers.hpp"
#include "laborcast/svr.hpp"
#include "laborcast/tree_models.hpp"

namespace laborcast {

inline constexpr int kNumModels = 7;
inline constexpr int kNumScalers = 6;

// Report row order.
const std::array<std::string, kNumModels>& model_names();

struct MetricPair {
  double mse = 0.0;
  double mape = 0.0;
};

struct BenchmarkGrid {
  std::array<std::array<MetricPair, kNumScalers>, kNumModels> cells{};

  const std::array<MetricPair, kNumScalers>& row(int model) const { return cells[model]; }
};

// Elementwise minimum per metric over a row's six cells.
MetricPair row_min(const std::array<MetricPair, kNumScalers>& row);

struct RunConfig {
  double split_fraction = 0.8;
  int top_k = 20;
  int horizon = 0;                  // months ahead; 0 = nowcast
  bool select_on_train_only = true;
  bool use_all_features = false;
  std::uint64_t seed = 42;
  SgdConfig sgd;
  ForestConfig forest;
  BoostConfig gbt;
  BoostConfig oblivious{.rounds = 500, .learning_rate = 0.05, .max_depth = 6,
                        .l2_leaf = 1.0, .min_split_gain = 0.0, .seed = 0};
  SvrConfig svr;
  LstmConfig lstm;
};

// Shift the target h months ahead (features at row i predict target at
// row i + h); the last h rows are dropped.
Dataset shift_target(Dataset ds, int horizon);

// Fit an oblivious booster on all features of the training block (raw,
// unscaled), rank by gain importance, return the first k codes.
std::vector<std::string> select_top_k(const Dataset& train, int k, const BoostConfig& cfg);

ImportanceRanking importance_ranking(const Dataset& train, const BoostConfig& cfg);

// Captured per-run state for audits: everything here is a pure function of
// the training block, so runs over datasets differing only in test rows
// must produce identical values.
struct BenchmarkDiagnostics {
  std::vector<std::string> selected_features;
  std::array<std::string, kNumScalers> scaler_params;
  // Predictions of each fitted cell model on its scaled training inputs.
  std::array<std::array<std::vector<double>, kNumScalers>, kNumModels> train_predictions;
  std::array<std::array<std::vector<double>, kNumScalers>, kNumModels> test_predictions;
};

// The full pipeline: impute, select features on the training block,
// split chronologically, then fit and score every (model, scaler) cell.
// Targets are never scaled, so every cell's MSE is in percent^2.
// LABORCAST_THREADS caps cell-level parallelism (0 or 1 = sequential);
// results are identical to sequential execution.
BenchmarkGrid run_benchmark(const Dataset& ds, const RunConfig& cfg,
                            BenchmarkDiagnostics* diag = nullptr);

}  // namespace laborcast
