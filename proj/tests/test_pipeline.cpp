#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "laborcast/errors.hpp"
#include "laborcast/metrics.hpp"
#include "laborcast/pipeline.hpp"
#include "laborcast/report.hpp"
#include "laborcast/rng.hpp"
#include "test_util.hpp"

using namespace laborcast;

namespace {

// Small configs keep the unit suite quick; the acceptance suite runs the
// reference configuration.
RunConfig fast_config() {
  RunConfig cfg;
  cfg.forest.n_trees = 25;
  cfg.gbt.rounds = 40;
  cfg.oblivious.rounds = 40;
  cfg.sgd.epochs = 100;
  cfg.lstm.epochs = 25;
  return cfg;
}

bool grids_equal(const BenchmarkGrid& a, const BenchmarkGrid& b) {
  for (int m = 0; m < kNumModels; ++m)
    for (int s = 0; s < kNumScalers; ++s)
      if (a.cells[m][s].mse != b.cells[m][s].mse || a.cells[m][s].mape != b.cells[m][s].mape)
        return false;
  return true;
}

}  // namespace

TEST_CASE("metric examples") {
  const std::vector<double> y = {4.0, 4.2};
  const std::vector<double> yhat = {4.1, 4.0};
  CHECK(mse(y, y) == 0.0);
  CHECK(mse(y, yhat) == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(mape(std::vector<double>{4.0}, std::vector<double>{4.2}) ==
        doctest::Approx(0.05).epsilon(1e-12));
  CHECK(mape(y, y) == 0.0);

  // zero target engages the guard instead of dividing by zero
  const double guarded = mape(std::vector<double>{0.0}, std::vector<double>{1.0});
  CHECK(std::isfinite(guarded));

  CHECK_THROWS_AS(mse(y, std::vector<double>{1.0}), DataError);
  CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}), DataError);
}

TEST_CASE("metrics agree with naive loop oracles on 100 random pairs") {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.next_below(30);
    std::vector<double> y(n), yhat(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform(-10.0, 10.0);
      yhat[i] = rng.uniform(-10.0, 10.0);
    }
    double sum_sq = 0.0, sum_ape = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_sq += (y[i] - yhat[i]) * (y[i] - yhat[i]);
      sum_ape += std::abs(y[i] - yhat[i]) / std::max(std::abs(y[i]), 1e-8);
    }
    CHECK(std::abs(mse(y, yhat) - sum_sq / static_cast<double>(n)) < 1e-12);
    CHECK(std::abs(mape(y, yhat) - sum_ape / static_cast<double>(n)) < 1e-12);
  }
}

TEST_CASE("directional accuracy counts sign agreement") {
  const std::vector<double> prev = {4.0, 4.0};
  CHECK(directional_accuracy(std::vector<double>{4.2, 3.8}, std::vector<double>{4.2, 3.8}, prev) ==
        1.0);
  CHECK(directional_accuracy(std::vector<double>{4.2, 3.8}, std::vector<double>{4.1, 4.3}, prev) ==
        0.5);
  // constant forecast vs a moving series scores zero
  CHECK(directional_accuracy(std::vector<double>{4.2, 3.8}, prev, prev) == 0.0);
  // zero change matches only zero
  CHECK(directional_accuracy(std::vector<double>{4.0}, std::vector<double>{4.0}, std::vector<double>{4.0}) == 1.0);
}

TEST_CASE("row_min picks the per-metric minimum of a frozen row") {
  std::array<MetricPair, kNumScalers> linear_mse_row;
  const double mse_cells[6] = {0.2898, 0.2789, 2.8077, 3.4722, 0.2789, 0.1262};
  const double mape_cells[6] = {0.0843, 0.4364, 0.0512, 0.1867, 0.1513, 0.0895};
  for (int s = 0; s < kNumScalers; ++s) linear_mse_row[s] = {mse_cells[s], mape_cells[s]};
  const MetricPair mins = row_min(linear_mse_row);
  CHECK(mins.mse == 0.1262);
  CHECK(mins.mape == 0.0512);

  std::array<MetricPair, kNumScalers> flat;
  flat.fill({0.7, 0.3});
  CHECK(row_min(flat).mse == 0.7);
  CHECK(row_min(flat).mape == 0.3);
}

TEST_CASE("row_min equals a sort-based oracle on random rows") {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<MetricPair, kNumScalers> row;
    std::vector<double> mses, mapes;
    for (auto& cell : row) {
      cell = {rng.uniform(0.0, 5.0), rng.uniform(0.0, 1.0)};
      mses.push_back(cell.mse);
      mapes.push_back(cell.mape);
    }
    std::sort(mses.begin(), mses.end());
    std::sort(mapes.begin(), mapes.end());
    CHECK(row_min(row).mse == mses.front());
    CHECK(row_min(row).mape == mapes.front());
  }
}

TEST_CASE("select_top_k returns k distinct importance-ordered codes") {
  Dataset ds = impute_backward_fill(testutil::load_bundled());
  RunConfig cfg = fast_config();

  const auto all = select_top_k(ds, 30, cfg.oblivious);
  CHECK(all.size() == 30);
  const ImportanceRanking ranking = importance_ranking(ds, cfg.oblivious);
  for (std::size_t i = 0; i < 30; ++i) CHECK(all[i] == ranking[i].code);
  for (std::size_t i = 0; i + 1 < ranking.size(); ++i)
    CHECK(ranking[i].share >= ranking[i + 1].share);

  const auto top20 = select_top_k(ds, 20, cfg.oblivious);
  CHECK(top20.size() == 20);
  CHECK(std::set<std::string>(top20.begin(), top20.end()).size() == 20);

  CHECK_THROWS_AS(select_top_k(ds, 0, cfg.oblivious), DataError);
  CHECK_THROWS_AS(select_top_k(ds, 31, cfg.oblivious), DataError);
}

TEST_CASE("selection surfaces synthetic signal features") {
  SplitMix64 rng(14);
  Dataset ds;
  const std::size_t n = 120;
  ds.features = Matrix(n, 10);
  for (double& v : ds.features.data()) v = rng.uniform(-1.0, 1.0);
  ds.target.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.target[i] = 5.0 + 2.0 * ds.features(i, 1) - 1.5 * ds.features(i, 4) +
                   1.0 * ds.features(i, 7) + 0.01 * rng.uniform(-1.0, 1.0);
    ds.dates.push_back(Date{2000 + static_cast<int>(i) / 12, static_cast<int>(i) % 12 + 1, 1});
  }
  for (std::size_t c = 0; c < 10; ++c) ds.feature_names.push_back("F" + std::to_string(c));
  ds.missing.assign(n * 10, 0);

  BoostConfig cfg;
  cfg.rounds = 500;
  cfg.learning_rate = 0.05;
  cfg.max_depth = 6;
  cfg.l2_leaf = 1.0;
  const auto top3 = select_top_k(ds, 3, cfg);
  const std::set<std::string> got(top3.begin(), top3.end());
  CHECK(got == std::set<std::string>{"F1", "F4", "F7"});
}

TEST_CASE("shift_target moves labels h months ahead") {
  Dataset ds = impute_backward_fill(testutil::load_bundled());
  const std::vector<double> original = ds.target;
  Dataset shifted = shift_target(ds, 3);
  CHECK(shifted.n_rows() == 45);
  for (std::size_t r = 0; r < 45; ++r) CHECK(shifted.target[r] == original[r + 3]);
  CHECK(shifted.dates.size() == 45);
  CHECK_THROWS_AS(shift_target(ds, -1), DataError);
  CHECK_THROWS_AS(shift_target(ds, 48), DataError);
}

TEST_CASE("benchmark grid: 42 finite cells, bitwise deterministic") {
  const Dataset ds = testutil::load_bundled();
  const RunConfig cfg = fast_config();
  const BenchmarkGrid a = run_benchmark(ds, cfg);
  const BenchmarkGrid b = run_benchmark(ds, cfg);
  CHECK(grids_equal(a, b));
  for (int m = 0; m < kNumModels; ++m)
    for (int s = 0; s < kNumScalers; ++s) {
      CHECK(std::isfinite(a.cells[m][s].mse));
      CHECK(std::isfinite(a.cells[m][s].mape));
      CHECK(a.cells[m][s].mse >= 0.0);
      CHECK(a.cells[m][s].mape >= 0.0);
    }
  CHECK(render_report(a, ReportFormat::Delimited) == render_report(b, ReportFormat::Delimited));
}

TEST_CASE("deterministic booster rows are constant across affine scalers") {
  const Dataset ds = testutil::load_bundled();
  BenchmarkDiagnostics diag;
  run_benchmark(ds, fast_config(), &diag);
  const int affine[4] = {0, 1, 4, 5};  // ZScore, Robust, MinMax, MaxAbs
  for (int model : {2, 3, 5}) {        // forest and both boosters
    const auto& base = diag.test_predictions[model][0];
    REQUIRE(base.size() == 10);
    for (int s : affine)
      for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(std::abs(diag.test_predictions[model][s][i] - base[i]) < 1e-9);
  }
}

TEST_CASE("no training artifact depends on test-block rows") {
  const Dataset ds = testutil::load_bundled();
  const RunConfig cfg = fast_config();
  BenchmarkDiagnostics clean, mutated;
  run_benchmark(ds, cfg, &clean);

  // rewrite every test-block row (boundary 38) with unrelated values
  Dataset tampered = ds;
  SplitMix64 rng(15);
  for (std::size_t r = 38; r < tampered.n_rows(); ++r) {
    for (std::size_t c = 0; c < tampered.n_cols(); ++c)
      tampered.features(r, c) = rng.uniform(-1000.0, 1000.0);
    tampered.target[r] = rng.uniform(0.5, 20.0);
  }
  run_benchmark(tampered, cfg, &mutated);

  CHECK(clean.selected_features == mutated.selected_features);
  for (int s = 0; s < kNumScalers; ++s) CHECK(clean.scaler_params[s] == mutated.scaler_params[s]);
  for (int m = 0; m < kNumModels; ++m)
    for (int s = 0; s < kNumScalers; ++s)
      CHECK(clean.train_predictions[m][s] == mutated.train_predictions[m][s]);
}

TEST_CASE("LSTM training windows never contain test labels") {
  Dataset ds = impute_backward_fill(testutil::load_bundled());
  const std::size_t boundary = SplitSpec{0.8}.resolve_boundary(ds.n_rows());
  const WindowSet all = make_windows(ds, 6);
  std::size_t train_windows = 0;
  for (std::size_t w = 0; w < all.size(); ++w)
    if (all.label_rows[w] < boundary) {
      ++train_windows;
      CHECK(ds.dates[all.label_rows[w]] < ds.dates[boundary]);
    }
  CHECK(train_windows == boundary - 6 + 1);
}

TEST_CASE("cell failures carry the cell identity") {
  const Dataset ds = testutil::load_bundled();
  RunConfig cfg = fast_config();
  cfg.sgd.initial_step = 1e18;  // guaranteed divergence
  cfg.sgd.decay = 0.0;
  try {
    run_benchmark(ds, cfg);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("SGDRegressor") != std::string::npos);
  }
}

TEST_CASE("LABORCAST_THREADS parallel run matches sequential bitwise") {
  const Dataset ds = testutil::load_bundled();
  const RunConfig cfg = fast_config();
  const BenchmarkGrid sequential = run_benchmark(ds, cfg);
  setenv("LABORCAST_THREADS", "4", 1);
  const BenchmarkGrid parallel = run_benchmark(ds, cfg);
  unsetenv("LABORCAST_THREADS");
  CHECK(grids_equal(sequential, parallel));
}

TEST_CASE("use_all_features bypasses selection") {
  const Dataset ds = testutil::load_bundled();
  RunConfig cfg = fast_config();
  cfg.use_all_features = true;
  BenchmarkDiagnostics diag;
  run_benchmark(ds, cfg, &diag);
  CHECK(diag.selected_features.size() == 30);
}
